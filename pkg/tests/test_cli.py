import csv
import json

import pytest

from axiswirl.cli import main

SMALL = """
[scenario]
n_rho = 12
t_end = 0.25
snapshot_interval = 0.01
{extra}
"""


def _write(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_exponents_scan(tmp_path, capsys):
    assert main(["exponents", "--scan", "64", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "exponents_scan.csv")
    assert len(rows) == 64 * 64
    assert sum(r["feasible"] == "true" for r in rows) > 0
    spec_rows = {(r["s"], r["l"]): r for r in _rows(tmp_path / "exponents.csv")}
    assert spec_rows[("7/4", "10")]["m"] == "58/7" and spec_rows[("7/4", "10")]["mu"] == "1/58"
    assert spec_rows[("4", "12/7")]["mu_discrepancy"] == "true"
    doc = json.loads((tmp_path / "exponents.json").read_text())
    assert doc["scan"]["has_l_below_two"] is True
    assert "feasible" in capsys.readouterr().out


def test_zero_run_then_diagnose(tmp_path):
    cfg = _write(tmp_path, SMALL.format(extra="initial = zero"))
    out = tmp_path / "o"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    assert main(["diagnose", "--config", cfg, "--out", str(out), "--snapshots", str(out / "snapshots")]) == 0
    rows = _rows(out / "diagnose.csv")
    assert len(rows) == 3
    for row in rows:
        for key in ("A", "E", "C", "D", "H", "M_7/4:10", "M_4:12/7", "M_3:3"):
            assert float(row[key]) == 0.0
        assert len(row["config_hash"]) == 64 and json.loads(row["tolerances"])["cfl"] == 0.4


def test_zoom_decaying_vortex(tmp_path, capsys):
    cfg = _write(tmp_path, SMALL.format(extra="initial = decaying_vortex"))
    assert main(["zoom", "--config", cfg, "--out", str(tmp_path / "z")]) == 0
    assert "no blow-up records beyond k = 0" in capsys.readouterr().out
    doc = json.loads((tmp_path / "z" / "zoom.json").read_text())
    assert doc["message"] == "no blow-up records beyond k = 0" and len(doc["records"]) == 1


def test_zoom_ramped_swirl(tmp_path):
    text = """
[scenario]
n_rho = 16
initial = ramped_swirl
forcing = ramped_swirl
t_end = 0.44
snapshot_interval = 0.005
[rescaler]
start_time = 0.25
n_rho = 12
n_time = 5
[output]
snapshots = false
"""
    out = tmp_path / "z"
    assert main(["zoom", "--config", _write(tmp_path, text), "--out", str(out), "--threads", "2"]) == 0
    rows = _rows(out / "zoom.csv")
    assert len(rows) >= 5
    assert all(r["status"] == "ok" and r["normalization_ok"] == "true" and r["bound_ok"] == "true" for r in rows)


def test_energy_check(tmp_path):
    cfg = _write(tmp_path, SMALL.format(extra="initial = rigid_rotation"))
    assert main(["energy-check", "--config", cfg, "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "energy_check.json").read_text())
    assert doc["all_satisfied"] is True and len(doc["checks"]) > 5


def test_bit_identical_reruns(tmp_path):
    cfg = _write(tmp_path, SMALL.format(extra="initial = random_swirl\nseed = 3"))
    for name in ("a", "b"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / name)]) == 0
        assert main(["diagnose", "--config", cfg, "--out", str(tmp_path / name), "--threads", "3"]) == 0
    for f in ("run.csv", "run.json", "diagnose.csv", "diagnose.json", "snapshots/snap_00010.axs"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


def test_config_error_record(tmp_path, capsys):
    cfg = _write(tmp_path, "[scenario]\ndt 0.01\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 2
    rec = json.loads(capsys.readouterr().err.strip())
    assert rec["error"] == "ConfigError" and rec["line"] == 2 and rec["command"] == "run"


def test_runtime_error_record(tmp_path, capsys):
    assert main(["diagnose", "--snapshots", str(tmp_path / "missing"), "--out", str(tmp_path)]) == 1
    rec = json.loads(capsys.readouterr().err.strip())
    assert rec["error"] == "FileNotFoundError"


def test_usage_error_record(capsys):
    with pytest.raises(SystemExit) as err:
        main(["launch"])
    assert err.value.code == 2
    assert json.loads(capsys.readouterr().err.strip())["error"] == "usage"
