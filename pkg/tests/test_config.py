from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from axiswirl.config import DEFAULT_RADII, DEFAULT_SPECS, Config, ConfigError, parse_config


def test_empty_config_defaults():
    cfg = parse_config("")
    assert cfg == Config()
    assert cfg.diagnostics.radii == (F(1, 2), F(1, 4), F(1, 8)) == DEFAULT_RADII
    assert cfg.diagnostics.specs == ((F(7, 4), 10), (4, F(12, 7)), (3, 3)) == DEFAULT_SPECS
    assert parse_config("[diagnostics]\n").diagnostics == cfg.diagnostics


def test_full_config():
    text = """
# comment
[scenario]
initial = ramped_swirl
forcing = ramped_swirl
params.amplitude = 2
params.l0 = 2/5
n_rho = 24
t_end = 0.4
snapshot_interval = 0.01
dt = auto

[diagnostics]
radii = 1/8, 1/2, 1/4
specs = 7/4:10, 3:3

[rescaler]
ratio = 1.2
start_time = 0.2
transport_radii = 1, 1/2

[output]
dir = results
snapshots = no
"""
    cfg = parse_config(text)
    assert cfg.scenario.params == {"amplitude": 2.0, "l0": 0.4}
    assert cfg.scenario.dt is None and cfg.scenario.n_rho == 24
    assert cfg.diagnostics.radii == (F(1, 2), F(1, 4), F(1, 8))
    assert cfg.rescaler.transport_radii == (1, F(1, 2))
    assert cfg.output.dir == "results" and cfg.output.snapshots is False


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("[scenario]\ndt 0.01", 2, "syntax error"),
        ("[diagnostics]\nspecs = 2:2", 2, "feasible region"),
        ("[diagnostics]\nspecs = 10:10", 2, "admissibility"),
        ("[scenario]\nn_rho = 8\nn_rho = 9", 3, "already exists"),
        ("[scenario]\nfoo = 1", 2, "unknown key 'foo'"),
        ("[scenario]\n\nparams.bogus = 1", 3, "params.bogus"),
        ("n_rho = 8", 1, "section"),
        ("[diagnostics]\nradii = 1/2, 1/3", 2, "dyadic"),
        ("[scenario]\nt_end = 0.1\nsnapshot_interval = 0.03", 3, "divide"),
        ("[scenario]\nn_rho = many", 2, "integer"),
        ("[rescaler]\nratio = 1", 2, "exceed"),
        ("[scenario]\ninitial = tornado", 2, "tornado"),
    ],
)
def test_errors_carry_line(text, line, fragment):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.line == line
    assert fragment in str(err.value)
    assert str(err.value).startswith(f"line {line}:")


def test_unknown_section():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("[plots]\nx = 1")


def test_digest_tracks_resolved_values():
    a = parse_config("[scenario]\nn_rho = 16")
    b = parse_config("# same\n[scenario]\nn_rho=16\n")
    c = parse_config("[scenario]\nn_rho = 17")
    assert a.digest() == b.digest() != c.digest()
    assert len(a.digest()) == 64


@settings(max_examples=40, deadline=None)
@given(n=st.integers(4, 256), r1=st.fractions(F(1, 100), 4), ratio=st.floats(1.01, 3.0), k=st.integers(0, 3),
       top=st.sampled_from([F(1), F(1, 2), F(3, 4)]))
def test_roundtrip_values(n, r1, ratio, k, top):
    radii = ", ".join(str(top / 2**j) for j in range(k + 1))
    text = f"[scenario]\nn_rho = {n}\n[rescaler]\nr1 = {r1}\nratio = {ratio!r}\n[diagnostics]\nradii = {radii}\n"
    cfg = parse_config(text)
    assert cfg.scenario.n_rho == n
    assert cfg.rescaler.r1 == float(r1) and cfg.rescaler.ratio == ratio
    assert cfg.diagnostics.radii == tuple(top / 2**j for j in range(k + 1))
