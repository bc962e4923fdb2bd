"""Command line entry point: ``axiswirl {run,diagnose,zoom,exponents,energy-check}``.

Each command reads an optional config file, works on a fresh solver run or a
snapshot directory, and writes ``<command>.csv`` / ``<command>.json`` into the
output directory.  Floats in CSV use 17 significant digits; every row carries
the sha256 of the resolved configuration and the tolerances in force, so that
identical inputs give byte-identical files.  Failures exit nonzero and print a
one-line JSON error record on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import Config, ConfigError, load_config
from .exponents import (
    PUBLISHED_CONSTANTS,
    certificate_iteration,
    exponent_report,
    quarter_parameters,
    scan_feasible_region,
)
from .fields import DomainError, Grid2D, ParabolicCylinder
from .functionals import (
    ESS_SUP_NOTE,
    BumpCutoff,
    check_energy_inequality,
    compute_functionals,
    interpolation_audit,
    type1_monitors,
)
from .pressure import bmo_seminorm
from .rescaler import (
    ZoomWindowError,
    detect_peaks,
    functional_transport,
    holder_distance,
    verify_zoom,
    zoom,
)
from .snapshots import read_trajectory, write_trajectory, write_zoom
from .solver import CFL, Scenario, kinetic_energy, run, stable_dt

__all__ = ["main", "build_parser", "build_scenario"]

WALL_NOTE = ("wall rho = rho_max: psi = omega_phi = 0 and f held at its initial wall value "
             "(zero unless the initial swirl is nonzero there); an artifact choice, the interior "
             "analysis does not prescribe wall behaviour")


# -- output helpers ----------------------------------------------------------

def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer, Fraction)):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _plain(x):
    """JSON-safe copy: non-finite floats become strings, fractions become 'p/q'."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    return x


class Writer:
    """Single writer for every file a command produces."""

    def __init__(self, cfg: Config, out_dir: Path, tolerances: dict):
        self.cfg = cfg
        self.out = out_dir
        self.digest = cfg.digest()
        self.tolerances = json.dumps(_plain(tolerances), sort_keys=True, separators=(",", ":"))
        self.tol_dict = _plain(tolerances)
        self.out.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, rows: list[dict]):
        if not self.cfg.output.csv:
            return
        cols: list[str] = []
        for row in rows:
            cols.extend(k for k in row if k not in cols)
        cols += ["config_hash", "tolerances"]
        with open(self.out / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for row in rows:
                full = dict(row, config_hash=self.digest, tolerances=self.tolerances)
                w.writerow([_cell(full.get(c)) for c in cols])

    def json(self, name: str, payload: dict):
        if not self.cfg.output.json:
            return
        doc = {"config_hash": self.digest, "config": self.cfg.to_dict(), "tolerances": self.tol_dict,
               "wall_conditions": WALL_NOTE}
        doc.update(_plain(payload))
        (self.out / f"{name}.json").write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


# -- trajectories --------------------------------------------------------------

def build_scenario(cfg: Config) -> Scenario:
    sc = cfg.scenario
    n_z = sc.n_z if sc.n_z is not None else max(4, int(round(sc.n_rho * (sc.z_max - sc.z_min) / sc.rho_max)))
    grid = Grid2D(sc.rho_max, sc.z_min, sc.z_max, sc.n_rho, n_z, z_periodic=sc.z_periodic)
    dt = sc.dt if sc.dt is not None else stable_dt(grid)
    return Scenario(grid, sc.initial, dict(sc.params), dt=dt, t_end=sc.t_end, t_start=sc.t_start,
                    snapshot_interval=sc.snapshot_interval, boundary=sc.boundary, forcing=sc.forcing,
                    no_swirl=sc.no_swirl, seed=sc.seed, blowup_threshold=sc.blowup_threshold)


def _trajectory(args, cfg: Config):
    if args.snapshots:
        return read_trajectory(args.snapshots)
    return run(build_scenario(cfg))


def _grid_tolerances(traj) -> dict:
    g = traj.grid
    return {"cfl": CFL, "dt": traj.dt, "h_rho": g.d_rho, "h_z": g.d_z}


def _map(args, fn, items):
    items = list(items)
    if args.threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# -- commands --------------------------------------------------------------------

def cmd_run(args, cfg: Config) -> str:
    scenario = build_scenario(cfg)
    traj = run(scenario)
    w = Writer(cfg, args.out, _grid_tolerances(traj) | {"blowup_threshold": cfg.scenario.blowup_threshold})
    rows = []
    R = traj.grid.mesh()[0]
    for j, snap in enumerate(traj.snapshots):
        v = snap.velocity
        rows.append({
            "index": j,
            "t": v.t,
            "kinetic_energy": kinetic_energy(v),
            "max_speed": float(np.sqrt(v.v_rho**2 + v.v_phi**2 + v.v_z**2).max()),
            "max_abs_swirl": float(np.abs(R * v.v_phi).max()),
        })
    w.csv("run", rows)
    blow = traj.blowup
    w.json("run", {
        "provenance": traj.provenance,
        "snapshots": len(traj),
        "dt_used": traj.dt,
        "monotone": traj.monotone,
        "blowup": None if blow is None else {"step": blow.step, "t": blow.t, "reason": blow.reason},
    })
    if cfg.output.snapshots:
        write_trajectory(args.out / "snapshots", traj)
    msg = f"run: {len(traj)} snapshots to t = {traj.times[-1]:.6g}"
    return msg + (f"; stopped early: {blow.reason}" if blow is not None else "")


def cmd_diagnose(args, cfg: Config) -> str:
    traj = _trajectory(args, cfg)
    dg = cfg.diagnostics
    t0 = dg.t0 if dg.t0 is not None else float(traj.times[-1])
    specs = list(dg.specs)
    w = Writer(cfg, args.out, _grid_tolerances(traj) | {"ess_sup": ESS_SUP_NOTE})

    def one(r):
        return compute_functionals(traj, ParabolicCylinder(dg.b, t0, float(r)), specs)

    reports = _map(args, one, dg.radii)
    rows = []
    for rep in reports:
        row = {"b": rep.cylinder.b, "t0": rep.cylinder.t0, "r": rep.cylinder.r}
        row.update(rep.values())
        row.update({"sup_sqrt_t": rep.monitors.sup_sqrt_t, "sup_xprime": rep.monitors.sup_xprime,
                    "sup_swirl": rep.monitors.sup_swirl})
        for s, l in specs:
            audit = interpolation_audit(rep, s, l)
            row[f"audit_{s}:{l}"] = audit.ratio
        rows.append(row)
    w.csv("diagnose", rows)

    mon = type1_monitors(traj, t0, dg.monitor_r1, dg.b)
    last_q = traj.snapshots[-1].pressure
    try:
        bmo = bmo_seminorm(last_q, [float(r) for r in dg.radii])
    except DomainError as exc:
        bmo = f"unavailable: {exc}"
    w.json("diagnose", {
        "cylinders": [rep.to_dict() for rep in reports],
        "type1_monitors": {"t0": mon.t0, "r1": mon.r1, "epsilon": mon.epsilon,
                           "sup_sqrt_t": mon.monitors.sup_sqrt_t, "sup_xprime": mon.monitors.sup_xprime,
                           "sup_swirl": mon.monitors.sup_swirl, "times": mon.times, "G": mon.G, "M": mon.M},
        "pressure_bmo_last_snapshot": bmo,
        "note": ESS_SUP_NOTE,
    })
    return f"diagnose: {len(rows)} cylinders at t0 = {t0:.6g}"


def cmd_zoom(args, cfg: Config) -> str:
    traj = _trajectory(args, cfg)
    rs = cfg.rescaler
    peaks = detect_peaks(traj, rs.r1, rs.ratio, rs.b, rs.start_time)
    specs = list(cfg.diagnostics.specs)
    radii = [float(r) for r in rs.transport_radii] if rs.transport_radii is not None else [rs.a / 2, rs.a]
    w = Writer(cfg, args.out, _grid_tolerances(traj) | {"ratio": rs.ratio, "alpha": rs.alpha})
    base = {"M_K": peaks[-1].M_k, "records": [p.to_dict() for p in peaks]}
    if len(peaks) < 2:
        msg = "no blow-up records beyond k = 0"
        w.csv("zoom", [dict(peaks[0].to_dict(), status="no-records")])
        w.json("zoom", dict(base, message=msg, zooms=[]))
        return f"zoom: {msg}"

    def one(peak):
        try:
            z = zoom(traj, peak, rs.a, rs.n_rho, rs.n_time, rs.convention)
        except ZoomWindowError as exc:
            return peak, None, None, None, exc
        except ValueError as exc:
            return peak, None, None, None, exc
        rep = verify_zoom(z, specs, [rs.a / 4, rs.a / 2, rs.a])
        try:
            transport = functional_transport(traj, z, radii, specs)
        except DomainError as exc:
            transport = exc
        return peak, z, rep, transport, None

    results = _map(args, one, peaks)
    rows, zooms = [], []
    prev = None
    for peak, z, rep, transport, err in results:
        row = peak.to_dict()
        if err is not None:
            row.update(status="window" if isinstance(err, ZoomWindowError) else "invalid",
                       a_max=getattr(err, "max_admissible", None), message=str(err))
            rows.append(row)
            zooms.append(row)
            prev = None
            continue
        t_ok = None if isinstance(transport, Exception) else all(t.ok for t in transport)
        row.update(
            status="ok", lambda_k=z.lambda_k, a=z.a, interp_tol=z.interp_tol,
            normalization_raw=rep.normalization_raw, normalization=rep.normalization,
            normalization_ok=rep.normalization_ok, sup_u=rep.sup_u, bound_ok=rep.bound_ok,
            decay_sup=rep.decay_sup, ladder_max=rep.ladder_max, transport_ok=t_ok,
            holder_to_prev=holder_distance(prev, z, rs.alpha) if prev is not None else None,
        )
        rows.append(row)
        detail = dict(row, transport=(str(transport) if isinstance(transport, Exception) else
                                      [{"r": t.r, "name": t.name, "zoomed": t.zoomed, "original": t.original,
                                        "tolerance": t.tolerance, "ok": t.ok} for t in transport]),
                      provenance=z.provenance())
        zooms.append(detail)
        if cfg.output.snapshots:
            write_zoom(args.out / "zooms" / f"k_{peak.k:03d}", z)
        prev = z
    w.csv("zoom", rows)
    w.json("zoom", dict(base, zooms=zooms))
    ok = sum(1 for r in rows if r.get("status") == "ok")
    return f"zoom: {len(peaks)} records, {ok} zooms, M_K = {peaks[-1].M_k:.6g}"


def cmd_exponents(args, cfg: Config) -> str:
    specs = list(cfg.diagnostics.specs)
    for key in PUBLISHED_CONSTANTS:
        if key not in specs:
            specs.append(key)
    w = Writer(cfg, args.out, {"arithmetic": "exact rational"})
    rows = []
    for s, l in specs:
        rep = exponent_report(s, l)
        rows.append({"s": rep.spec.s, "l": rep.spec.l, "kappa": rep.spec.kappa, "m": rep.m, "mu": rep.mu,
                     "alpha1": rep.alpha1, "alpha2": rep.alpha2, "alpha3": rep.alpha3,
                     "admissible": rep.admissible_as3, "feasible": rep.feasible_e7, "published_m": rep.published_m,
                     "published_mu": rep.published_mu, "mu_discrepancy": rep.mu_discrepancy})
    w.csv("exponents", rows)
    c = 1.0
    theta, eps = quarter_parameters(c)
    trace = certificate_iteration(1.0, (c, theta, eps), 1.0, 40)
    payload = {"reports": [exponent_report(s, l).to_dict() for s, l in specs],
               "certificate": {"c": c, "theta": theta, "epsilon": eps, "contraction": trace.contraction,
                               "additive": trace.additive, "bound": trace.bound, "bounded": trace.bounded}}
    msg = f"exponents: {len(rows)} specs"
    if args.scan is not None:
        scan = scan_feasible_region(args.scan)
        scan_rows = [{"x": p.x, "y": p.y, "s": p.s, "l": p.l, "feasible": p.feasible,
                      "alpha1": None if p.alphas is None else p.alphas[0],
                      "alpha2": None if p.alphas is None else p.alphas[1],
                      "alpha3": None if p.alphas is None else p.alphas[2]} for p in scan.points]
        w.csv("exponents_scan", scan_rows)
        feas = scan.feasible_points
        below = [p for p in feas if p.l < 2 and p.s > 1]
        payload["scan"] = {"resolution": args.scan, "rows": len(scan_rows), "feasible": len(feas),
                           "has_l_below_two": scan.has_l_below_two,
                           "example_l_below_two": None if not below else {"s": below[0].s, "l": below[0].l}}
        msg += f"; scan {args.scan}x{args.scan}: {len(feas)} feasible"
    w.json("exponents", payload)
    return msg


def cmd_energy_check(args, cfg: Config) -> str:
    traj = _trajectory(args, cfg)
    dg = cfg.diagnostics
    g = traj.grid
    ts = traj.times
    t0 = dg.cutoff_t0 if dg.cutoff_t0 is not None else float(ts[-1])
    b = dg.cutoff_b if dg.cutoff_b is not None else 0.5 * (g.z_min + g.z_max)
    if dg.cutoff_r is not None:
        r = dg.cutoff_r
    else:
        r = min(0.5 * g.rho_max, 0.25 * (g.z_max - g.z_min), math.sqrt(max(t0 - ts[0], 0.0)))
    cutoff = BumpCutoff(b, r, t0)
    w = Writer(cfg, args.out, _grid_tolerances(traj) | {"energy_safety": dg.energy_safety})
    times = [float(t) for t in ts if cutoff.t_start - 1e-12 <= t <= t0 + 1e-12]
    reports = _map(args, lambda t: check_energy_inequality(traj, cutoff, t, dg.energy_safety), times)
    rows = [{"t": rep.t, "lhs": rep.lhs, "rhs": rep.rhs, "slack": rep.slack, "tolerance": rep.tolerance,
             "satisfied": rep.satisfied} for rep in reports]
    w.csv("energy_check", rows)
    ok = all(r["satisfied"] for r in rows)
    w.json("energy_check", {"cutoff": cutoff.to_dict(), "all_satisfied": ok, "checks": rows})
    return f"energy-check: {len(rows)} times, all satisfied = {ok}"


COMMANDS = {"run": cmd_run, "diagnose": cmd_diagnose, "zoom": cmd_zoom, "exponents": cmd_exponents,
            "energy-check": cmd_energy_check}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("usage", message, None)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="configuration file (key = value with [sections])")
    common.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
    common.add_argument("--snapshots", type=Path, help="read this snapshot directory instead of running")
    common.add_argument("--threads", type=int, default=1, help="worker threads for independent evaluations")
    p = _Parser(prog="axiswirl", description="Axisymmetric Navier-Stokes runs and Type I blow-up diagnostics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("run", parents=[common], help="run the configured scenario and write snapshots")
    sub.add_parser("diagnose", parents=[common], help="scale-invariant functionals on a cylinder ladder")
    sub.add_parser("zoom", parents=[common], help="peak records and blow-up rescaling checks")
    ex = sub.add_parser("exponents", parents=[common], help="exact exponent reports and region scan")
    ex.add_argument("--scan", type=int, help="rasterize the (1/s, 1/l) square at this resolution")
    sub.add_parser("energy-check", parents=[common], help="local energy inequality with a bump cutoff")
    return p


def _emit_error(kind: str, message: str, command, line=None):
    rec = {"error": kind, "message": message, "command": command}
    if line is not None:
        rec["line"] = line
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else Config()
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1", key="threads")
        if args.snapshots is not None and args.command == "run":
            raise ConfigError("--snapshots is not used by 'run'", key="snapshots")
        args.out = Path(args.out) if args.out is not None else Path(cfg.output.dir)
        print(COMMANDS[args.command](args, cfg))
    except ConfigError as exc:
        _emit_error("ConfigError", str(exc), args.command, exc.line)
        return 2
    except Exception as exc:  # every failure becomes a machine-readable record
        _emit_error(type(exc).__name__, str(exc), args.command)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
