"""Axisymmetric Navier-Stokes (viscosity 1) in swirl/streamfunction/vorticity form.

Unknowns on the ``(rho, z)`` grid:

* ``f = rho v_phi`` with ``f_t + v.grad f = f_rr - f_r/rho + f_zz``,
* ``omega = omega_phi`` with
  ``omega_t + v.grad omega - v_rho omega/rho = d_z(f^2)/rho^3 + (Lap - 1/rho^2) omega``,
* ``psi`` from ``psi_rr - psi_r/rho + psi_zz = -rho omega``.

The meridional velocity is ``v_rho = -psi_z/rho``, ``v_z = psi_rho/rho``.
Boundary conditions: ``f = psi = omega = 0`` on the axis; ``psi = omega = 0``
and ``f`` held fixed on the wall ``rho = rho_max``; in ``z`` either periodic
or mirror planes (``f_z = 0``, ``psi = omega = 0``).

Time stepping is Heun's method (SSP RK2).  Radial diffusion uses the
conservative forms ``rho (f_r/rho)_r`` and ``((rho omega)_r/rho)_r``, which are
exact on the leading axis terms; everything else is centered.  Each Euler
stage is a convex combination of neighbouring ``f`` values as long as
``|v_rho| h_rho <= 1``, ``|v_z| h_z <= 2`` and ``dt`` is below the positivity
bound, so ``max |f|`` cannot grow; the state records whether that held.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .fields import AxiField, Grid2D, ScalarField2D, domain_weights
from .poisson import PoissonSolver
from .pressure import solve_pressure
from .scenarios import INITIAL_CONDITIONS, initial_condition, make_forcing, resolve_params

__all__ = [
    "SolverError",
    "StabilityError",
    "BlowupError",
    "BlowupReport",
    "SolverState",
    "Scenario",
    "Snapshot",
    "Trajectory",
    "CFL",
    "stable_dt",
    "solve_streamfunction",
    "meridional_velocity",
    "velocity",
    "kinetic_energy",
    "initial_state",
    "step",
    "run",
]

log = logging.getLogger(__name__)

CFL = 0.4
BOUNDARY = "stress-free"


class SolverError(RuntimeError):
    pass


class StabilityError(SolverError):
    """The requested step violates the advective or diffusive bound."""


@dataclass(frozen=True)
class BlowupReport:
    step: int
    t: float
    reason: str
    last_state: "SolverState"


class BlowupError(SolverError):
    def __init__(self, report: BlowupReport):
        super().__init__(f"blow-up at step {report.step} (t={report.t:.6g}): {report.reason}")
        self.report = report


@dataclass(frozen=True)
class SolverState:
    f: ScalarField2D
    omega_phi: ScalarField2D
    psi: ScalarField2D
    t: float
    step_count: int = 0
    monotone: bool = True  # every stage so far met the cell-Peclet condition

    @property
    def grid(self) -> Grid2D:
        return self.f.grid


# -- elliptic part -----------------------------------------------------------

@lru_cache(maxsize=16)
def _stream_solver(grid: Grid2D) -> PoissonSolver:
    return PoissonSolver(grid, "stream", "dirichlet", "periodic" if grid.z_periodic else "dirichlet")


def _psi_from_omega(omega: np.ndarray, grid: Grid2D) -> np.ndarray:
    return _stream_solver(grid).solve(-grid.rho[:, None] * omega)


def solve_streamfunction(omega_phi: ScalarField2D, axis_tol: float = 1e-12) -> ScalarField2D:
    """``psi`` with ``psi_rr - psi_r/rho + psi_zz = -rho omega``, zero on axis, wall and mirror planes."""
    w = omega_phi.values
    if np.abs(w[0]).max() > axis_tol * max(1.0, np.abs(w).max()):
        raise SolverError("omega_phi must vanish on the axis")
    return ScalarField2D(omega_phi.grid, omega_phi.t, _psi_from_omega(w, omega_phi.grid))


def _dz_psi(psi: np.ndarray, grid: Grid2D) -> np.ndarray:
    hz = grid.d_z
    if grid.z_periodic:
        return (np.roll(psi, -1, axis=1) - np.roll(psi, 1, axis=1)) / (2 * hz)
    out = np.empty_like(psi)
    out[:, 1:-1] = (psi[:, 2:] - psi[:, :-2]) / (2 * hz)
    # psi is odd across a mirror plane
    out[:, 0] = psi[:, 1] / hz
    out[:, -1] = -psi[:, -2] / hz
    return out


def meridional_velocity(psi: np.ndarray, grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    h = grid.d_rho
    rho = grid.rho[1:, None]
    v_r = np.zeros(grid.shape)
    v_z = np.zeros(grid.shape)
    v_r[1:] = -_dz_psi(psi, grid)[1:] / rho
    d_r = np.empty_like(psi)
    d_r[1:-1] = (psi[2:] - psi[:-2]) / (2 * h)
    d_r[-1] = (3 * psi[-1] - 4 * psi[-2] + psi[-3]) / (2 * h)
    v_z[1:] = d_r[1:] / rho
    v_z[0] = 2 * psi[1] / h**2  # psi ~ a rho^2 near the axis
    return v_r, v_z


def velocity(state: SolverState) -> AxiField:
    grid = state.grid
    v_r, v_z = meridional_velocity(state.psi.values, grid)
    v_p = np.zeros(grid.shape)
    v_p[1:] = state.f.values[1:] / grid.rho[1:, None]
    return AxiField(grid, state.t, v_r, v_p, v_z)


def kinetic_energy(v: AxiField) -> float:
    """``int |v|^2 dx`` over the whole sampled domain."""
    w = domain_weights(v.grid)
    return float(np.sum(w * (v.v_rho**2 + v.v_phi**2 + v.v_z**2)))


# -- stencils ----------------------------------------------------------------

def _z_neighbors(a: np.ndarray, grid: Grid2D, mirror: str):
    """Values at ``z - hz`` and ``z + hz``; mirror ghosts are even or odd."""
    if grid.z_periodic:
        return np.roll(a, 1, axis=1), np.roll(a, -1, axis=1)
    lo = np.empty_like(a)
    hi = np.empty_like(a)
    lo[:, 1:] = a[:, :-1]
    hi[:, :-1] = a[:, 1:]
    sign = 1.0 if mirror == "even" else -1.0
    lo[:, 0] = sign * a[:, 1]
    hi[:, -1] = sign * a[:, -2]
    return lo, hi


@lru_cache(maxsize=16)
def _radial_coefficients(grid: Grid2D):
    """Weights of ``rho (a_r/rho)_r`` and ``((rho a)_r/rho)_r`` at interior rows."""
    i = np.arange(1, grid.n_rho, dtype=float)[:, None]
    h2 = grid.d_rho**2
    swirl = (i / (i - 0.5) / h2, i / (i + 0.5) / h2)
    vort = ((i - 1) / (i - 0.5) / h2, (i + 1) / (i + 0.5) / h2, 2 * i * i / (i * i - 0.25) / h2)
    return swirl, vort


def _tendencies(f, w, grid: Grid2D, forcing):
    h, hz = grid.d_rho, grid.d_z
    psi = _psi_from_omega(w, grid)
    v_r, v_z = meridional_velocity(psi, grid)
    rho = grid.rho[1:-1, None]
    s = slice(1, -1)
    (fl, fu), (wl, wu, wd) = _radial_coefficients(grid)

    f_lo, f_hi = _z_neighbors(f, grid, "even")
    w_lo, w_hi = _z_neighbors(w, grid, "odd")
    f_r = (f[2:] - f[:-2]) / (2 * h)
    f_z = (f_hi - f_lo) / (2 * hz)
    f_zz = (f_hi - 2 * f + f_lo) / hz**2
    w_r = (w[2:] - w[:-2]) / (2 * h)
    w_z = (w_hi - w_lo) / (2 * hz)
    w_zz = (w_hi - 2 * w + w_lo) / hz**2
    # f_rr - f_r/rho and w_rr + w_r/rho - w/rho^2 in conservative form
    f_rad = fu * (f[2:] - f[s]) - fl * (f[s] - f[:-2])
    w_rad = wu * w[2:] + wl * w[:-2] - wd * w[s]

    vr, vz = v_r[s], v_z[s]
    df = np.zeros(grid.shape)
    dw = np.zeros(grid.shape)
    df[s] = -(vr * f_r + vz * f_z[s]) + f_rad + f_zz[s]
    dw[s] = -(vr * w_r + vz * w_z[s]) + vr * w[s] / rho + 2 * f[s] * f_z[s] / rho**3 + w_rad + w_zz[s]
    if forcing is not None:
        ff, fw = forcing
        df[s] += ff[s]
        dw[s] += fw[s]
    if not grid.z_periodic:
        dw[:, 0] = 0.0
        dw[:, -1] = 0.0
    monotone = bool(np.abs(v_r).max() * h <= 1.0 and np.abs(v_z).max() * hz <= 2.0)
    return df, dw, monotone


def _diffusive_number(grid: Grid2D, dt: float) -> float:
    return dt * (1 / grid.d_rho**2 + 1 / grid.d_z**2)


def _advective_number(state_psi: np.ndarray, grid: Grid2D, dt: float) -> float:
    v_r, v_z = meridional_velocity(state_psi, grid)
    return dt * float(np.max(np.abs(v_r) / grid.d_rho + np.abs(v_z) / grid.d_z))


def _positivity_dt(grid: Grid2D) -> float:
    # the swirl stencil's centre weight peaks at 8/3 h^-2 on the first row
    return 1.0 / (8 / (3 * grid.d_rho**2) + 2 / grid.d_z**2)


def stable_dt(grid: Grid2D, psi: np.ndarray | None = None, cfl: float = CFL) -> float:
    """Largest step meeting both bounds at safety factor ``cfl``.

    Also kept below the step at which an Euler stage of the swirl equation
    stops being a convex combination, so that ``max |f|`` cannot grow.
    """
    dt = min(cfl / (1 / grid.d_rho**2 + 1 / grid.d_z**2), _positivity_dt(grid))
    if psi is not None:
        adv = _advective_number(psi, grid, 1.0)
        if adv > 0:
            dt = min(dt, cfl / adv)
    return dt


def step(state: SolverState, dt: float, forcing: Callable | None = None) -> SolverState:
    """Advance one Heun (SSP RK2) step.

    ``forcing(t)`` returns ``(F_f, F_omega)`` arrays or is ``None``.  The
    wall values of ``f`` are held at their current values.
    """
    grid = state.grid
    if not dt > 0:
        raise StabilityError("dt must be positive")
    if _diffusive_number(grid, dt) > CFL * (1 + 1e-12):
        raise StabilityError(f"diffusive number {_diffusive_number(grid, dt):.4g} exceeds {CFL}")
    adv = _advective_number(state.psi.values, grid, dt)
    if adv > CFL * (1 + 1e-12):
        raise StabilityError(f"advective number {adv:.4g} exceeds {CFL}")

    f0, w0 = state.f.values, state.omega_phi.values
    t0 = state.t
    with np.errstate(all="ignore"):
        d1f, d1w, m1 = _tendencies(f0, w0, grid, forcing(t0) if forcing else None)
        f1, w1 = f0 + dt * d1f, w0 + dt * d1w
        d2f, d2w, m2 = _tendencies(f1, w1, grid, forcing(t0 + dt) if forcing else None)
        f2 = 0.5 * (f0 + f1 + dt * d2f)
        w2 = 0.5 * (w0 + w1 + dt * d2w)
    f2[0] = 0.0
    f2[-1] = f0[-1]
    w2[0] = 0.0
    w2[-1] = 0.0
    if not (np.isfinite(f2).all() and np.isfinite(w2).all()):
        raise BlowupError(BlowupReport(state.step_count + 1, t0 + dt, "non-finite values", state))
    t1 = t0 + dt
    psi = _psi_from_omega(w2, grid)
    return SolverState(
        ScalarField2D(grid, t1, f2),
        ScalarField2D(grid, t1, w2),
        ScalarField2D(grid, t1, psi),
        t1,
        state.step_count + 1,
        state.monotone and m1 and m2 and dt <= _positivity_dt(grid) * (1 + 1e-12),
    )


# -- scenarios and runs ------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one run.

    ``dt`` is an upper bound; ``run`` uses equal substeps per snapshot
    interval, shrinking them if the advective bound requires it.
    """

    grid: Grid2D
    initial: str = "zero"
    params: Mapping[str, float] = field(default_factory=dict)
    dt: float = 1e-3
    t_end: float = 0.1
    t_start: float = 0.0
    snapshot_interval: float | None = None
    boundary: str = BOUNDARY
    forcing: str | None = None
    no_swirl: bool = False
    seed: int = 0
    blowup_threshold: float = 1e6

    def __post_init__(self):
        resolve_params(self.initial, self.params)
        if self.boundary != BOUNDARY:
            raise ValueError(f"only the {BOUNDARY!r} wall condition is implemented")
        if self.forcing not in (None, "none") and self.forcing != self.initial:
            raise ValueError("a forcing must match its initial condition family")
        if not self.dt > 0 or not self.t_end > self.t_start:
            raise ValueError("need dt > 0 and t_end > t_start")
        if _diffusive_number(self.grid, self.dt) > CFL * (1 + 1e-12):
            raise ValueError(
                f"dt={self.dt} violates the diffusive bound dt (1/h_rho^2 + 1/h_z^2) <= {CFL}; "
                f"use dt <= {stable_dt(self.grid):.6g}"
            )
        if self.snapshot_interval is not None and not self.snapshot_interval > 0:
            raise ValueError("snapshot_interval must be positive")

    @property
    def interval(self) -> float:
        return self.snapshot_interval if self.snapshot_interval is not None else self.dt

    def provenance(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "initial": self.initial,
            "params": dict(sorted(resolve_params(self.initial, self.params).items())),
            "dt": self.dt,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "snapshot_interval": self.interval,
            "boundary": self.boundary,
            "forcing": self.forcing,
            "no_swirl": self.no_swirl,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class Snapshot:
    velocity: AxiField
    pressure: ScalarField2D

    @property
    def t(self) -> float:
        return self.velocity.t


@dataclass(frozen=True)
class Trajectory:
    snapshots: tuple[Snapshot, ...]
    dt: float
    provenance: Mapping = field(default_factory=dict)
    blowup: BlowupReport | None = None
    monotone: bool = True

    def __post_init__(self):
        ts = [s.t for s in self.snapshots]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("snapshot times must be strictly increasing")

    @property
    def grid(self) -> Grid2D:
        return self.snapshots[0].velocity.grid

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def __len__(self) -> int:
        return len(self.snapshots)


def initial_state(scenario: Scenario) -> SolverState:
    grid = scenario.grid
    f, w = initial_condition(scenario.initial, grid, scenario.params, scenario.seed, scenario.t_start)
    if scenario.no_swirl:
        f = np.zeros(grid.shape)
    t = scenario.t_start
    w = np.array(w, dtype=float)
    w[0] = 0.0
    if not grid.z_periodic:
        w[:, 0] = w[:, -1] = 0.0
    w[-1] = 0.0
    return SolverState(
        ScalarField2D(grid, t, f),
        ScalarField2D(grid, t, w),
        ScalarField2D(grid, t, _psi_from_omega(w, grid)),
        t,
    )


def _snapshot(state: SolverState) -> Snapshot:
    v = velocity(state)
    return Snapshot(v, solve_pressure(v))


def run(scenario: Scenario, state: SolverState | None = None) -> Trajectory:
    """Integrate the scenario, emitting a snapshot every ``scenario.interval``."""
    grid = scenario.grid
    state = state if state is not None else initial_state(scenario)
    force_name = None if scenario.forcing in (None, "none") else scenario.forcing
    base_forcing = make_forcing(force_name, grid, scenario.params)
    forcing = base_forcing
    if base_forcing is not None and scenario.no_swirl:
        forcing = lambda t: (np.zeros(grid.shape), base_forcing(t)[1])  # noqa: E731
    snaps = [_snapshot(state)]
    n_snap = int(round((scenario.t_end - scenario.t_start) / scenario.interval))
    if n_snap < 1 or abs(n_snap * scenario.interval - (scenario.t_end - scenario.t_start)) > 1e-9 * scenario.interval * n_snap:
        raise ValueError("t_end - t_start must be a whole number of snapshot intervals")
    blowup = None
    dt_used = scenario.dt
    try:
        for k in range(1, n_snap + 1):
            target = scenario.t_start + k * scenario.interval
            span = target - state.t
            dt_max = min(scenario.dt, stable_dt(grid, state.psi.values))
            n_sub = max(1, math.ceil(span / dt_max - 1e-9))
            dt = span / n_sub
            dt_used = min(dt_used, dt)
            for _ in range(n_sub):
                try:
                    if _advective_number(state.psi.values, grid, dt) > CFL:
                        # velocity grew inside the interval; restart it with smaller steps
                        raise StabilityError("advective bound tightened")
                    state = step(state, dt, forcing)
                except StabilityError:
                    dt = min(dt, stable_dt(grid, state.psi.values)) / 2
                    remaining = target - state.t
                    n_more = max(1, math.ceil(remaining / dt - 1e-9))
                    dt = remaining / n_more
                    dt_used = min(dt_used, dt)
                    for _ in range(n_more):
                        state = step(state, dt, forcing)
                    break
            state = replace(state, t=target)
            snap = _snapshot(state)
            snaps.append(snap)
            peak = float(np.max(np.abs(np.stack(snap.velocity.components()))))
            if peak > scenario.blowup_threshold:
                blowup = BlowupReport(state.step_count, state.t, f"|v| = {peak:.6g} above threshold", state)
                log.warning("stopping: %s", blowup.reason)
                break
    except BlowupError as exc:
        blowup = exc.report
        log.warning("stopping: %s", exc)
    except StabilityError as exc:
        raise SolverError(f"step {state.step_count}: {exc}") from exc
    return Trajectory(tuple(snaps), dt_used, scenario.provenance(), blowup, state.monotone)


def available_initial_conditions() -> list[str]:
    return sorted(INITIAL_CONDITIONS)
