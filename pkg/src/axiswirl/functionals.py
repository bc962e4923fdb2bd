"""Scale-invariant functionals over parabolic cylinders, Type I monitors,
the local energy inequality check and the interpolation audit.

For ``Q = C(b e3, r) x ]t0 - r^2, t0[``:

* ``A = max_t (1/r) int |v|^2``
* ``E = (1/r) int int |grad v|^2``
* ``C = (1/r^2) int int |v|^3``
* ``D = (1/r^2) int int |q|^(3/2)``
* ``H = (1/r^3) int int |v|^2``
* ``M_{s,l} = r^-kappa int (int |v|^s)^(l/s) dt``, ``kappa = l (3/s + 2/l - 1)``

"ess sup" is realized as the maximum over grid nodes and over the
piecewise-linear-in-time interpolant of snapshot values.  Time integrals are
trapezoidal on snapshot times with linearly interpolated window ends.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exponents import ExponentError, exponent_report, is_admissible, mixed_norm_spec
from .fields import (
    DomainError,
    Grid2D,
    ParabolicCylinder,
    cylinder_weights,
    gradient_squared,
    interval_weights,
)

__all__ = [
    "MixedNormValue",
    "Monitors",
    "FunctionalReport",
    "EnergyInequalityReport",
    "BumpCutoff",
    "TypeIMonitorReport",
    "AuditRecord",
    "SwirlBoundRecord",
    "ESS_SUP_NOTE",
    "compute_functionals",
    "functional_ladder",
    "ladder_is_monotone",
    "type1_monitors",
    "check_energy_inequality",
    "interpolation_audit",
    "swirl_bound_ratio",
    "coarsen_trajectory",
]

ESS_SUP_NOTE = "ess sup taken as max over grid nodes and linearly interpolated snapshot times"


@dataclass(frozen=True)
class MixedNormValue:
    s: float
    l: float
    kappa: float
    value: float
    label: str


@dataclass(frozen=True)
class Monitors:
    sup_sqrt_t: float  # sqrt(t0 - t) |v_bar|
    sup_xprime: float  # |x'| |v_bar|
    sup_swirl: float  # rho |v_phi|


@dataclass(frozen=True)
class FunctionalReport:
    cylinder: ParabolicCylinder
    A: float
    E: float
    C: float
    D: float
    H: float
    M: Mapping[tuple, MixedNormValue]
    monitors: Monitors
    notes: tuple[str, ...] = (ESS_SUP_NOTE,)

    def values(self) -> dict[str, float]:
        out = {"A": self.A, "E": self.E, "C": self.C, "D": self.D, "H": self.H}
        for m in self.M.values():
            out[f"M_{m.label}"] = m.value
        return out

    def to_dict(self) -> dict:
        return {
            "cylinder": {"b": self.cylinder.b, "t0": self.cylinder.t0, "r": self.cylinder.r},
            "A": self.A,
            "E": self.E,
            "C": self.C,
            "D": self.D,
            "H": self.H,
            "M": [
                {"s": m.s, "l": m.l, "kappa": m.kappa, "label": m.label, "value": m.value}
                for m in self.M.values()
            ],
            "monitors": {
                "sup_sqrt_t": self.monitors.sup_sqrt_t,
                "sup_xprime": self.monitors.sup_xprime,
                "sup_swirl": self.monitors.sup_swirl,
            },
            "notes": list(self.notes),
        }


# -- time handling -------------------------------------------------------------

def _window(traj, t_lo: float, t_hi: float):
    """Snapshot indices and trapezoid weights covering ``[t_lo, t_hi]``."""
    ts = traj.times
    slack = 1e-9 * max(1.0, abs(ts[0]), abs(ts[-1]))
    if t_lo < ts[0] - slack or t_hi > ts[-1] + slack:
        raise DomainError(f"time window [{t_lo}, {t_hi}] leaves the sampled range [{ts[0]}, {ts[-1]}]")
    w = interval_weights(ts, max(t_lo, ts[0]), min(t_hi, ts[-1]))
    return ts, w


def _interpolated_max(ts: np.ndarray, vals: np.ndarray, t_lo: float, t_hi: float) -> float:
    """Max of the piecewise-linear interpolant of ``vals`` on ``[t_lo, t_hi]``."""
    inside = (ts > t_lo) & (ts < t_hi)
    cands = [np.interp(t_lo, ts, vals), np.interp(t_hi, ts, vals)]
    if inside.any():
        cands.append(vals[inside].max())
    return float(max(cands))


def _cylinder_mask(grid: Grid2D, b: float, r: float) -> np.ndarray:
    R, Z = grid.mesh()
    tol = 1e-12 * max(1.0, r)
    return (R <= r + tol) & (np.abs(Z - b) <= r + tol)


def compute_functionals(traj, cyl: ParabolicCylinder, mixed_specs: Iterable = (),
                        allow_truncate: bool = False) -> FunctionalReport:
    """Evaluate ``A, E, C, D, H`` and the requested ``M_{s,l}`` on ``cyl``."""
    grid = traj.grid
    b, r, t0 = cyl.b, cyl.r, cyl.t0
    t_lo = t0 - r * r
    ts, tw = _window(traj, t_lo, t0)
    wx = cylinder_weights(grid, b, r, allow_truncate)
    specs = [mixed_norm_spec(s, l) for s, l in mixed_specs]
    active = np.flatnonzero(tw > 0)
    # snapshots needed for the max and the endpoint interpolation
    lo_idx = max(0, int(np.searchsorted(ts, t_lo, side="right")) - 1)
    hi_idx = min(len(ts) - 1, int(np.searchsorted(ts, t0, side="left")))
    idx = sorted(set(active.tolist()) | set(range(lo_idx, hi_idx + 1)))

    n = len(ts)
    kin = np.zeros(n)
    grad = np.zeros(n)
    cub = np.zeros(n)
    pres = np.zeros(n)
    mixed = np.zeros((len(specs), n))
    mask = _cylinder_mask(grid, b, r)
    R = grid.mesh()[0]
    sup_t = sup_x = sup_sw = 0.0
    for j in idx:
        snap = traj.snapshots[j]
        v = snap.velocity
        sp2 = v.v_rho**2 + v.v_phi**2 + v.v_z**2
        sp = np.sqrt(sp2)
        kin[j] = np.sum(wx * sp2)
        grad[j] = np.sum(wx * gradient_squared(v))
        cub[j] = np.sum(wx * sp2 * sp)
        pres[j] = np.sum(wx * np.abs(snap.pressure.values) ** 1.5)
        for k, ms in enumerate(specs):
            mixed[k, j] = np.sum(wx * sp ** float(ms.s)) ** float(ms.l / ms.s)
        if t_lo - 1e-12 <= ts[j] <= t0 + 1e-12:
            mer = np.sqrt(v.v_rho**2 + v.v_z**2)[mask]
            sup_t = max(sup_t, float(np.sqrt(max(t0 - ts[j], 0.0)) * mer.max(initial=0.0)))
            sup_x = max(sup_x, float((R[mask] * mer).max(initial=0.0)))
            sup_sw = max(sup_sw, float(np.abs(R[mask] * v.v_phi[mask]).max(initial=0.0)))

    A = _interpolated_max(ts, kin, t_lo, t0) / r
    M = {}
    for k, ms in enumerate(specs):
        M[(ms.s, ms.l)] = MixedNormValue(
            float(ms.s), float(ms.l), float(ms.kappa), float(tw @ mixed[k]) / r ** float(ms.kappa), ms.label()
        )
    return FunctionalReport(
        cylinder=cyl,
        A=A,
        E=float(tw @ grad) / r,
        C=float(tw @ cub) / r**2,
        D=float(tw @ pres) / r**2,
        H=float(tw @ kin) / r**3,
        M=M,
        monitors=Monitors(sup_t, sup_x, sup_sw),
    )


def functional_ladder(traj, b: float, t0: float, radii: Sequence[float], mixed_specs: Iterable = ()):
    return [compute_functionals(traj, ParabolicCylinder(b, t0, r), mixed_specs) for r in sorted(radii)]


def ladder_is_monotone(reports: Sequence[FunctionalReport], rtol: float = 1e-12) -> bool:
    """``r A, r E, r^2 C, r^2 D`` nondecreasing along an increasing radius ladder."""
    reports = sorted(reports, key=lambda rep: rep.cylinder.r)
    for a, b in zip(reports, reports[1:]):
        ra, rb = a.cylinder.r, b.cylinder.r
        pairs = [(ra * a.A, rb * b.A), (ra * a.E, rb * b.E), (ra**2 * a.C, rb**2 * b.C), (ra**2 * a.D, rb**2 * b.D)]
        if any(x > y * (1 + rtol) + rtol for x, y in pairs):
            return False
    return True


# -- Type I monitors -----------------------------------------------------------

@dataclass(frozen=True)
class TypeIMonitorReport:
    t0: float
    r1: float | None
    monitors: Monitors
    times: np.ndarray
    G: np.ndarray  # max |v| over the monitored region, per snapshot
    M: np.ndarray  # running max of G
    epsilon: float  # largest eps with M(t) >= eps / sqrt(t0 - t) on sampled t < t0


def type1_monitors(traj, t0: float, r1: float | None = None, b: float = 0.0) -> TypeIMonitorReport:
    """Suprema of ``sqrt(t0-t)|v_bar|``, ``rho|v_bar|``, ``rho|v_phi|`` and the ``G``/``M`` series.

    The spatial region is the closed cylinder ``C(b e3, r1)`` (whole grid when
    ``r1`` is ``None``).
    """
    ts = traj.times
    if t0 < ts[-1] - 1e-12:
        raise ValueError("t0 must not precede the last snapshot")
    grid = traj.grid
    mask = np.ones(grid.shape, bool) if r1 is None else _cylinder_mask(grid, b, r1)
    R = grid.mesh()[0]
    G = np.zeros(len(ts))
    sup_t = sup_x = sup_sw = 0.0
    for j, snap in enumerate(traj.snapshots):
        v = snap.velocity
        mer = np.sqrt(v.v_rho**2 + v.v_z**2)[mask]
        G[j] = float(np.sqrt(v.v_rho**2 + v.v_phi**2 + v.v_z**2)[mask].max(initial=0.0))
        sup_t = max(sup_t, float(np.sqrt(t0 - ts[j]) * mer.max(initial=0.0)))
        sup_x = max(sup_x, float((R[mask] * mer).max(initial=0.0)))
        sup_sw = max(sup_sw, float(np.abs(R[mask] * v.v_phi[mask]).max(initial=0.0)))
    M = np.maximum.accumulate(G)
    before = ts < t0
    eps = float(np.min(M[before] * np.sqrt(t0 - ts[before]))) if before.any() else 0.0
    return TypeIMonitorReport(t0, r1, Monitors(sup_t, sup_x, sup_sw), ts, G, M, eps)


# -- local energy inequality ---------------------------------------------------

@dataclass(frozen=True)
class BumpCutoff:
    """``phi = eta(rho/r) eta((z-b)/r) zeta((t - t0 + r^2)/r^2)``.

    ``eta(x) = (1 - x^2)^p`` on ``|x| < 1`` and ``zeta(s) = s^2 (3 - 2 s)``
    on ``[0, 1]``, so ``phi`` vanishes on the lateral boundary of ``Q`` and at
    its initial time.
    """

    b: float
    r: float
    t0: float
    power: int = 4

    def __post_init__(self):
        if not self.r > 0 or self.power < 2:
            raise ValueError("cutoff needs r > 0 and power >= 2")

    @property
    def t_start(self) -> float:
        return self.t0 - self.r**2

    def _eta(self, x):
        p = self.power
        inside = np.abs(x) < 1
        base = np.where(inside, 1 - x * x, 0.0)
        e = base**p
        de = -2 * p * x * base ** (p - 1)
        # eta'(x)/x, finite at x = 0
        de_over_x = -2 * p * base ** (p - 1)
        d2e = -2 * p * base ** (p - 1) + 4 * p * (p - 1) * x * x * base ** (p - 2)
        return e, de, de_over_x, d2e

    def _zeta(self, t):
        s = np.clip((t - self.t_start) / self.r**2, 0.0, 1.0)
        return s * s * (3 - 2 * s), 6 * s * (1 - s) / self.r**2

    def evaluate(self, grid: Grid2D, t: float):
        """``(phi, phi_rho, phi_z, lap_phi, phi_t)`` on the grid at time ``t``."""
        R, Z = grid.mesh()
        r = self.r
        er, der, der_x, d2er = self._eta(R / r)
        ez, dez, _, d2ez = self._eta((Z - self.b) / r)
        zt, dzt = self._zeta(t)
        phi = er * ez * zt
        phi_r = der / r * ez * zt
        phi_z = er * dez / r * zt
        lap = ((d2er + der_x) / r**2 * ez + er * d2ez / r**2) * zt
        phi_t = er * ez * dzt
        return phi, phi_r, phi_z, lap, phi_t

    def to_dict(self) -> dict:
        return {"kind": "polynomial-bump", "b": self.b, "r": self.r, "t0": self.t0, "power": self.power}


@dataclass(frozen=True)
class EnergyInequalityReport:
    t: float
    lhs: float
    rhs: float
    slack: float  # rhs - lhs, signed
    tolerance: float
    cutoff: Mapping

    @property
    def satisfied(self) -> bool:
        return self.slack >= -self.tolerance


def _energy_terms(snaps, ts, grid, cutoff: BumpCutoff, t: float) -> np.ndarray:
    """``[int phi|v|^2 (t), 2 int int phi |grad v|^2, int int |v|^2 (Lap+d_t) phi, int int v.grad phi (|v|^2 + 2q)]``."""
    w = cylinder_weights(grid, cutoff.b, cutoff.r)
    n = len(ts)
    dissip = np.zeros(n)
    heat = np.zeros(n)
    flux = np.zeros(n)
    tw = interval_weights(ts, cutoff.t_start, t)
    for j in np.flatnonzero(tw > 0):
        v = snaps[j].velocity
        q = snaps[j].pressure.values
        phi, phi_r, phi_z, lap, phi_t = cutoff.evaluate(grid, ts[j])
        sp2 = v.v_rho**2 + v.v_phi**2 + v.v_z**2
        dissip[j] = np.sum(w * phi * gradient_squared(v))
        heat[j] = np.sum(w * sp2 * (lap + phi_t))
        flux[j] = np.sum(w * (v.v_rho * phi_r + v.v_z * phi_z) * (sp2 + 2 * q))
    # int phi(t) |v|^2, with |v|^2 linearly interpolated between snapshots
    phi_now = cutoff.evaluate(grid, t)[0]
    hi = int(np.clip(np.searchsorted(ts, t, side="left"), 0, n - 1))
    lo = max(hi - 1, 0)

    def local(j):
        v = snaps[j].velocity
        return np.sum(w * phi_now * (v.v_rho**2 + v.v_phi**2 + v.v_z**2))

    if hi == lo:
        loc = local(hi)
    else:
        theta = (t - ts[lo]) / (ts[hi] - ts[lo])
        loc = (1 - theta) * local(lo) + theta * local(hi)
    return np.array([loc, 2 * (tw @ dissip), tw @ heat, tw @ flux])


def coarsen_trajectory(traj, time_stride: int = 2):
    """Every other grid node and every ``time_stride``-th snapshot (last kept)."""
    from .fields import AxiField, ScalarField2D

    g = traj.grid
    if g.n_rho % 2 or g.n_z % 2:
        raise DomainError("coarsening needs even n_rho and n_z")
    cg = Grid2D(g.rho_max, g.z_min, g.z_max, g.n_rho // 2, g.n_z // 2, g.z_periodic)
    idx = list(range(0, len(traj.snapshots), time_stride))
    if idx[-1] != len(traj.snapshots) - 1:
        idx.append(len(traj.snapshots) - 1)
    snaps = []
    for j in idx:
        s = traj.snapshots[j]
        v = s.velocity
        snaps.append(
            replace(
                s,
                velocity=AxiField(cg, v.t, v.v_rho[::2, ::2], v.v_phi[::2, ::2], v.v_z[::2, ::2]),
                pressure=ScalarField2D(cg, v.t, s.pressure.values[::2, ::2]),
            )
        )
    return replace(traj, snapshots=tuple(snaps))


def check_energy_inequality(traj, cutoff: BumpCutoff, t: float, safety: float = 2.0) -> EnergyInequalityReport:
    """Evaluate both sides of the local energy inequality up to time ``t``.

    The declared tolerance is ``safety`` times the summed change of the four
    terms when the evaluation is repeated on every other grid node and every
    other snapshot (a Richardson-type quadrature error estimate).
    """
    grid = traj.grid
    ts = traj.times
    if not (cutoff.t_start <= t <= cutoff.t0 + 1e-12):
        raise ValueError("evaluation time must lie in the cutoff's time window")
    if cutoff.t_start < ts[0] - 1e-12 or t > ts[-1] + 1e-12:
        raise DomainError("cutoff time window leaves the sampled range")
    if cutoff.r >= grid.rho_max or cutoff.b - cutoff.r < grid.z_min or cutoff.b + cutoff.r > grid.z_max:
        raise DomainError("cutoff support must lie inside the grid, away from the wall")
    terms = _energy_terms(traj.snapshots, ts, grid, cutoff, t)
    lhs, rhs = float(terms[0] + terms[1]), float(terms[2] + terms[3])
    slack = rhs - lhs
    try:
        ctraj = coarsen_trajectory(traj)
        coarse = _energy_terms(ctraj.snapshots, ctraj.times, ctraj.grid, cutoff, t)
        # summed per term so that errors of opposite sign cannot cancel
        estimate = float(np.abs(coarse - terms).sum())
    except DomainError:
        estimate = float(np.abs(terms).sum())
    scale = max(abs(lhs), abs(rhs), 1e-300)
    tol = safety * estimate + 1e-12 * scale
    return EnergyInequalityReport(float(t), lhs, rhs, float(slack), float(tol), cutoff.to_dict())


# -- interpolation audit -----------------------------------------------------

@dataclass(frozen=True)
class AuditRecord:
    ratio: float
    m: float
    mu: float
    consistent: bool = True


def interpolation_audit(report: FunctionalReport, s, l) -> AuditRecord:
    """Empirical constant ``C / (A^mu M^(1/m) (E + H)^((m-1)/m))``."""
    if not is_admissible(s, l):
        raise ExponentError(f"(s, l) = ({s}, {l}) is not admissible for the interpolation bound")
    rep = exponent_report(s, l)
    key = (rep.spec.s, rep.spec.l)
    if key not in report.M:
        raise KeyError(f"report has no M_{{{rep.spec.label()}}}")
    m, mu = float(rep.m), float(rep.mu)
    Mv = report.M[key].value
    if report.C == 0:
        return AuditRecord(0.0, m, mu)
    denom = report.A**mu * Mv ** (1 / m) * (report.E + report.H) ** ((m - 1) / m)
    if denom == 0:
        return AuditRecord(float("inf"), m, mu, consistent=False)
    return AuditRecord(report.C / denom, m, mu)


# -- swirl bound -------------------------------------------------------------

@dataclass(frozen=True)
class SwirlBoundRecord:
    sup_inner: float  # sup of |f| over Q(b, t0, r/2)
    norm_outer: float  # (int int_{Q(b, t0, r)} |f|^(10/3))^(3/10)
    ratio: float


def swirl_bound_ratio(traj, b: float, t0: float, r: float = 1.0) -> SwirlBoundRecord:
    """Measured constant in ``sup_{Q(r/2)} |rho v_phi| <= C (int int_{Q(r)} |rho v_phi|^(10/3))^(3/10)``."""
    grid = traj.grid
    R = grid.mesh()[0]
    ts, tw = _window(traj, t0 - r * r, t0)
    w = cylinder_weights(grid, b, r)
    mask = _cylinder_mask(grid, b, r / 2)
    inner_lo = t0 - r * r / 4
    sup = 0.0
    integ = np.zeros(len(ts))
    for j, snap in enumerate(traj.snapshots):
        if tw[j] == 0 and not (inner_lo <= ts[j] <= t0):
            continue
        f = np.abs(R * snap.velocity.v_phi)
        integ[j] = np.sum(w * f ** (10 / 3))
        if inner_lo - 1e-12 <= ts[j] <= t0 + 1e-12:
            sup = max(sup, float(f[mask].max(initial=0.0)))
    norm = float(tw @ integ) ** 0.3
    ratio = sup / norm if norm > 0 else (0.0 if sup == 0 else float("inf"))
    return SwirlBoundRecord(sup, norm, ratio)
