"""Record-breaking peaks and the blow-up zoom ``u^k(y, s) = lambda v(lambda y', z_k + lambda y3, t_k + lambda^2 s)``.

With ``lambda_k = 1/M_k`` the zoomed field is normalized at the record point
and bounded by 1 on any window inside the monitored region.  Zooms shift only
in ``z`` (the peak's radial position is kept as ``y'_k = rho_k M_k``), so the
rescaled field stays axisymmetric.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .fields import AxiField, DomainError, Grid2D, ParabolicCylinder, ScalarField2D
from .functionals import FunctionalReport, coarsen_trajectory, compute_functionals

__all__ = [
    "PeakRecord",
    "ZoomSnapshot",
    "ZoomWindowError",
    "ZoomReport",
    "TransportRecord",
    "detect_peaks",
    "max_admissible_window",
    "zoom",
    "verify_zoom",
    "functional_transport",
    "holder_distance",
]

_PARITY = {"v_rho": -1.0, "v_phi": -1.0, "v_z": 1.0, "q": 1.0}


@dataclass(frozen=True)
class PeakRecord:
    k: int
    t_k: float
    rho_k: float
    z_k: float
    M_k: float
    snapshot_index: int

    def to_dict(self) -> dict:
        return {"k": self.k, "t_k": self.t_k, "rho_k": self.rho_k, "z_k": self.z_k, "M_k": self.M_k,
                "snapshot_index": self.snapshot_index}


class ZoomWindowError(DomainError):
    def __init__(self, a: float, a_max: float, reason: str):
        super().__init__(f"window a={a:.6g} escapes the sampled region ({reason}); maximal admissible a = {a_max:.6g}")
        self.a = a
        self.max_admissible = a_max


def _region_mask(grid: Grid2D, r1: float, b: float) -> np.ndarray:
    R, Z = grid.mesh()
    tol = 1e-12 * max(1.0, r1)
    return (R <= r1 + tol) & (np.abs(Z - b) <= r1 + tol)


def detect_peaks(traj, r1: float, ratio: float = 1.1, b: float = 0.0, start_time: float | None = None) -> list[PeakRecord]:
    """Record times of ``G(t) = max_{C(b e3, r1)} |v|`` on a geometric ladder.

    The first snapshot at or after ``start_time`` is record ``k = 0``; a later
    snapshot is a record when ``G`` equals the running maximum and reaches
    ``ratio`` times the previous record value.
    """
    if len(traj.snapshots) == 0:
        raise ValueError("empty trajectory")
    if not ratio > 1:
        raise ValueError("ratio must exceed 1")
    grid = traj.grid
    if r1 > grid.rho_max or b - r1 < grid.z_min - 1e-12 or b + r1 > grid.z_max + 1e-12:
        raise DomainError(f"monitoring cylinder of radius {r1} is not inside the grid")
    mask = _region_mask(grid, r1, b)
    R, Z = grid.mesh()
    rs, zs = R[mask], Z[mask]
    records: list[PeakRecord] = []
    running = -np.inf
    for j, snap in enumerate(traj.snapshots):
        if start_time is not None and snap.t < start_time - 1e-12:
            continue
        v = snap.velocity
        sp = np.sqrt(v.v_rho**2 + v.v_phi**2 + v.v_z**2)[mask]
        i = int(np.argmax(sp))
        G = float(sp[i])
        is_max = G >= running
        running = max(running, G)
        if not records or (is_max and G >= ratio * records[-1].M_k and G > 0):
            records.append(PeakRecord(len(records), snap.t, float(rs[i]), float(zs[i]), G, j))
    return records


@dataclass(frozen=True, eq=False)
class ZoomSnapshot:
    lambda_k: float
    peak: PeakRecord
    u_fields: tuple[AxiField, ...]
    p_fields: tuple[ScalarField2D, ...]
    a: float
    interp_tol: float
    norm_raw: float  # lambda |v(x_k, t_k)| from grid values
    norm_interp: float  # same point through the resampling path
    convention: str = "axial"

    @property
    def grid(self) -> Grid2D:
        return self.u_fields[0].grid

    @property
    def times(self) -> np.ndarray:
        return np.array([u.t for u in self.u_fields])

    @property
    def y_k(self) -> float:
        return self.peak.rho_k / self.lambda_k

    def as_trajectory(self):
        from .solver import Snapshot, Trajectory

        snaps = tuple(Snapshot(u, p) for u, p in zip(self.u_fields, self.p_fields))
        return Trajectory(snaps, float(self.times[1] - self.times[0]), self.provenance())

    def provenance(self) -> dict:
        return {"k": self.peak.k, "lambda_k": self.lambda_k, "t_k": self.peak.t_k,
                "x_k": [self.peak.rho_k, self.peak.z_k], "a": self.a, "convention": self.convention,
                "interp_tol": self.interp_tol}


def max_admissible_window(traj, peak: PeakRecord) -> tuple[float, str]:
    """Largest ``a`` whose rescaled window stays inside the sampled data, and the binding limit."""
    grid = traj.grid
    lam = 1.0 / peak.M_k
    limits = [(grid.rho_max / lam, "radial extent")]
    if grid.z_periodic:
        limits.append(((grid.z_max - grid.z_min) / (2 * lam), "half period"))
    else:
        limits.append(((peak.z_k - grid.z_min) / lam, "lower z end"))
        limits.append(((grid.z_max - peak.z_k) / lam, "upper z end"))
    history = peak.t_k - traj.times[0]
    limits.append((np.sqrt(max(history, 0.0)) / lam, "sampled history"))
    a_max, why = min(limits, key=lambda x: x[0])
    return float(a_max), why


class _Resampler:
    """Bicubic splines per snapshot on the parity-extended ``(rho, z)`` plane."""

    def __init__(self, traj):
        self.traj = traj
        grid = traj.grid
        rho = grid.rho
        self.rho_ext = np.concatenate([-rho[:0:-1], rho])
        z = grid.z
        if grid.z_periodic:
            pad = 3
            L = grid.z_max - grid.z_min
            self.z_ext = np.concatenate([z[-pad:] - L, z, z[:pad] + L, [z[pad] + L]])
            self._zidx = np.concatenate([np.arange(grid.n_z - pad, grid.n_z), np.arange(grid.n_z),
                                         np.arange(pad), [pad]])
        else:
            self.z_ext = z
            self._zidx = np.arange(z.size)
        self._cache: dict = {}

    def _extended(self, a: np.ndarray, parity: float) -> np.ndarray:
        a = a[:, self._zidx]
        return np.concatenate([parity * a[:0:-1], a], axis=0)

    def splines(self, j: int, kind: int = 3):
        key = (j, kind)
        if key not in self._cache:
            snap = self.traj.snapshots[j]
            v = snap.velocity
            arrays = {"v_rho": v.v_rho, "v_phi": v.v_phi, "v_z": v.v_z, "q": snap.pressure.values}
            self._cache[key] = {
                name: RectBivariateSpline(self.rho_ext, self.z_ext, self._extended(arr, _PARITY[name]), kx=kind, ky=kind, s=0)
                for name, arr in arrays.items()
            }
        return self._cache[key]

    def evaluate(self, j: int, rho: np.ndarray, z: np.ndarray, kind: int = 3) -> dict:
        grid = self.traj.grid
        if grid.z_periodic:
            z = grid.z_min + np.mod(z - grid.z_min, grid.z_max - grid.z_min)
        return {name: sp.ev(rho, z) for name, sp in self.splines(j, kind).items()}


def _bracket(ts: np.ndarray, t: float) -> tuple[int, int, float]:
    hi = int(np.searchsorted(ts, t - 1e-12 * max(1.0, abs(t)), side="left"))
    hi = min(max(hi, 0), len(ts) - 1)
    if abs(ts[hi] - t) <= 1e-12 * max(1.0, abs(t)):
        return hi, hi, 0.0
    lo = hi - 1
    return lo, hi, (t - ts[lo]) / (ts[hi] - ts[lo])


def zoom(traj, peak: PeakRecord, a: float, n_rho: int = 32, n_time: int = 9, convention: str = "axial",
         resampler: _Resampler | None = None) -> ZoomSnapshot:
    """Resample ``lambda v`` and ``lambda^2 q`` on ``|y'| <= a, |y3| <= a, -a^2 <= s <= 0``."""
    if not peak.M_k > 0:
        raise ValueError("peak amplitude M_k must be positive to define lambda_k = 1/M_k")
    if convention not in ("axial", "full"):
        raise ValueError("convention is 'axial' or 'full'")
    if convention == "full" and peak.rho_k != 0:
        raise ValueError("the 'full' convention centres on x_k; with rho_k > 0 the zoom is not axisymmetric")
    if not a > 0 or n_rho < 4 or n_time < 2:
        raise ValueError("need a > 0, n_rho >= 4, n_time >= 2")
    a_max, why = max_admissible_window(traj, peak)
    if a > a_max * (1 + 1e-12):
        raise ZoomWindowError(a, a_max, why)
    lam = 1.0 / peak.M_k
    zg = Grid2D(a, -a, a, n_rho, 2 * n_rho)
    Y, Y3 = zg.mesh()
    rho, z = lam * Y, peak.z_k + lam * Y3
    rs = resampler or _Resampler(traj)
    ts = traj.times
    s_levels = np.linspace(-a * a, 0.0, n_time)

    u_fields, p_fields = [], []
    space_err = 0.0
    used = set()
    for s in s_levels:
        t = peak.t_k + lam * lam * s
        lo, hi, th = _bracket(ts, t)
        used.update((lo, hi))
        cub_lo = rs.evaluate(lo, rho, z)
        cub_hi = cub_lo if hi == lo else rs.evaluate(hi, rho, z)
        comps = {k: (1 - th) * cub_lo[k] + th * cub_hi[k] for k in cub_lo}
        lin = rs.evaluate(lo, rho, z, kind=1)
        space_err = max(space_err, max(float(np.abs(lin[k] - cub_lo[k]).max()) for k in ("v_rho", "v_phi", "v_z")))
        u_fields.append(AxiField(zg, float(s), lam * comps["v_rho"], lam * comps["v_phi"], lam * comps["v_z"]))
        p_fields.append(ScalarField2D(zg, float(s), lam * lam * comps["q"]))

    # linear-in-time error bound (dt^2/8) |v_tt| from second differences of the snapshots used
    time_err = 0.0
    for j in sorted(used):
        if 0 < j < len(ts) - 1:
            a0, a1, a2 = (traj.snapshots[i].velocity for i in (j - 1, j, j + 1))
            for c0, c1, c2 in zip(a0.components(), a1.components(), a2.components()):
                time_err = max(time_err, float(np.abs(c2 - 2 * c1 + c0).max()) / 8)
    tol = lam * (space_err + time_err) + 1e-12

    v = traj.snapshots[peak.snapshot_index].velocity
    i_r = int(round(peak.rho_k / v.grid.d_rho))
    i_z = int(np.argmin(np.abs(v.grid.z - peak.z_k)))
    raw = lam * float(np.sqrt(v.v_rho[i_r, i_z] ** 2 + v.v_phi[i_r, i_z] ** 2 + v.v_z[i_r, i_z] ** 2))
    pt = rs.evaluate(peak.snapshot_index, np.array([peak.rho_k]), np.array([peak.z_k]))
    interp = lam * float(np.sqrt(pt["v_rho"][0] ** 2 + pt["v_phi"][0] ** 2 + pt["v_z"][0] ** 2))
    return ZoomSnapshot(lam, peak, tuple(u_fields), tuple(p_fields), float(a), float(tol), raw, interp, convention)


@dataclass(frozen=True)
class ZoomReport:
    k: int
    functionals: tuple[FunctionalReport, ...]
    ladder_max: float  # max over radii of A + E + C + D
    normalization_raw: float
    normalization: float
    normalization_ok: bool
    sup_u: float
    bound_ok: bool
    decay_sup: float  # sup |y'| |u|
    interp_tol: float

    @property
    def passed(self) -> bool:
        return self.normalization_ok and self.bound_ok


def verify_zoom(snapshot: ZoomSnapshot, mixed_specs: Iterable = (), radii: Sequence[float] | None = None) -> ZoomReport:
    """Functional ladder, normalization, boundedness and decay checks on one zoom."""
    a = snapshot.a
    radii = sorted(radii) if radii is not None else [a / 4, a / 2, a]
    zt = snapshot.as_trajectory()
    specs = list(mixed_specs)
    reps = tuple(compute_functionals(zt, ParabolicCylinder(0.0, 0.0, r), specs) for r in radii)
    ladder = max(rep.A + rep.E + rep.C + rep.D for rep in reps)
    sup_u = 0.0
    decay = 0.0
    Y = snapshot.grid.mesh()[0]
    for u in snapshot.u_fields:
        sp = np.sqrt(u.v_rho**2 + u.v_phi**2 + u.v_z**2)
        sup_u = max(sup_u, float(sp.max()))
        decay = max(decay, float((Y * sp).max()))
    tol = snapshot.interp_tol
    norm_ok = abs(snapshot.norm_raw - 1) <= 1e-6 and abs(snapshot.norm_interp - 1) <= 1e-6 + tol
    return ZoomReport(snapshot.peak.k, reps, ladder, snapshot.norm_raw, snapshot.norm_interp, norm_ok,
                      sup_u, sup_u <= 1 + tol, decay, tol)


@dataclass(frozen=True)
class TransportRecord:
    r: float
    name: str
    zoomed: float
    original: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return abs(self.zoomed - self.original) <= self.tolerance


def functional_transport(traj, snapshot: ZoomSnapshot, radii: Sequence[float], mixed_specs: Iterable = (),
                         safety: float = 2.0) -> list[TransportRecord]:
    """Compare ``F(0, r; u^k)`` with ``F(z_k, lambda_k r; v)``.

    The tolerance adds the changes of both sides under coarsening (half the
    zoom resolution and time levels; every other node and snapshot of the
    trajectory), times ``safety``.
    """
    specs = list(mixed_specs)
    lam, zk, tk = snapshot.lambda_k, snapshot.peak.z_k, snapshot.peak.t_k
    n_r = snapshot.grid.n_rho
    n_t = len(snapshot.u_fields)
    coarse_zoom = zoom(traj, snapshot.peak, snapshot.a, n_rho=n_r // 2, n_time=(n_t + 1) // 2,
                       convention=snapshot.convention)
    ztraj, ctraj = snapshot.as_trajectory(), coarse_zoom.as_trajectory()
    try:
        coarse_v = coarsen_trajectory(traj)
    except DomainError:
        coarse_v = None
    out = []
    for r in radii:
        fu = compute_functionals(ztraj, ParabolicCylinder(0.0, 0.0, r), specs).values()
        fuc = compute_functionals(ctraj, ParabolicCylinder(0.0, 0.0, r), specs).values()
        cyl = ParabolicCylinder(zk, tk, lam * r)
        fv = compute_functionals(traj, cyl, specs).values()
        fvc = compute_functionals(coarse_v, cyl, specs).values() if coarse_v is not None else fv
        for name in fu:
            tol = safety * (abs(fu[name] - fuc[name]) + abs(fv[name] - fvc[name])) + 1e-12 * max(abs(fv[name]), 1.0)
            out.append(TransportRecord(float(r), name, fu[name], fv[name], tol))
    return out


def _window_values(snapshot: ZoomSnapshot, fraction: float):
    grid = snapshot.grid
    Y, Y3 = grid.mesh()
    a = snapshot.a
    keep = (Y <= fraction * a + 1e-12) & (np.abs(Y3) <= fraction * a + 1e-12)
    pts, vals = [], []
    for u in snapshot.u_fields:
        if u.t < -(fraction * a) ** 2 - 1e-12:
            continue
        pts.append(np.column_stack([Y[keep], Y3[keep], np.full(keep.sum(), u.t)]))
        vals.append(np.column_stack([u.v_rho[keep], u.v_phi[keep], u.v_z[keep]]))
    return np.vstack(pts), np.vstack(vals)


def holder_distance(a: ZoomSnapshot, b: ZoomSnapshot, alpha: float, fraction: float = 0.5, chunk: int = 512) -> float:
    """``sup |u_a - u_b| + max |Delta(u_a - u_b)| / d^alpha`` over node pairs in ``Q(fraction * a)``.

    ``d = sqrt(|d rho|^2 + |d z|^2 + |d s|)`` is the parabolic distance between
    nodes of the meridional half-plane.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if a.a != b.a or a.grid != b.grid or not np.array_equal(a.times, b.times):
        raise ValueError("zoom snapshots do not share window geometry")
    pts, va = _window_values(a, fraction)
    _, vb = _window_values(b, fraction)
    d = va - vb
    sup = float(np.sqrt((d**2).sum(axis=1)).max())
    best = 0.0
    n = len(pts)
    for start in range(0, n, chunk):
        p = pts[start:start + chunk, None, :]
        dist = np.sqrt((p[..., 0] - pts[None, :, 0]) ** 2 + (p[..., 1] - pts[None, :, 1]) ** 2
                       + np.abs(p[..., 2] - pts[None, :, 2]))
        diff = np.sqrt(((d[start:start + chunk, None, :] - d[None, :, :]) ** 2).sum(axis=2))
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dist > 0, diff / dist**alpha, 0.0)
        best = max(best, float(q.max()))
    return sup + best
