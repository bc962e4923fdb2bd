"""Pressure recovery, the local/harmonic pressure split, and a BMO surrogate."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fields import (
    AxiField,
    DomainError,
    Grid2D,
    ScalarField2D,
    cylinder_weights,
    ddrho,
    ddz,
)
from .poisson import PoissonSolver

__all__ = [
    "PressureSplit",
    "pressure_source",
    "wall_pressure_gradient",
    "solve_pressure",
    "split_pressure",
    "laplacian",
    "bmo_seminorm",
    "mean_oscillation",
    "dyadic_radii",
]


def _over_rho(a, grid, axis_value):
    out = np.empty_like(a, dtype=float)
    out[1:] = a[1:] / grid.rho[1:, None]
    out[0] = axis_value
    return out


def pressure_source(v: AxiField) -> np.ndarray:
    """``-div div (v (x) v) = -tr((grad v)^2)`` for divergence-free ``v``."""
    g = v.grid
    dr_vr = ddrho(v.v_rho, g, "odd")
    dz_vr = ddz(v.v_rho, g)
    dr_vp = ddrho(v.v_phi, g, "odd")
    dr_vz = ddrho(v.v_z, g, "even")
    dz_vz = ddz(v.v_z, g)
    vr_r = _over_rho(v.v_rho, g, dr_vr[0])
    vp_r = _over_rho(v.v_phi, g, dr_vp[0])
    tr = dr_vr**2 + vr_r**2 + dz_vz**2 + 2 * (dz_vr * dr_vz - vp_r * dr_vp)
    return -tr


def _vorticity(v: AxiField) -> np.ndarray:
    return ddz(v.v_rho, v.grid) - ddrho(v.v_z, v.grid, "even")


def wall_pressure_gradient(v: AxiField) -> np.ndarray:
    """``dq/drho`` on the wall from the radial momentum balance.

    Assumes the wall velocity is steady in time (true for the solver's
    impermeable wall), so the balance reads
    ``q_r = v_phi^2/rho - v_rho dv_rho/drho - v_z dv_rho/dz + d(omega_phi)/dz``.
    """
    g = v.grid
    R = g.rho_max
    omega = _vorticity(v)
    return (
        v.v_phi[-1] ** 2 / R
        - v.v_rho[-1] * ddrho(v.v_rho, g, "odd")[-1]
        - v.v_z[-1] * ddz(v.v_rho, g)[-1]
        + ddz(omega, g)[-1]
    )


def _axial_pressure_gradient(v: AxiField) -> tuple[np.ndarray, np.ndarray]:
    """``dq/dz`` on the two ``z`` ends, from the axial momentum balance."""
    g = v.grid
    omega = _vorticity(v)
    curl_z = _over_rho(ddrho(g.rho[:, None] * omega, g, "even"), g, 2 * ddrho(omega, g, "odd")[0])
    adv = v.v_rho * ddrho(v.v_z, g, "even") + v.v_z * ddz(v.v_z, g)
    gz = -adv - curl_z
    return gz[:, 0], gz[:, -1]


@lru_cache(maxsize=32)
def _pressure_solver(grid: Grid2D) -> PoissonSolver:
    return PoissonSolver(grid, "laplace", "neumann", "periodic" if grid.z_periodic else "neumann")


def _normalize(q: np.ndarray, grid: Grid2D) -> np.ndarray:
    try:
        w = cylinder_weights(grid, 0.0, 1.0)
    except DomainError:
        w = cylinder_weights(grid, 0.5 * (grid.z_min + grid.z_max),
                             max(grid.rho_max, 0.5 * (grid.z_max - grid.z_min)), allow_truncate=True)
    return q - float(np.sum(w * q) / np.sum(w))


def solve_pressure(v: AxiField) -> ScalarField2D:
    """Solve ``Lap q = -div div (v (x) v)`` with momentum-consistent Neumann data.

    The result has zero mean over the unit cylinder ``C(0, 1)`` (or over the
    whole grid when the unit cylinder is not covered).
    """
    grid = v.grid
    solver = _pressure_solver(grid)
    src = pressure_source(v)
    wall = wall_pressure_gradient(v)
    if grid.z_periodic:
        q = solver.solve(src, wall=wall)
    else:
        lo, hi = _axial_pressure_gradient(v)
        q = solver.solve(src, wall=wall, z_lo=lo, z_hi=hi)
    return ScalarField2D(grid, v.t, _normalize(q, grid))


def laplacian(q: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Finite-volume axisymmetric Laplacian; NaN on rows/columns it cannot reach."""
    h = grid.d_rho
    rho = grid.rho
    out = np.full(grid.shape, np.nan)
    half = rho[:-1] + h / 2
    flux = half[:, None] * (q[1:] - q[:-1]) / h
    radial = np.full(grid.shape, np.nan)
    radial[1:-1] = (flux[1:] - flux[:-1]) / (rho[1:-1, None] * h)
    radial[0] = flux[0] / (h * h / 8)
    if grid.z_periodic:
        zz = (np.roll(q, -1, axis=1) - 2 * q + np.roll(q, 1, axis=1)) / grid.d_z**2
        out = radial + zz
    else:
        out[:, 1:-1] = radial[:, 1:-1] + (q[:, 2:] - 2 * q[:, 1:-1] + q[:, :-2]) / grid.d_z**2
    return out


@dataclass(frozen=True, eq=False)
class PressureSplit:
    q1: ScalarField2D
    q2: ScalarField2D
    cutoff_radius: float
    center: float
    harmonicity_residual: float
    residual_scale: float  # max |source| inside the cutoff, for relative reading
    box_factor: float


def _divdiv_source(grid: Grid2D, trr, tpp, trz, tzz) -> np.ndarray:
    """``-div div T`` for a symmetric axisymmetric tensor, in divergence form."""
    wr = (
        ddrho(trr, grid, "even")
        + ddz(trz, grid)
        + _over_rho(trr - tpp, grid, ddrho(trr - tpp, grid, "even")[0])
    )
    wz = ddrho(trz, grid, "odd") + ddz(tzz, grid) + _over_rho(trz, grid, ddrho(trz, grid, "odd")[0])
    div = _over_rho(ddrho(grid.rho[:, None] * wr, grid, "even"), grid, 2 * ddrho(wr, grid, "odd")[0])
    return -(div + ddz(wz, grid))


def split_pressure(q: ScalarField2D, v: AxiField, cutoff_radius: float, center: float = 0.0,
                   box_factor: float = 2.0) -> PressureSplit:
    """Split ``q = q1 + q2`` with ``q1`` generated by the cut-off source.

    ``q1`` solves ``Lap q1 = -div div (chi v (x) v)`` on a box enlarged by
    ``box_factor`` with homogeneous Dirichlet far field, standing in for
    the whole-space potential; ``q2 = q - q1`` exactly.
    """
    grid = v.grid
    r = float(cutoff_radius)
    if not (r < grid.rho_max and center - r > grid.z_min and center + r < grid.z_max):
        raise DomainError(f"cutoff cylinder of radius {r} at z={center} is not strictly inside the grid")
    if box_factor < 1:
        raise ValueError("box_factor must be >= 1")
    h, hz = grid.d_rho, grid.d_z
    n_rho = int(np.ceil(box_factor * grid.n_rho))
    extra = int(np.ceil((box_factor - 1) * grid.n_z / 2)) + 1
    nz_orig = grid.nz_nodes
    big = Grid2D(n_rho * h, grid.z_min - extra * hz, grid.z_min + (nz_orig - 1 + extra) * hz,
                 n_rho, nz_orig - 1 + 2 * extra, z_periodic=False)
    R, Z = grid.mesh()
    chi = ((R < r) & (np.abs(Z - center) < r)).astype(float)

    def embed(a):
        out = np.zeros(big.shape)
        out[: grid.n_rho + 1, extra: extra + nz_orig] = a
        return out

    trr = embed(chi * v.v_rho**2)
    tpp = embed(chi * v.v_phi**2)
    trz = embed(chi * v.v_rho * v.v_z)
    tzz = embed(chi * v.v_z**2)
    src = _divdiv_source(big, trr, tpp, trz, tzz)
    q1_big = PoissonSolver(big, "laplace", "dirichlet", "dirichlet").solve(src)
    q1 = q1_big[: grid.n_rho + 1, extra: extra + nz_orig]
    q2 = q.values - q1

    lap = laplacian(q2, grid)
    inner = (R < r - 2 * h) & (np.abs(Z - center) < r - 2 * hz)
    inner &= np.isfinite(lap)
    resid = float(np.abs(lap[inner]).max()) if inner.any() else 0.0
    scale = float(np.abs(pressure_source(v)[inner]).max()) if inner.any() else 0.0
    return PressureSplit(
        ScalarField2D(grid, q.t, q1),
        ScalarField2D(grid, q.t, q2),
        r,
        center,
        resid,
        scale,
        box_factor,
    )


def dyadic_radii(r_max: float, levels: int = 4) -> list[float]:
    return [r_max / 2**k for k in range(levels)]


def mean_oscillation(q: ScalarField2D, b: float, r: float, allow_truncate: bool = False) -> float:
    w = cylinder_weights(q.grid, b, r, allow_truncate)
    vol = float(w.sum())
    mean = float(np.sum(w * q.values)) / vol
    return float(np.sum(w * np.abs(q.values - mean))) / vol


def bmo_seminorm(q: ScalarField2D, radii, centers=None, n_centers: int = 9) -> float:
    """Largest mean oscillation over axis-centred cylinders.

    Centres default to ``n_centers`` evenly spaced axis points for which the
    cylinder fits in the grid.
    """
    radii = list(radii)
    if not radii:
        raise ValueError("need at least one radius")
    grid = q.grid
    best = 0.0
    for r in radii:
        if r > grid.rho_max:
            raise DomainError(f"radius {r} exceeds the radial extent {grid.rho_max}")
        if centers is None:
            lo, hi = grid.z_min + r, grid.z_max - r
            if hi < lo - 1e-12:
                raise DomainError(f"radius {r} does not fit the axial extent")
            bs = np.linspace(lo, hi, n_centers) if hi > lo else np.array([lo])
        else:
            bs = np.asarray(centers, dtype=float)
        for b in bs:
            best = max(best, mean_oscillation(q, float(b), float(r)))
    return best
