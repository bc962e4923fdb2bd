"""Grids, axisymmetric fields, cylindrical stencils and cylinder quadrature.

Arrays are indexed ``(i_rho, i_z)``.  Radial nodes are ``rho_i = i * d_rho``
for ``i = 0..n_rho`` so the first node sits on the axis and the last one on
the outer wall.  In ``z`` a periodic grid has ``n_z`` nodes (the node at
``z_max`` is the image of ``z_min``); a bounded grid has ``n_z + 1``.

Axis parity (reflection ``rho -> -rho``):

============  ======
quantity      parity
============  ======
v_rho, v_phi  odd
omega_phi     odd
v_z, q        even
f, psi        even (both vanish like rho**2)
============  ======
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

__all__ = [
    "DomainError",
    "AxisRegularityError",
    "Grid2D",
    "AxiField",
    "ScalarField2D",
    "ParabolicCylinder",
    "decompose",
    "swirl_operator",
    "integrate_over_cylinder",
    "cylinder_weights",
    "domain_weights",
    "interval_weights",
    "ddrho",
    "ddz",
    "d2rho",
    "d2z",
    "divergence",
    "gradient_squared",
    "speed",
]


class DomainError(ValueError):
    """A requested region is not covered by the sampled grid."""


class AxisRegularityError(ValueError):
    """A field violates its required behaviour on the symmetry axis."""


@dataclass(frozen=True)
class Grid2D:
    rho_max: float
    z_min: float
    z_max: float
    n_rho: int
    n_z: int
    z_periodic: bool = False

    def __post_init__(self):
        if self.n_rho < 2 or self.n_z < 2:
            raise ValueError("grid needs at least 2 intervals per direction")
        if not self.rho_max > 0 or not self.z_max > self.z_min:
            raise ValueError("grid extents must be positive")

    @property
    def d_rho(self) -> float:
        return self.rho_max / self.n_rho

    @property
    def d_z(self) -> float:
        return (self.z_max - self.z_min) / self.n_z

    @property
    def nz_nodes(self) -> int:
        return self.n_z if self.z_periodic else self.n_z + 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rho + 1, self.nz_nodes)

    @property
    def rho(self) -> np.ndarray:
        return self.d_rho * np.arange(self.n_rho + 1)

    @property
    def z(self) -> np.ndarray:
        return self.z_min + self.d_z * np.arange(self.nz_nodes)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.rho, self.z, indexing="ij")

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def to_dict(self) -> dict:
        return {
            "rho_max": self.rho_max,
            "z_min": self.z_min,
            "z_max": self.z_max,
            "n_rho": self.n_rho,
            "n_z": self.n_z,
            "z_periodic": self.z_periodic,
        }


def _frozen(a, shape) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"array shape {arr.shape} does not match grid {shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField2D:
    grid: Grid2D
    t: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.grid.shape))


@dataclass(frozen=True, eq=False)
class AxiField:
    grid: Grid2D
    t: float
    v_rho: np.ndarray
    v_phi: np.ndarray
    v_z: np.ndarray

    def __post_init__(self):
        for name in ("v_rho", "v_phi", "v_z"):
            object.__setattr__(self, name, _frozen(getattr(self, name), self.grid.shape))

    @classmethod
    def zeros(cls, grid: Grid2D, t: float = 0.0) -> "AxiField":
        z = grid.zeros()
        return cls(grid, t, z, z, z)

    def components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.v_rho, self.v_phi, self.v_z

    def swirl_variable(self) -> np.ndarray:
        """``f = rho * v_phi``."""
        return self.grid.rho[:, None] * self.v_phi

    def scaled(self, factor: float) -> "AxiField":
        return replace(self, v_rho=factor * self.v_rho, v_phi=factor * self.v_phi, v_z=factor * self.v_z)


@dataclass(frozen=True)
class ParabolicCylinder:
    """``C(b e3, r) x ]t0 - r^2, t0[`` with its centre on the symmetry axis."""

    b: float
    t0: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"cylinder radius must be positive, got {self.r}")

    @property
    def t_start(self) -> float:
        return self.t0 - self.r * self.r


def decompose(v: AxiField) -> tuple[AxiField, AxiField]:
    """Split ``v`` into its meridional part and its swirl part."""
    zero = np.zeros(v.grid.shape)
    meridional = AxiField(v.grid, v.t, v.v_rho, zero, v.v_z)
    swirl = AxiField(v.grid, v.t, zero, v.v_phi, zero)
    return meridional, swirl


# --- stencils -------------------------------------------------------------

def _with_axis_ghost(a: np.ndarray, parity: str | None) -> np.ndarray | None:
    if parity is None:
        return None
    sign = -1.0 if parity == "odd" else 1.0
    return sign * a[1]


def ddrho(a: np.ndarray, grid: Grid2D, parity: str | None = None) -> np.ndarray:
    """Centered d/drho; ghost reflection on the axis, one-sided at the wall."""
    h = grid.d_rho
    out = np.empty_like(a, dtype=float)
    out[1:-1] = (a[2:] - a[:-2]) / (2 * h)
    ghost = _with_axis_ghost(a, parity)
    if ghost is None:
        out[0] = (-3 * a[0] + 4 * a[1] - a[2]) / (2 * h)
    else:
        out[0] = (a[1] - ghost) / (2 * h)
    out[-1] = (3 * a[-1] - 4 * a[-2] + a[-3]) / (2 * h)
    return out


def d2rho(a: np.ndarray, grid: Grid2D, parity: str | None = None) -> np.ndarray:
    h2 = grid.d_rho ** 2
    out = np.empty_like(a, dtype=float)
    out[1:-1] = (a[2:] - 2 * a[1:-1] + a[:-2]) / h2
    ghost = _with_axis_ghost(a, parity)
    if ghost is None:
        out[0] = (2 * a[0] - 5 * a[1] + 4 * a[2] - a[3]) / h2
    else:
        out[0] = (a[1] - 2 * a[0] + ghost) / h2
    out[-1] = (2 * a[-1] - 5 * a[-2] + 4 * a[-3] - a[-4]) / h2
    return out


def ddz(a: np.ndarray, grid: Grid2D) -> np.ndarray:
    h = grid.d_z
    if grid.z_periodic:
        return (np.roll(a, -1, axis=1) - np.roll(a, 1, axis=1)) / (2 * h)
    out = np.empty_like(a, dtype=float)
    out[:, 1:-1] = (a[:, 2:] - a[:, :-2]) / (2 * h)
    out[:, 0] = (-3 * a[:, 0] + 4 * a[:, 1] - a[:, 2]) / (2 * h)
    out[:, -1] = (3 * a[:, -1] - 4 * a[:, -2] + a[:, -3]) / (2 * h)
    return out


def d2z(a: np.ndarray, grid: Grid2D) -> np.ndarray:
    h2 = grid.d_z ** 2
    if grid.z_periodic:
        return (np.roll(a, -1, axis=1) - 2 * a + np.roll(a, 1, axis=1)) / h2
    out = np.empty_like(a, dtype=float)
    out[:, 1:-1] = (a[:, 2:] - 2 * a[:, 1:-1] + a[:, :-2]) / h2
    out[:, 0] = (2 * a[:, 0] - 5 * a[:, 1] + 4 * a[:, 2] - a[:, 3]) / h2
    out[:, -1] = (2 * a[:, -1] - 5 * a[:, -2] + 4 * a[:, -3] - a[:, -4]) / h2
    return out


def _over_rho(a: np.ndarray, grid: Grid2D, axis_value: np.ndarray) -> np.ndarray:
    out = np.empty_like(a, dtype=float)
    out[1:] = a[1:] / grid.rho[1:, None]
    out[0] = axis_value
    return out


def swirl_operator(f: ScalarField2D, axis_tol: float = 1e-12) -> ScalarField2D:
    """Discrete ``Laplacian(f) - (2/rho) df/drho = f_rr - f_r/rho + f_zz``.

    The axis row is returned as zero (``f`` is even and vanishes there, so
    the operator's limit on the axis is zero).
    """
    a = f.values
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a[0]).max() > axis_tol * scale:
        raise AxisRegularityError("f = rho * v_phi must vanish on the axis")
    grid = f.grid
    rho = grid.rho[:, None]
    out = np.zeros(grid.shape)
    out[1:] = (d2rho(a, grid, "even") - ddrho(a, grid, "even") / np.where(rho > 0, rho, 1.0) + d2z(a, grid))[1:]
    return ScalarField2D(grid, f.t, out)


def divergence(v: AxiField) -> np.ndarray:
    """``(1/rho) d(rho v_rho)/drho + dv_z/dz``; axis row uses ``2 dv_rho/drho``."""
    grid = v.grid
    flux = grid.rho[:, None] * v.v_rho
    d = ddrho(flux, grid, "even")
    radial = _over_rho(d, grid, 2.0 * ddrho(v.v_rho, grid, "odd")[0])
    return radial + ddz(v.v_z, grid)


def gradient_squared(v: AxiField) -> np.ndarray:
    """Cartesian ``|grad v|^2`` of an axisymmetric field including metric terms."""
    grid = v.grid
    total = np.zeros(grid.shape)
    for comp, parity in ((v.v_rho, "odd"), (v.v_phi, "odd"), (v.v_z, "even")):
        total += ddrho(comp, grid, parity) ** 2 + ddz(comp, grid) ** 2
    for comp in (v.v_rho, v.v_phi):
        ratio = _over_rho(comp, grid, ddrho(comp, grid, "odd")[0])
        total += ratio**2
    return total


def speed(v: AxiField, meridional_only: bool = False) -> np.ndarray:
    s = v.v_rho**2 + v.v_z**2
    if not meridional_only:
        s = s + v.v_phi**2
    return np.sqrt(s)


# --- quadrature -------------------------------------------------------------

def interval_weights(nodes: np.ndarray, a: float, b: float) -> np.ndarray:
    """Weights integrating the piecewise-linear interpolant over ``[a, b]``.

    Equals the trapezoidal rule when ``a`` and ``b`` are nodes.  Parts of
    ``[a, b]`` outside ``[nodes[0], nodes[-1]]`` contribute nothing.
    """
    x = np.asarray(nodes, dtype=float)
    w = np.zeros(x.size)
    if b <= a or x.size < 2:
        return w
    left, right = x[:-1], x[1:]
    h = right - left
    lo = np.clip(a, left, right)
    hi = np.clip(b, left, right)
    active = hi > lo
    wl = ((right - lo) ** 2 - (right - hi) ** 2) / (2 * h)
    wr = ((hi - left) ** 2 - (lo - left) ** 2) / (2 * h)
    wl[~active] = 0.0
    wr[~active] = 0.0
    w[:-1] += wl
    w[1:] += wr
    return w


def _check_range(lo, hi, lo_ok, hi_ok, what, allow_truncate):
    slack = 1e-12 * max(1.0, abs(lo_ok), abs(hi_ok))
    if lo < lo_ok - slack or hi > hi_ok + slack:
        if not allow_truncate:
            raise DomainError(f"{what} interval [{lo}, {hi}] leaves the grid range [{lo_ok}, {hi_ok}]")
    return max(lo, lo_ok), min(hi, hi_ok)


@lru_cache(maxsize=256)
def _cylinder_weights_cached(grid: Grid2D, b: float, r: float, allow_truncate: bool) -> np.ndarray:
    _, r_hi = _check_range(0.0, r, 0.0, grid.rho_max, "radial", allow_truncate)
    z_lo, z_hi = _check_range(b - r, b + r, grid.z_min, grid.z_max, "axial", allow_truncate)
    rho = grid.rho
    wr = interval_weights(rho, 0.0, r_hi) * rho * 2.0 * np.pi
    if grid.z_periodic:
        znodes = np.append(grid.z, grid.z_max)
        wz = interval_weights(znodes, z_lo, z_hi)
        wz[0] += wz[-1]
        wz = wz[:-1]
    else:
        wz = interval_weights(grid.z, z_lo, z_hi)
    w = np.outer(wr, wz)
    w.setflags(write=False)
    return w


def cylinder_weights(grid: Grid2D, b: float, r: float, allow_truncate: bool = False) -> np.ndarray:
    """Quadrature weights (including ``2 pi rho``) for the spatial cylinder ``C(b e3, r)``."""
    if not r > 0:
        raise ValueError("cylinder radius must be positive")
    return _cylinder_weights_cached(grid, float(b), float(r), bool(allow_truncate))


@lru_cache(maxsize=64)
def _domain_weights_cached(grid: Grid2D) -> np.ndarray:
    rho = grid.rho
    wr = interval_weights(rho, 0.0, grid.rho_max) * rho * 2.0 * np.pi
    if grid.z_periodic:
        wz = np.full(grid.n_z, grid.d_z)
    else:
        wz = interval_weights(grid.z, grid.z_min, grid.z_max)
    w = np.outer(wr, wz)
    w.setflags(write=False)
    return w


def domain_weights(grid: Grid2D) -> np.ndarray:
    """Quadrature weights for the whole sampled cylinder."""
    return _domain_weights_cached(grid)


def integrate_over_cylinder(field, grid: Grid2D | None = None, b: float = 0.0, r: float = 1.0,
                            p: float = 1.0, allow_truncate: bool = False) -> float:
    """``int_{C(b e3, r)} |field|^p dx`` by rho-weighted trapezoidal quadrature.

    ``field`` is a :class:`ScalarField2D` or a bare array together with ``grid``.
    """
    if isinstance(field, ScalarField2D):
        grid, values = field.grid, field.values
    else:
        if grid is None:
            raise ValueError("a bare array needs its grid")
        values = np.asarray(field, dtype=float)
    if p < 1:
        raise ValueError("exponent p must be >= 1")
    w = cylinder_weights(grid, b, r, allow_truncate)
    a = np.abs(values)
    if p != 1:
        a = a**p
    return float(np.sum(w * a))
