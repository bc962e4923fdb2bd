"""Direct solvers for the two axisymmetric elliptic problems used here.

``operator="stream"``
    ``psi_rr - psi_r/rho + psi_zz`` (Stokes streamfunction operator) in the
    form ``rho (psi_r/rho)_r``, ``psi = 0`` on the axis, Dirichlet data on
    the wall.
``operator="laplace"``
    ``q_rr + q_r/rho + q_zz`` in finite-volume form.  The axis node is an
    unknown (cell ``[0, h/2]``), the wall takes Neumann or Dirichlet data.

The ``z`` direction is diagonalized by a real FFT (periodic), a type-I sine
transform (Dirichlet) or a type-I cosine transform (homogeneous Neumann);
each mode is then a tridiagonal system in ``rho`` solved by a vectorized
Thomas sweep with factors precomputed at construction.
"""
from __future__ import annotations

import logging

import numpy as np
from scipy import fft as sfft

from .fields import Grid2D

__all__ = ["PoissonSolver"]

log = logging.getLogger(__name__)


class _TridiagonalFamily:
    """One tridiagonal system per column; ``lower``/``diag``/``upper`` are (n, K)."""

    def __init__(self, lower: np.ndarray, diag: np.ndarray, upper: np.ndarray):
        n = diag.shape[0]
        self.lower = lower
        self.cp = np.empty_like(diag)
        self.denom = np.empty_like(diag)
        self.denom[0] = diag[0]
        self.cp[0] = upper[0] / diag[0]
        for i in range(1, n):
            self.denom[i] = diag[i] - lower[i] * self.cp[i - 1]
            self.cp[i] = upper[i] / self.denom[i]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        n = rhs.shape[0]
        y = np.empty_like(rhs)
        y[0] = rhs[0] / self.denom[0]
        for i in range(1, n):
            y[i] = (rhs[i] - self.lower[i] * y[i - 1]) / self.denom[i]
        for i in range(n - 2, -1, -1):
            y[i] -= self.cp[i] * y[i + 1]
        return y


class PoissonSolver:
    """Factor once per grid and boundary setup, then call :meth:`solve`."""

    def __init__(self, grid: Grid2D, operator: str = "stream", wall: str = "dirichlet", z_bc: str | None = None):
        if operator not in ("stream", "laplace"):
            raise ValueError(f"unknown operator {operator!r}")
        if wall not in ("dirichlet", "neumann"):
            raise ValueError(f"unknown wall condition {wall!r}")
        if operator == "stream" and wall != "dirichlet":
            raise ValueError("the streamfunction solve takes Dirichlet wall data only")
        if z_bc is None:
            z_bc = "periodic" if grid.z_periodic else "dirichlet"
        if (z_bc == "periodic") != grid.z_periodic:
            raise ValueError("z boundary condition does not match the grid periodicity")
        if z_bc not in ("periodic", "dirichlet", "neumann"):
            raise ValueError(f"unknown z boundary condition {z_bc!r}")
        self.grid, self.operator, self.wall, self.z_bc = grid, operator, wall, z_bc
        self.compatibility_defect = 0.0

        h, hz = grid.d_rho, grid.d_z
        N = grid.n_rho
        nz = grid.n_z
        if z_bc == "periodic":
            k = np.arange(nz // 2 + 1)
            self._shift = -(2 - 2 * np.cos(2 * np.pi * k / nz)) / hz**2
        elif z_bc == "dirichlet":
            k = np.arange(1, nz)
            self._shift = -(2 - 2 * np.cos(np.pi * k / nz)) / hz**2
        else:
            k = np.arange(nz + 1)
            self._shift = -(2 - 2 * np.cos(np.pi * k / nz)) / hz**2
        K = self._shift.size

        rho = grid.rho
        if operator == "stream":
            i = np.arange(1, N, dtype=float)
            self._rows = slice(1, N)
            # rho d/drho((1/rho) d/drho): exact on rho^2 and rho^4
            lower = i / (i - 0.5) / h**2
            upper = i / (i + 0.5) / h**2
            diag = -(lower + upper)
            self._wall_coef = upper[-1]
            self.volumes = None
        else:
            last = N + 1 if wall == "neumann" else N
            self._rows = slice(0, last)
            half = rho[:-1] + h / 2  # rho_{i+1/2}
            vol = rho * h
            vol[0] = h * h / 8
            vol[N] = rho[N] * h / 2 - h * h / 8
            lower = np.zeros(last)
            upper = np.zeros(last)
            diag = np.zeros(last)
            for j in range(last):
                if j + 1 <= N:
                    upper[j] = half[j] / (vol[j] * h)
                    diag[j] -= upper[j]
                if j >= 1:
                    lower[j] = half[j - 1] / (vol[j] * h)
                    diag[j] -= lower[j]
            if wall == "dirichlet":
                self._wall_coef = upper[-1]
                upper[-1] = 0.0
            else:
                self._wall_coef = grid.rho_max / vol[N]
            self.volumes = vol[:last]
        lower = np.repeat(lower[:, None], K, axis=1)
        upper = np.repeat(upper[:, None], K, axis=1)
        upper[-1] = 0.0
        diag = diag[:, None] + self._shift[None, :]
        self._singular = operator == "laplace" and wall == "neumann" and z_bc != "dirichlet"
        if self._singular:
            # pin q on the axis for the mean mode; compatibility is enforced on the rhs
            diag[0, 0], upper[0, 0] = 1.0, 0.0
            lower[1, 0] = 0.0
        self._family = _TridiagonalFamily(lower, diag, upper)

    # -- transforms ---------------------------------------------------------
    def _forward(self, a: np.ndarray) -> np.ndarray:
        if self.z_bc == "periodic":
            return sfft.rfft(a, axis=1)
        if self.z_bc == "dirichlet":
            return sfft.dst(a[:, 1:-1], type=1, axis=1)
        return sfft.dct(a, type=1, axis=1)

    def _inverse(self, a: np.ndarray) -> np.ndarray:
        if self.z_bc == "periodic":
            return sfft.irfft(a, n=self.grid.n_z, axis=1)
        if self.z_bc == "dirichlet":
            return sfft.idst(a, type=1, axis=1)
        return sfft.idct(a, type=1, axis=1)

    def solve(self, rhs: np.ndarray, wall=0.0, z_lo=None, z_hi=None) -> np.ndarray:
        """Return the solution on the full grid, boundary nodes included.

        ``wall`` is Dirichlet data or, for a Neumann wall, the outward
        derivative ``dq/drho``; scalar or an array over ``z``.  ``z_lo`` and
        ``z_hi`` are rows over ``rho``: Dirichlet values for
        ``z_bc="dirichlet"``, the derivative ``dq/dz`` for ``z_bc="neumann"``.
        """
        grid = self.grid
        rhs = np.array(rhs, dtype=float)
        if rhs.shape != grid.shape:
            raise ValueError("rhs shape does not match grid")
        wall = np.broadcast_to(np.asarray(wall, dtype=float), (grid.nz_nodes,))
        out = np.zeros(grid.shape)
        if self.z_bc == "dirichlet":
            hz2 = grid.d_z**2
            if z_lo is not None:
                out[:, 0] = z_lo
                rhs[:, 1] -= out[:, 0] / hz2
            if z_hi is not None:
                out[:, -1] = z_hi
                rhs[:, -2] -= out[:, -1] / hz2
        elif self.z_bc == "neumann":
            # ghost node q_{-1} = q_1 - 2 hz g
            if z_lo is not None:
                rhs[:, 0] += 2 * np.asarray(z_lo, dtype=float) / grid.d_z
            if z_hi is not None:
                rhs[:, -1] -= 2 * np.asarray(z_hi, dtype=float) / grid.d_z
        rows = self._rows
        if self.operator == "stream" or self.wall == "dirichlet":
            out[-1, :] = wall
            if self.z_bc == "dirichlet":
                out[-1, 0] = wall[0] if z_lo is None else out[-1, 0]
                out[-1, -1] = wall[-1] if z_hi is None else out[-1, -1]
            rhs[rows.stop - 1] -= self._wall_coef * wall
        else:
            rhs[-1] -= self._wall_coef * wall
        if self.operator == "stream":
            rhs[0] = 0.0
        sub = rhs[rows]
        coeffs = self._forward(sub)
        if self._singular:
            mean_mode = coeffs[:, 0].real if np.iscomplexobj(coeffs) else coeffs[:, 0]
            defect = float(self.volumes @ mean_mode / self.volumes.sum())
            # per-node constant removed from the source
            self.compatibility_defect = defect / (grid.n_z if self.z_bc == "periodic" else 2 * grid.n_z)
            coeffs[:, 0] -= defect
            coeffs[0, 0] = 0.0
            if abs(defect) > 0:
                log.debug("projected Neumann rhs, mean-mode defect %.3e", defect)
        sol = self._family.solve(coeffs)
        values = self._inverse(sol)
        if self.z_bc == "dirichlet":
            out[rows, 1:-1] = values
        else:
            out[rows] = values
        if self.operator == "stream":
            out[0] = 0.0
        return out
