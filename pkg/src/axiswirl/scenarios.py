"""Initial conditions and body forcings for the swirl/vorticity solver.

Closed-form fields (the manufactured solution and the ramped swirl target)
are written once in sympy; their forcings are derived symbolically and
compiled with ``lambdify``.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np
import sympy as sp

from .fields import Grid2D

__all__ = [
    "INITIAL_CONDITIONS",
    "FORCINGS",
    "resolve_params",
    "initial_condition",
    "make_forcing",
    "manufactured_exact",
    "ramped_target",
]

# name -> default parameters; unknown keys are rejected
INITIAL_CONDITIONS: dict[str, dict[str, float]] = {
    "zero": {},
    "rigid_rotation": {"omega": 1.0},
    "decaying_vortex": {"amplitude": 1.0, "width": 0.3, "vorticity": 0.0},
    "random_swirl": {"amplitude": 1.0, "modes": 4, "vorticity": 0.5},
    "manufactured": {"amplitude": 1.0},
    "ramped_swirl": {"amplitude": 2.0, "l0": 0.4, "t_collapse": 0.5},
}
FORCINGS = ("manufactured", "ramped_swirl")

_r, _z, _t = sp.symbols("rho z t", real=True)


def resolve_params(name: str, params) -> dict[str, float]:
    if name not in INITIAL_CONDITIONS:
        raise ValueError(f"unknown initial condition {name!r}; choose from {sorted(INITIAL_CONDITIONS)}")
    out = dict(INITIAL_CONDITIONS[name])
    for key, value in dict(params or {}).items():
        if key not in out:
            raise ValueError(f"initial condition {name!r} takes no parameter {key!r}")
        out[key] = float(value)
    return out


def _swirl_op(f):
    return sp.diff(f, _r, 2) - sp.diff(f, _r) / _r + sp.diff(f, _z, 2)


def _stream_op(psi):
    return sp.diff(psi, _r, 2) - sp.diff(psi, _r) / _r + sp.diff(psi, _z, 2)


def _compile(expr) -> Callable:
    fn = sp.lambdify((_r, _z, _t), expr, "numpy")

    def evaluate(R, Z, t):
        out = np.zeros(np.broadcast(R, Z).shape)
        pos = R > 0
        out[pos] = np.broadcast_to(fn(R[pos], Z[pos], float(t)), out[pos].shape)
        return out

    return evaluate


@lru_cache(maxsize=8)
def manufactured_exact(amplitude: float = 1.0) -> dict[str, Callable]:
    """Exact fields and forcings on ``rho <= 1`` with ``2 pi``-periodic ``z``.

    ``f = A e^-t rho^2 (1-rho^2)^2 (1 + sin(z)/2)`` and
    ``psi = (A/2) e^-t rho^2 (1-rho^2)^3 cos z``, so that ``f``, ``psi`` and
    ``omega`` all vanish on the wall ``rho = 1``.
    """
    A = sp.nsimplify(amplitude)
    f = A * sp.exp(-_t) * _r**2 * (1 - _r**2) ** 2 * (1 + sp.sin(_z) / 2)
    psi = A / 2 * sp.exp(-_t) * _r**2 * (1 - _r**2) ** 3 * sp.cos(_z)
    omega = sp.cancel(-_stream_op(psi) / _r)
    v_r = -sp.diff(psi, _z) / _r
    v_z = sp.diff(psi, _r) / _r
    force_f = sp.diff(f, _t) + v_r * sp.diff(f, _r) + v_z * sp.diff(f, _z) - _swirl_op(f)
    vec_lap = sp.diff(omega, _r, 2) + sp.diff(omega, _r) / _r + sp.diff(omega, _z, 2) - omega / _r**2
    force_w = (
        sp.diff(omega, _t)
        + v_r * sp.diff(omega, _r)
        + v_z * sp.diff(omega, _z)
        - v_r * omega / _r
        - sp.diff(f**2, _z) / _r**3
        - vec_lap
    )
    return {
        "f": _compile(f),
        "psi": _compile(psi),
        "omega": _compile(omega),
        "v_rho": _compile(v_r),
        "v_z": _compile(v_z),
        "force_f": _compile(force_f),
        "force_omega": _compile(force_w),
    }


@lru_cache(maxsize=8)
def ramped_target(amplitude: float, l0: float, t_collapse: float, rho_max: float) -> dict[str, Callable]:
    """Swirl target whose core width shrinks like ``L(t)^2 = l0^2 (1 - t/T)``.

    ``f* = A (rho/L)^2 exp(-(rho^2+z^2)/L^2) (1 - rho^2/R^2)^2``; its peak
    speed grows like ``1/L`` while ``rho |v_phi|`` stays bounded.  The swirl
    forcing makes ``f*`` exact for the linear part of the swirl equation,
    the vorticity forcing cancels the swirl-driven meridional source.
    """
    A, L0, T, R = (sp.nsimplify(v) for v in (amplitude, l0, t_collapse, rho_max))
    L2 = L0**2 * (1 - _t / T)
    f = A * _r**2 / L2 * sp.exp(-(_r**2 + _z**2) / L2) * (1 - _r**2 / R**2) ** 2
    force_f = sp.diff(f, _t) - _swirl_op(f)
    force_w = -sp.diff(f**2, _z) / _r**3
    return {"f": _compile(f), "force_f": _compile(force_f), "force_omega": _compile(force_w)}


def _bump(grid: Grid2D):
    R, Z = grid.mesh()
    return R, Z, grid.rho_max


def initial_condition(name: str, grid: Grid2D, params=None, seed: int = 0, t: float = 0.0):
    """Return ``(f, omega_phi)`` arrays for a named initial condition."""
    p = resolve_params(name, params)
    R, Z, Rw = _bump(grid)
    zeros = np.zeros(grid.shape)
    if name == "zero":
        return zeros, zeros.copy()
    if name == "rigid_rotation":
        return p["omega"] * R**2, zeros
    if name == "decaying_vortex":
        w2 = p["width"] ** 2
        core = np.exp(-(R**2 + Z**2) / w2) * (1 - (R / Rw) ** 2) ** 2
        f = p["amplitude"] * R**2 / w2 * core
        omega = p["vorticity"] * R * Z / w2 * core
        return f, omega
    if name == "random_swirl":
        return _random_swirl(grid, p, seed)
    if name == "manufactured":
        if grid.rho_max != 1.0 or not grid.z_periodic:
            raise ValueError("the manufactured solution lives on rho <= 1 with periodic z")
        ex = manufactured_exact(p["amplitude"])
        return ex["f"](R, Z, t), ex["omega"](R, Z, t)
    if name == "ramped_swirl":
        tgt = ramped_target(p["amplitude"], p["l0"], p["t_collapse"], grid.rho_max)
        return tgt["f"](R, Z, t), zeros
    raise AssertionError(name)


def _random_swirl(grid: Grid2D, p, seed):
    rng = np.random.default_rng(seed)
    R, Z, Rw = _bump(grid)
    modes = max(1, int(p["modes"]))
    span = grid.z_max - grid.z_min
    theta = (Z - grid.z_min) / span
    radial = sum(rng.normal() * (R / Rw) ** (2 * m) for m in range(3))
    axial = np.zeros(grid.shape)
    vort = np.zeros(grid.shape)
    for k in range(modes + 1):
        if grid.z_periodic:
            axial += rng.normal() * np.cos(2 * np.pi * k * theta) + rng.normal() * np.sin(2 * np.pi * k * theta)
            vort += rng.normal() * np.sin(2 * np.pi * k * theta + rng.uniform(0, 2 * np.pi))
        else:
            # cosines keep df/dz = 0 and sines keep omega = 0 on the mirror planes
            axial += rng.normal() * np.cos(np.pi * k * theta)
            vort += rng.normal() * np.sin(np.pi * (k + 1) * theta)
    f = (R / Rw) ** 2 * (1 - (R / Rw) ** 2) * (1 + 0.5 * radial) * axial
    peak = np.abs(f).max()
    f = p["amplitude"] * f / peak if peak > 0 else f
    omega = (R / Rw) * (1 - (R / Rw) ** 2) * vort
    peak = np.abs(omega).max()
    omega = p["vorticity"] * omega / peak if peak > 0 else omega
    return f, omega


def make_forcing(name: str | None, grid: Grid2D, params=None):
    """Return ``forcing(t) -> (F_f, F_omega)`` or ``None``."""
    if name is None or name == "none":
        return None
    if name not in FORCINGS:
        raise ValueError(f"unknown forcing {name!r}; choose from {list(FORCINGS)}")
    p = resolve_params(name, params)
    R, Z = grid.mesh()
    if name == "manufactured":
        ex = manufactured_exact(p["amplitude"])
    else:
        ex = ramped_target(p["amplitude"], p["l0"], p["t_collapse"], grid.rho_max)

    def forcing(t):
        return ex["force_f"](R, Z, t), ex["force_omega"](R, Z, t)

    return forcing
