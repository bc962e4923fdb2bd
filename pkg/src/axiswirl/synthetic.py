"""Trajectories sampled from closed-form fields, for diagnostics testing."""
from __future__ import annotations

from typing import Callable

import numpy as np

from .fields import AxiField, Grid2D, ScalarField2D
from .solver import Snapshot, Trajectory

__all__ = ["sample_trajectory", "self_similar_profile", "self_similar_trajectory"]


def sample_trajectory(velocity: Callable, pressure: Callable | None, grid: Grid2D, times,
                      provenance: dict | None = None) -> Trajectory:
    """``velocity(R, Z, t) -> (v_rho, v_phi, v_z)`` and ``pressure(R, Z, t) -> q`` on the grid."""
    R, Z = grid.mesh()
    snaps = []
    times = np.asarray(times, dtype=float)
    for t in times:
        vr, vp, vz = (np.broadcast_to(np.asarray(c, dtype=float), grid.shape) for c in velocity(R, Z, t))
        q = np.zeros(grid.shape) if pressure is None else np.broadcast_to(pressure(R, Z, t), grid.shape)
        snaps.append(Snapshot(AxiField(grid, float(t), vr, vp, vz), ScalarField2D(grid, float(t), q)))
    dt = float(times[1] - times[0]) if len(times) > 1 else 0.0
    return Trajectory(tuple(snaps), dt, provenance or {"source": "synthetic"})


def self_similar_profile(xr, xz, swirl: float = 0.5):
    """Profile ``V`` from the streamfunction ``rho^2 exp(-|xi|^2)/2`` plus swirl.

    ``|V|`` peaks on the axis at the origin with value 1, so a grid node
    always carries the peak.
    """
    g = np.exp(-(xr**2 + xz**2))
    return xr * xz * g, swirl * xr * g, (1 - xr**2) * g


def self_similar_trajectory(grid: Grid2D, times, perturbation: float = 0.3, swirl: float = 0.5) -> Trajectory:
    """``v = (-t)^(-1/2) V(x/sqrt(-t)) + w`` with ``w_phi = perturbation rho exp(-|x|^2/4)``.

    ``w`` vanishes on the axis so the peak amplitude is exactly ``(-t)^(-1/2)``;
    under the zoom ``lambda v(lambda y, lambda^2 s)`` it shrinks like ``lambda^2``.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times >= 0):
        raise ValueError("self-similar samples need t < 0")

    def velocity(R, Z, t):
        a = np.sqrt(-t)
        vr, vp, vz = self_similar_profile(R / a, Z / a, swirl)
        w = perturbation * R * np.exp(-(R**2 + Z**2) / 4)
        return vr / a, vp / a + w, vz / a

    def pressure(R, Z, t):
        # self-similar pressure scaling with a smooth bounded profile
        return np.exp(-(R**2 + Z**2) / (-t)) / (-t)

    return sample_trajectory(velocity, pressure, grid, times,
                             {"source": "self-similar", "perturbation": perturbation, "swirl": swirl})
