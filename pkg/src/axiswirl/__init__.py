"""Axisymmetric Navier-Stokes simulation and Type I blow-up diagnostics."""
from .exponents import exponent_report, mixed_norm_spec, scan_feasible_region
from .fields import AxiField, Grid2D, ParabolicCylinder, ScalarField2D
from .functionals import check_energy_inequality, compute_functionals
from .pressure import solve_pressure, split_pressure
from .rescaler import detect_peaks, verify_zoom, zoom
from .solver import Scenario, Trajectory, run

__version__ = "0.1.0"

__all__ = [
    "AxiField",
    "Grid2D",
    "ParabolicCylinder",
    "ScalarField2D",
    "Scenario",
    "Trajectory",
    "check_energy_inequality",
    "compute_functionals",
    "detect_peaks",
    "exponent_report",
    "mixed_norm_spec",
    "run",
    "scan_feasible_region",
    "solve_pressure",
    "split_pressure",
    "verify_zoom",
    "zoom",
]
