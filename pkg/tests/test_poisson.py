import numpy as np
import pytest

from axiswirl.fields import Grid2D
from axiswirl.poisson import PoissonSolver


def _orders(errs):
    return [np.log2(a / b) for a, b in zip(errs, errs[1:])]


def test_stream_annihilates_rho2_z():
    g = Grid2D(1.0, -1.0, 1.0, 24, 40)
    R, Z = g.mesh()
    exact = R**2 * Z
    psi = PoissonSolver(g, "stream").solve(np.zeros(g.shape), wall=exact[-1], z_lo=exact[:, 0], z_hi=exact[:, -1])
    assert np.abs(psi - exact).max() < 1e-12


def test_stream_zero_rhs_gives_zero():
    g = Grid2D(1.0, 0.0, 2 * np.pi, 16, 16, z_periodic=True)
    assert not PoissonSolver(g, "stream").solve(np.zeros(g.shape)).any()


def test_stream_manufactured_second_order():
    errs = []
    for n in (16, 32, 64):
        g = Grid2D(1.0, 0.0, 2 * np.pi, n, 2 * n, z_periodic=True)
        R, Z = g.mesh()
        psi = R**2 * (1 - R) ** 2 * np.sin(Z)
        # psi_rr - psi_r/rho + psi_zz for rho^2 (1-rho)^2 sin z
        p = R**2 * (1 - R) ** 2
        p_r = 2 * R * (1 - R) ** 2 - 2 * R**2 * (1 - R)
        p_rr = 2 * (1 - R) ** 2 - 8 * R * (1 - R) + 2 * R**2
        rhs = (p_rr - np.divide(p_r, R, out=np.zeros_like(R), where=R > 0) - p) * np.sin(Z)
        errs.append(np.abs(PoissonSolver(g, "stream").solve(rhs) - psi).max())
    assert all(1.8 < o < 2.2 for o in _orders(errs))


@pytest.mark.parametrize("z_bc,periodic", [("periodic", True), ("neumann", False)])
def test_laplace_neumann_rigid_pressure(z_bc, periodic):
    g = Grid2D(1.5, -1.0, 1.0, 20, 20, z_periodic=periodic)
    R, _ = g.mesh()
    s = PoissonSolver(g, "laplace", "neumann", z_bc)
    q = s.solve(np.full(g.shape, 2.0), wall=1.5)
    assert np.abs(q - R**2 / 2).max() < 1e-11
    assert abs(s.compatibility_defect) < 1e-12
    s.solve(np.full(g.shape, 2.1), wall=1.5)
    assert s.compatibility_defect == pytest.approx(0.1, rel=1e-9)


def test_laplace_dirichlet_order():
    errs = []
    for n in (16, 32, 64):
        g = Grid2D(1.0, -np.pi / 2, np.pi / 2, n, 2 * n)
        R, Z = g.mesh()
        exact = np.cos(R**2) * np.cos(Z)
        lap = (-4 * np.sin(R**2) - 4 * R**2 * np.cos(R**2) - np.cos(R**2)) * np.cos(Z)
        q = PoissonSolver(g, "laplace", "dirichlet", "dirichlet").solve(lap, wall=exact[-1], z_lo=exact[:, 0], z_hi=exact[:, -1])
        errs.append(np.abs(q - exact).max())
    assert all(1.8 < o < 2.2 for o in _orders(errs))


def test_bad_setups():
    g = Grid2D(1.0, 0.0, 1.0, 8, 8)
    with pytest.raises(ValueError):
        PoissonSolver(g, "stream", "neumann")
    with pytest.raises(ValueError):
        PoissonSolver(g, "laplace", "dirichlet", "periodic")
    with pytest.raises(ValueError):
        PoissonSolver(g, "stream").solve(np.zeros((3, 3)))
