import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from axiswirl.fields import Grid2D, ScalarField2D, divergence
from axiswirl.scenarios import manufactured_exact
from axiswirl.solver import (
    Scenario,
    SolverError,
    StabilityError,
    initial_state,
    kinetic_energy,
    run,
    solve_streamfunction,
    stable_dt,
    step,
    velocity,
)


def _orders(errs):
    return [np.log2(a / b) for a, b in zip(errs, errs[1:])]


def test_zero_state_is_steady():
    g = Grid2D(1.0, -1, 1, 12, 24)
    sc = Scenario(g, "zero", dt=stable_dt(g), t_end=0.004, snapshot_interval=0.002)
    tr = run(sc)
    assert len(tr) == 3
    for s in tr.snapshots:
        assert not any(c.any() for c in s.velocity.components())
        assert not s.pressure.values.any()


@pytest.mark.parametrize("periodic", [True, False])
def test_rigid_rotation_steady(periodic):
    g = Grid2D(1.0, -1, 1, 16, 32, z_periodic=periodic)
    sc = Scenario(g, "rigid_rotation", {"omega": 3.0}, dt=stable_dt(g))
    s0 = initial_state(sc)
    s1 = step(s0, sc.dt)
    assert np.abs(s1.f.values - s0.f.values).max() < 1e-10
    assert np.abs(s1.omega_phi.values).max() < 1e-10


def test_streamfunction_trivial_and_rho2z():
    g = Grid2D(1.0, -1, 1, 16, 32)
    assert not solve_streamfunction(ScalarField2D(g, 0, np.zeros(g.shape))).values.any()
    with pytest.raises(SolverError):
        bad = np.zeros(g.shape)
        bad[0, 3] = 1.0
        solve_streamfunction(ScalarField2D(g, 0, bad))


def test_streamfunction_manufactured_order():
    ex = manufactured_exact(1.0)
    errs = []
    for n in (16, 32, 64):
        g = Grid2D(1.0, 0, 2 * np.pi, n, 2 * n, z_periodic=True)
        R, Z = g.mesh()
        psi = solve_streamfunction(ScalarField2D(g, 0, ex["omega"](R, Z, 0.0))).values
        errs.append(np.abs(psi - ex["psi"](R, Z, 0.0)).max())
    assert all(1.8 <= o <= 2.2 for o in _orders(errs))


def test_velocity_is_discretely_solenoidal():
    g = Grid2D(1.0, -1, 1, 20, 40, z_periodic=True)
    sc = Scenario(g, "random_swirl", {"vorticity": 5.0}, dt=stable_dt(g), seed=3)
    v = velocity(initial_state(sc))
    div = divergence(v)
    assert np.abs(div[1:-1]).max() < 1e-9 * max(1.0, np.abs(v.v_z).max() / g.d_rho)


def test_stability_guards():
    g = Grid2D(1.0, -1, 1, 16, 32)
    with pytest.raises(ValueError):
        Scenario(g, "zero", dt=1.0)
    sc = Scenario(g, "zero", dt=stable_dt(g))
    with pytest.raises(StabilityError):
        step(initial_state(sc), 1.0)
    with pytest.raises(ValueError):
        Scenario(g, "zero", params={"bogus": 1})
    with pytest.raises(ValueError):
        Scenario(g, "decaying_vortex", forcing="manufactured")


def test_no_swirl_stays_exactly_zero():
    g = Grid2D(1.0, -1, 1, 16, 32)
    sc = Scenario(g, "decaying_vortex", {"vorticity": 5.0}, dt=stable_dt(g), t_end=0.01,
                  snapshot_interval=0.005, no_swirl=True)
    tr = run(sc)
    assert all(not s.velocity.v_phi.any() for s in tr.snapshots)
    assert any(np.abs(s.velocity.v_z).max() > 0 for s in tr.snapshots)


def test_decaying_vortex_energy_monotone():
    g = Grid2D(1.0, -1, 1, 20, 40)
    sc = Scenario(g, "decaying_vortex", {"amplitude": 2.0, "vorticity": 5.0}, dt=stable_dt(g),
                  t_end=0.03, snapshot_interval=0.003)
    tr = run(sc)
    energy = [kinetic_energy(s.velocity) for s in tr.snapshots]
    assert np.all(np.diff(energy) <= 1e-12)
    assert tr.blowup is None
    times = tr.times
    assert np.allclose(np.diff(times), 0.003)


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10_000), st.booleans())
def test_swirl_maximum_principle(seed, periodic):
    g = Grid2D(1.0, -1, 1, 16, 32, z_periodic=periodic)
    sc = Scenario(g, "random_swirl", {"amplitude": 2.0, "vorticity": 10.0}, dt=stable_dt(g), seed=seed)
    s = initial_state(sc)
    m = np.abs(s.f.values).max()
    for _ in range(40):
        s = step(s, stable_dt(g, s.psi.values))
        m_new = np.abs(s.f.values).max()
        assert m_new <= m + 1e-8
        m = m_new
    assert s.monotone


def test_manufactured_swirl_order():
    ex = manufactured_exact(1.0)
    errs = []
    T = 0.02
    for n in (16, 32, 64):
        g = Grid2D(1.0, 0, 2 * np.pi, n, 2 * n, z_periodic=True)
        sc = Scenario(g, "manufactured", dt=stable_dt(g), t_end=T, snapshot_interval=T, forcing="manufactured")
        v = run(sc).snapshots[-1].velocity
        R, Z = g.mesh()
        errs.append(np.abs(v.v_phi * R - ex["f"](R, Z, T)).max())
    assert all(1.8 <= o <= 2.2 for o in _orders(errs)), errs


def test_blowup_threshold_stops_run():
    g = Grid2D(1.0, -1, 1, 16, 32)
    sc = Scenario(g, "rigid_rotation", {"omega": 2.0}, dt=stable_dt(g), t_end=0.004,
                  snapshot_interval=0.002, blowup_threshold=1.0)
    tr = run(sc)
    assert tr.blowup is not None and len(tr) == 2
    assert tr.blowup.last_state.t == pytest.approx(0.002)
