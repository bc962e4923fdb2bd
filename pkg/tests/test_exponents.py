from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from axiswirl.exponents import (
    ExponentError,
    certificate_iteration,
    exponent_report,
    heuristic_bootstrap_check,
    holder_weights,
    is_admissible,
    is_feasible,
    mixed_norm_spec,
    quarter_parameters,
    scan_feasible_region,
    solve_holder_system,
)


def test_first_norm_choice():
    rep = exponent_report(F(7, 4), 10)
    assert rep.m == F(58, 7)
    assert rep.mu == F(1, 58)
    assert (rep.alpha1, rep.alpha2, rep.alpha3) == (F(1, 87), F(17, 29), F(35, 87))
    assert rep.alpha1 + rep.alpha2 + rep.alpha3 == 1
    assert not rep.mu_discrepancy
    assert rep.admissible_as3


def test_second_norm_choice_flags_mu():
    rep = exponent_report(4, F(12, 7))
    assert rep.m == F(10, 7)
    assert rep.mu == F(3, 5)
    assert rep.published_mu == F(3, 14)
    assert rep.mu_discrepancy
    assert any("3/14" in n for n in rep.notes)
    assert rep.to_dict()["mu_discrepancy"] is True


def test_l3_interpolates_itself():
    rep = exponent_report(3, 3)
    assert (rep.alpha1, rep.alpha2, rep.alpha3) == (0, 0, 1)
    assert rep.spec.kappa == 2
    assert heuristic_bootstrap_check((rep.alpha1, rep.alpha2, rep.alpha3), 3, 3)


def test_two_two_infeasible():
    assert not exponent_report(2, 2).feasible_e7


def test_degenerate_denominator():
    # 3/s + 2/l = 3/2 at s = 4, l = 8/3
    with pytest.raises(ExponentError):
        exponent_report(4, F(8, 3))
    with pytest.raises(ExponentError):
        solve_holder_system(4, F(8, 3))


def test_range_checks():
    with pytest.raises(ExponentError):
        mixed_norm_spec(F(1, 2), 3)
    with pytest.raises(ExponentError):
        exponent_report("abc", 3)


def test_float_inputs_are_exact():
    assert mixed_norm_spec(1.9, 4).s == F(19, 10)


@pytest.mark.parametrize(
    "x,y,expected",
    [
        (F(1, 4), F(10, 19), True),
        (F(1, 3), F(1, 3), True),
        (F(1, 2), F(1, 2), False),
    ],
)
def test_feasibility_points(x, y, expected):
    assert is_feasible(x, y) is expected


def test_scan_64():
    scan = scan_feasible_region(64)
    assert len(scan.points) == 64 * 64
    assert scan.feasible_points
    assert scan.has_l_below_two
    with pytest.raises(ExponentError):
        scan_feasible_region(4)


def test_bootstrap_check_cases():
    assert heuristic_bootstrap_check(holder_weights(F(7, 4), 10))
    assert sum(holder_weights(F(7, 4), 10)[:2]) == F(52, 87)
    # 3/s + 2/l > 2
    assert not heuristic_bootstrap_check(holder_weights(2, 2))
    with pytest.raises(ExponentError):
        heuristic_bootstrap_check((F(1, 2), F(1, 2), F(1, 2)))


fractions_unit = st.integers(min_value=1, max_value=64).map(lambda i: F(i, 64))


@given(fractions_unit, fractions_unit)
def test_closed_form_matches_elimination(x, y):
    if 3 * x + 2 * y == F(3, 2):
        return
    a = holder_weights(1 / x, 1 / y)
    assert a == solve_holder_system(1 / x, 1 / y)
    assert sum(a) == 1
    assert is_feasible(x, y) == (a[0] >= 0 and a[1] >= 0 and a[2] > F(1, 3))


@given(fractions_unit, fractions_unit)
def test_bootstrap_matches_alpha3(x, y):
    if 3 * x + 2 * y == F(3, 2):
        return
    a = holder_weights(1 / x, 1 / y)
    closes = heuristic_bootstrap_check(a)
    assert closes == (a[2] > F(1, 3))
    if 3 * x + 2 * y > 2:
        assert not closes


def test_admissibility_of_default_specs():
    assert is_admissible(F(7, 4), 10)
    assert is_admissible(4, F(12, 7))
    assert is_admissible(3, 3)


def test_certificate_geometric():
    tr = certificate_iteration(10.0, (1.0, 0.25, 1.0 / 64), 1.0, 40)
    assert tr.contraction == 0.5
    assert tr.sequence[:5] == (10.0, 6.0, 4.0, 3.0, 2.5)
    assert tr.bounded and tr.bound == 2.0
    assert abs(tr.sequence[-1] - 2.0) < 1e-10


def test_certificate_zero_additive_and_noncontracting():
    tr = certificate_iteration(5.0, (1.0, 0.25, 1.0 / 64), 0.0, 60)
    assert tr.sequence[-1] < 1e-15
    bad = certificate_iteration(1.0, (4.0, 0.5, 0.0), 1.0, 5)
    assert not bad.bounded and not bad.bound_defined
    with pytest.raises(ExponentError):
        certificate_iteration(-1.0, (1.0, 0.25, 0.0), 1.0, 3)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_quarter_conditions_contract(c):
    theta, eps = quarter_parameters(c)
    assert c * theta < 0.25
    assert c * eps / theta**2 < 0.25
    tr = certificate_iteration(1.0, (c, theta, eps), 0.3, 5)
    assert tr.contraction <= 0.5
    assert tr.bounded
