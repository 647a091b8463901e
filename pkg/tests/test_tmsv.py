import io
import math

import numpy as np
import pytest

from snwitness.errors import BadParameter
from snwitness.operators import DiagonalMixedState, expectation_mixed, sinc, tmsv_gamma
from snwitness.schmidt_number import f2_gamma
from snwitness.tmsv import (
    Scenario,
    db_to_epsilon,
    epsilon_to_db,
    expectation_closed_form,
    f2_matched,
    margin_curve,
    threshold,
    threshold_scan,
)


def test_closed_form_zero_angle_is_one():
    for eps in (0.2, 1 / 3, 0.82):
        assert np.isclose(expectation_closed_form(eps, 0.0), 1.0, atol=1e-12)


def test_closed_form_full_randomization():
    assert np.isclose(expectation_closed_form(1 / 3, math.pi), 0.8, atol=1e-12)


def test_closed_form_direct_sum_cross_check():
    # independent route: raw double sum over the truncated gamma matrices
    eps, cutoff = 1 / 3, 100
    for deg in (17.0, 45.0, 90.0, 133.0):
        x = math.radians(deg)
        g = tmsv_gamma(eps, x, cutoff).gamma.real
        direct = float(np.sum(g * g))  # Tr(gamma^2), both factors carry sinc
        assert abs(expectation_closed_form(eps, x) - direct) < 1e-6


def test_closed_form_matches_expectation_mixed():
    eps, cutoff = 0.82, 100
    for deg in (1.0, 30.0, 90.0, 179.0):
        x = math.radians(deg)
        rho = DiagonalMixedState.tmsv_phase_randomized(eps, x, cutoff)
        mixed = expectation_mixed(tmsv_gamma(eps, x, cutoff), rho)
        assert abs(expectation_closed_form(eps, x) - mixed) < 1e-6


def test_closed_form_rejects_insufficient_kmax():
    with pytest.raises(BadParameter):
        expectation_closed_form(0.99, 0.3, k_max=10)


def test_f2_matched_limits():
    eps = 1 / 3
    assert np.isclose(f2_matched(eps, 0.0), 1 - eps**4, atol=1e-12)
    assert np.isclose(f2_matched(eps, math.pi), 1 - eps**2, atol=1e-12)


def test_f2_matched_cross_validates_against_gamma():
    for eps in (1 / 3, 0.82):
        for deg in (5.0, 25.0, 60.0, 120.0, 179.0):
            x = math.radians(deg)
            a = f2_matched(eps, x)
            b = f2_gamma(tmsv_gamma(eps, x, 100))
            assert abs(a - b) < 1e-10


def test_margin_curve_matched():
    curve = margin_curve(Scenario(epsilon=1 / 3, r=1), [10.0, 170.0])
    assert curve.margin[0] > 0
    assert curve.margin[1] < 0
    assert np.allclose(curve.margin, curve.expectation - curve.f_r)


def test_margin_small_angle_limit():
    for eps in (1 / 3, 0.82):
        for r in (1, 2, 3):
            s = Scenario(epsilon=eps, r=r)
            curve = margin_curve(s, [0.1])
            assert curve.margin[0] > 0
            # the pure-state limit of the margin is eps^(2r)
            assert abs(curve.margin[0] - eps ** (2 * r)) < 0.05 * eps ** (2 * r) + 1e-6


def test_margin_at_full_randomization_nonpositive():
    for eps in (1 / 3, 0.82):
        for kind in ("matched", "flat_sinc"):
            curve = margin_curve(Scenario(epsilon=eps, operator_kind=kind, r=1), [180.0])
            assert curve.margin[0] <= 0.0


def test_margin_curve_validation():
    s = Scenario(epsilon=0.5, r=1)
    with pytest.raises(BadParameter):
        margin_curve(s, [0.0, 10.0])
    with pytest.raises(BadParameter):
        margin_curve(s, [10.0, 5.0])
    with pytest.raises(BadParameter):
        margin_curve(s, [10.0, 190.0])


def test_margin_curve_csv_format():
    curve = margin_curve(Scenario(epsilon=0.5, r=1), [30.0, 60.0])
    buf = io.StringIO()
    curve.to_csv(buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "delta_phi_deg,expectation,f_r,margin"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert float(first[0]) == 30.0
    # 12 significant digits round-trip the margin
    assert abs(float(first[3]) - curve.margin[0]) <= 1e-12 * max(1.0, abs(curve.margin[0]))


def test_threshold_ordering():
    s = Scenario(epsilon=1 / 3)
    t1 = threshold(s, 1, coarse_step_deg=2.0, refine_tol_deg=0.1)
    t2 = threshold(s, 2, coarse_step_deg=2.0, refine_tol_deg=0.1)
    assert t2 <= t1


def test_threshold_scan_reports_crossings():
    res = threshold_scan(Scenario(epsilon=1 / 3, r=1), coarse_step_deg=2.0, refine_tol_deg=0.1)
    assert len(res.crossings_deg) == 1
    assert abs(res.crossings_deg[0] - res.threshold_deg) < 1e-12
    assert not res.approximate_f_r


def test_threshold_never_negative_returns_180():
    # tiny randomization window over the whole scan: margin stays positive
    s = Scenario(epsilon=0.9, operator_kind="flat_sinc", cutoff=40, r=1)
    res = threshold_scan(s, coarse_step_deg=45.0, refine_tol_deg=1.0)
    assert res.threshold_deg in (180.0,) or res.threshold_deg > 150.0


def test_threshold_never_positive_returns_0():
    # r = 2 against the flat-sinc operator at weak squeezing never detects
    s = Scenario(epsilon=0.05, operator_kind="flat_sinc", cutoff=30, r=2)
    res = threshold_scan(s, coarse_step_deg=30.0, refine_tol_deg=1.0)
    assert res.threshold_deg == 0.0


def test_db_conversions():
    assert abs(db_to_epsilon(3.0) - 1 / 3) < 2e-3
    assert abs(db_to_epsilon(10.0) - 9 / 11) < 1e-12
    assert abs(db_to_epsilon(10.0) - 0.82) < 3e-3
    assert db_to_epsilon(0.0) == 0.0
    for eps in np.linspace(0.01, 0.98, 20):
        assert abs(db_to_epsilon(epsilon_to_db(eps)) - eps) < 1e-12


def test_db_rejects_negative():
    with pytest.raises(BadParameter):
        db_to_epsilon(-1.0)
    with pytest.raises(BadParameter):
        epsilon_to_db(1.0)


def test_scenario_validation():
    with pytest.raises(BadParameter):
        Scenario(epsilon=0.0)
    with pytest.raises(BadParameter):
        Scenario(epsilon=0.5, operator_kind="other")
    with pytest.raises(BadParameter):
        Scenario(epsilon=0.5, cutoff=1, r=2)


def test_sinc_array_matches_scalar():
    xs = np.array([0.0, 1e-10, 0.5, np.pi])
    arr = sinc(xs)
    for x, v in zip(xs, arr):
        assert np.isclose(sinc(float(x)), v, atol=1e-15)
