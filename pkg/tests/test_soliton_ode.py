from __future__ import annotations

import math
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from yamabelab.soliton_ode import (
    DomainError,
    SolitonParams,
    SolitonState,
    eq1_residual,
    eq1_terms,
    eq2_residual,
    residual,
    rho_second,
    rho_third,
    scale_transform,
)


def exact_second(n, lam, rbar, rho, drho):
    # solve the warp equation for rho'' in exact arithmetic
    return (rbar - (n - 1) * (n - 2) * drho**2 - rho**2 * (drho + lam)) / (2 * (n - 1) * rho)


def exact_third(n, lam, rbar, rho, drho):
    dd = exact_second(n, lam, rbar, rho, drho)
    num = -2 * (n - 1) ** 2 * drho * dd - 2 * rho * drho * (drho + lam) - rho**2 * dd
    return num / (2 * (n - 1) * rho)


def test_rho_second_rational_oracle():
    p = SolitonParams(4, -2.0, -3.0)
    assert exact_second(4, Fr(-2), Fr(-3), Fr(2), Fr(1, 2)) == Fr(1, 8)
    assert rho_second(p, 2.0, 0.5) == 0.125


def test_rho_third_rational_oracle():
    p = SolitonParams(4, -2.0, -3.0)
    want = exact_third(4, Fr(-2), Fr(-3), Fr(2), Fr(1, 2))
    assert want == Fr(11, 96)
    assert rho_third(p, 2.0, 0.5, 0.125) == pytest.approx(float(want), rel=1e-15)


def test_fixed_warp_is_equilibrium():
    p = SolitonParams(3, -4.0, -1.0)
    assert p.fixed_warp == 0.5
    assert rho_second(p, 0.5, 0.0) == 0.0


def test_tip_slope_residual_vanishes_at_zero_curvature_term():
    # rho = r with n=3, rbar = 2: (n-1)(n-2) rho'^2 = rbar and rho'+lam = 0
    p = SolitonParams(3, -1.0, 2.0)
    for rho in (0.1, 1.0, 7.0):
        assert rho_second(p, rho, 1.0) == 0.0


@pytest.mark.parametrize("n,lam,rbar", [(2, -1.0, 0.0), (3.5, -1.0, 0.0), (3, 0.0, 0.0),
                                        (3, 1.0, 0.0)])
def test_params_rejected(n, lam, rbar):
    with pytest.raises(ValueError):
        SolitonParams(n, lam, rbar)


def test_permissive_allows_nonnegative_lambda():
    p = SolitonParams(3, 0.5, 1.0, permissive=True)
    assert not p.expanding
    assert p.fixed_warp == pytest.approx(math.sqrt(2.0))
    assert SolitonParams(3, 0.5, -1.0, permissive=True).fixed_warp is None


def test_state_rejects_negative_warp():
    with pytest.raises(ValueError):
        SolitonState(0.0, -1e-3, 0.0)
    assert SolitonState(0.0, 0.0, 1.0).is_tip


def test_domain_error_at_zero_warp():
    p = SolitonParams(3, -1.0, 1.0)
    with pytest.raises(DomainError):
        rho_second(p, 0.0, 1.0)


def test_eq1_terms_sum_to_residual():
    p = SolitonParams(5, -1.5, 0.7)
    terms = eq1_terms(p, 1.3, -0.4, 0.2)
    res = eq1_residual(p, 1.3, -0.4, 0.2)
    assert terms[-1] == -p.rbar
    assert math.isclose(sum(terms), res.eq1_res, rel_tol=1e-14, abs_tol=1e-15)
    assert res.scale >= max(abs(t) for t in terms)


params_st = st.builds(
    SolitonParams,
    n=st.integers(3, 9),
    lam=st.floats(-10.0, -0.01),
    rbar=st.floats(-10.0, 10.0),
)
warp_st = st.floats(0.01, 50.0)
slope_st = st.floats(-20.0, 20.0)


@given(params_st, warp_st, slope_st)
@settings(max_examples=200, deadline=None)
def test_rho_second_zeroes_both_residuals(p, rho, drho):
    dd = rho_second(p, rho, drho)
    ddd = rho_third(p, rho, drho, dd)
    res = residual(p, rho, drho, dd, ddd)
    assert res.relative <= 1e-12


@given(params_st, warp_st, slope_st, st.floats(0.05, 20.0))
@settings(max_examples=200, deadline=None)
def test_scaling_multiplies_residual_by_b4(p, rho, drho, b):
    dd = 0.3  # arbitrary, so the residual is generically nonzero
    src = eq1_residual(p, rho, drho, dd)
    q, s = scale_transform(p, SolitonState(1.0, rho, drho), b)
    img = eq1_residual(q, s.rho, s.drho, b**3 * dd)
    assert img.eq1_res == pytest.approx(b**4 * src.eq1_res, rel=1e-9, abs=1e-9 * img.scale)


@given(params_st, warp_st, slope_st, st.floats(0.05, 20.0))
@settings(max_examples=100, deadline=None)
def test_scaling_composes_to_identity(p, rho, drho, b):
    q, s = scale_transform(p, SolitonState(2.0, rho, drho), b)
    p2, s2 = scale_transform(q, s, 1.0 / b)
    assert p2.n == p.n
    assert p2.lam == pytest.approx(p.lam, rel=1e-12)
    assert p2.rbar == pytest.approx(p.rbar, rel=1e-12, abs=1e-12)
    assert (s2.r, s2.rho, s2.drho) == pytest.approx((2.0, rho, drho), rel=1e-12, abs=1e-12)


def test_scale_rejects_nonpositive_factor():
    p = SolitonParams(3, -1.0, -1.0)
    with pytest.raises(ValueError):
        scale_transform(p, SolitonState(0.0, 1.0, 0.0), 0.0)


def test_eq2_residual_detects_wrong_third_derivative():
    p = SolitonParams(4, -2.0, -3.0)
    good = eq2_residual(p, 2.0, 0.5, 0.125, 11 / 96)
    bad = eq2_residual(p, 2.0, 0.5, 0.125, 11 / 96 + 1e-3)
    assert abs(good.eq2_res) <= 1e-15
    assert abs(bad.eq2_res) == pytest.approx(2 * 3 * 2.0 * 1e-3, rel=1e-9)
