from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from yamabelab.geometry import (
    curvature_route_gap,
    geometry_samples,
    make_constant_example,
    potential,
    route_gaps,
    scalar_curvature_direct,
    scalar_curvature_warped,
    soliton_range_check,
)
from yamabelab.integrator import IntegrationOptions, Termination, integrate, line_from_asymptote
from yamabelab.soliton_ode import DomainError, SolitonParams, SolitonState, rho_second


@pytest.fixture(scope="module")
def linear():
    # rho = r/2 + 1 exactly; F = r^2/4 + r with F(0) = 0
    p = SolitonParams(4, -0.5, 1.5)
    return integrate(p, SolitonState(0.0, 1.0, 0.5), opts=IntegrationOptions(r_span=10.0))


def test_constant_example_potential_is_r():
    t = make_constant_example(3, -1.0, -1.0)
    F = potential(t, 0.0)
    np.testing.assert_allclose(F[:, 1], t.r, atol=1e-13)


def test_constant_example_shape():
    t = make_constant_example(3, -4.0, -1.0, -2.0, 2.0, 41)
    assert len(t) == 41
    assert np.all(t.rho == 0.5)
    assert t.termination_fwd == t.termination_bwd == Termination.WINDOW_END


@pytest.mark.parametrize("lam,rbar", [(-1.0, 1.0), (1.0, -1.0), (-1.0, 0.0)])
def test_constant_example_sign_guard(lam, rbar):
    with pytest.raises(ValueError):
        make_constant_example(3, lam, rbar)


def test_potential_exact_on_linear_warp(linear):
    F = potential(linear, 0.0)
    r = F[:, 0]
    np.testing.assert_allclose(F[:, 1], r * r / 4 + r, rtol=1e-9, atol=1e-9)


def test_potential_reference_between_samples(linear):
    r_ref = 0.5 * (linear.r[3] + linear.r[4])
    F = potential(linear, r_ref, F_ref=2.0)
    r = F[:, 0]
    want = r * r / 4 + r - (r_ref * r_ref / 4 + r_ref) + 2.0
    np.testing.assert_allclose(F[:, 1], want, rtol=1e-9, atol=1e-9)


def test_potential_rejects_reference_outside(linear):
    with pytest.raises(ValueError):
        potential(linear, linear.r_max + 1.0)


def test_potential_derivative_is_warp():
    p = SolitonParams(3, -1.0, -1.0)
    t = line_from_asymptote(p, True, 2.0).restricted(-10.0, 3.0).resample(1e-3)
    F = potential(t, 0.0)
    dF = np.gradient(F[:, 1], F[:, 0], edge_order=2)
    inner = slice(2, -2)
    np.testing.assert_allclose(dF[inner], t.rho[inner], atol=1e-6)


def test_potential_fourth_order():
    # halving the spacing should cut the error by about 16
    p = SolitonParams(3, -1.0, -1.0)
    base = line_from_asymptote(p, True, 2.0).restricted(-2.0, 2.0)
    fine = potential(base.resample(1e-3), -2.0)[-1, 1]
    errs = [abs(potential(base.resample(h), -2.0)[-1, 1] - fine) for h in (0.2, 0.1)]
    assert errs[0] / errs[1] > 10


def test_warped_route_needs_positive_warp():
    with pytest.raises(DomainError):
        scalar_curvature_warped(SolitonParams(3, -1.0, 1.0), 0.0, 1.0, 0.0)


@given(st.integers(3, 8), st.floats(-5.0, -0.1), st.floats(-5.0, 5.0),
       st.floats(0.05, 20.0), st.floats(-5.0, 5.0))
@settings(max_examples=200, deadline=None)
def test_routes_agree_on_solutions(n, lam, rbar, rho, drho):
    p = SolitonParams(n, lam, rbar)
    dd = rho_second(p, rho, drho)
    rd = scalar_curvature_direct(drho, lam)
    rw = scalar_curvature_warped(p, rho, drho, dd)
    big = max(abs(rbar), (n - 1) * (n - 2) * drho * drho, abs(2 * (n - 1) * rho * dd), rho * rho * abs(rd))
    assert abs(rd - rw) <= 8 * np.finfo(float).eps * big / (rho * rho)


def test_route_gap_within_bound_on_line():
    p = SolitonParams(4, -1.0, 0.0)
    t = line_from_asymptote(p, True, 1.0)
    worst, _ = curvature_route_gap(t, 1e-10, 1e-12)
    assert worst <= 20
    g = route_gaps(t)
    assert g.shape == (len(t), 4)


def test_geometry_samples(linear):
    gs = geometry_samples(linear)
    assert len(gs) == len(linear)
    mid = gs[len(gs) // 2]
    assert mid.R_direct == pytest.approx(mid.R_warped, abs=1e-9)
    assert mid.R_direct == pytest.approx(0.0, abs=1e-9)


def test_direct_route_examples():
    assert scalar_curvature_direct(0.0, -1.0) == -1.0
    assert scalar_curvature_direct(0.5, -1.0) == -0.5
    assert scalar_curvature_direct(1.0, -1.0) == 0.0


def test_warped_route_constant_example():
    assert scalar_curvature_warped(SolitonParams(3, -1.0, -1.0), 1.0, 0.0, 0.0) == -1.0


@given(st.integers(3, 8), st.floats(0.1, 10.0), st.floats(-3.0, 3.0), st.floats(-1e-3, 1e-3))
@settings(max_examples=100, deadline=None)
def test_perturbed_second_derivative_shifts_route(n, rho, drho, delta):
    p = SolitonParams(n, -1.0, -1.0)
    dd = rho_second(p, rho, drho)
    shift = scalar_curvature_warped(p, rho, drho, dd) - scalar_curvature_warped(p, rho, drho, dd + delta)
    assert shift == pytest.approx(2 * (n - 1) * delta / rho, rel=1e-6, abs=1e-12)


def test_potential_anchor_change_is_constant(linear):
    a = potential(linear, 0.0)[:, 1]
    b = potential(linear, linear.r_max)[:, 1]
    diff = a - b
    assert np.ptp(diff) <= 1e-12 * max(1.0, np.abs(a).max())


def test_potential_increasing():
    p = SolitonParams(4, -1.0, -1.0)
    t = line_from_asymptote(p, True, 2.0)
    F = potential(t, 0.0)[:, 1]
    assert np.all(np.diff(F) > 0)


def test_soliton_range_on_lines():
    p = SolitonParams(3, -1.0, -1.0)
    up = line_from_asymptote(p, True, 2.0)
    down = line_from_asymptote(p, False, 2.0).restricted(0.0)
    assert soliton_range_check(up, True).passed
    assert soliton_range_check(down, False).passed
    assert not soliton_range_check(up, False).passed
