"""Geometric quantities of the warped product ``dr^2 + rho(r)^2 gbar``.

Scalar curvature comes out two ways: from the soliton equation along the
radial direction (``R = rho' + lam``) and from the warped-product identity

    rho^2 R = rbar - (n-1)(n-2) rho'^2 - 2(n-1) rho rho''.

The two agree exactly when ``rho''`` satisfies the warp equation, which makes
their difference a consistency check on any trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifier import VerificationReport
from .integrator import Termination, Trajectory
from .soliton_ode import DomainError, SolitonParams


@dataclass(frozen=True)
class GeometrySample:
    r: float
    warp: float
    F: float
    R_direct: float
    R_warped: float


def scalar_curvature_direct(drho: float, lam: float) -> float:
    return drho + lam


def scalar_curvature_warped(params: SolitonParams, rho: float, drho: float, ddrho: float) -> float:
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    n = params.n
    return (params.rbar - (n - 1) * (n - 2) * drho * drho - 2 * (n - 1) * rho * ddrho) / (rho * rho)


def potential(traj: Trajectory, r_ref: float, F_ref: float = 0.0) -> np.ndarray:
    """Antiderivative of the warp on the sample grid, anchored at F(r_ref) = F_ref.

    Each interval uses the end-point corrected trapezoid rule
    ``h/2 (rho_a + rho_b) + h^2/12 (rho'_a - rho'_b)``, exact for cubics, so
    the accumulated error is O(h^4).  ``r_ref`` between samples is handled
    by a partial interval with the same rule.  Returns an (N, 2) array of
    ``(r, F)``.
    """
    r, rho, drho = traj.r, traj.rho, traj.drho
    if not (r[0] <= r_ref <= r[-1]):
        raise ValueError(f"r_ref={r_ref} outside [{r[0]}, {r[-1]}]")
    h = np.diff(r)
    pieces = 0.5 * h * (rho[:-1] + rho[1:]) + h * h / 12.0 * (drho[:-1] - drho[1:])
    F = np.concatenate(([0.0], np.cumsum(pieces)))

    # value at r_ref from the interval that contains it
    j = int(np.searchsorted(r, r_ref, side="right")) - 1
    j = min(max(j, 0), len(r) - 2)
    if r_ref == r[j]:
        F_at = F[j]
    else:
        F_at = F[j] + _partial(r[j], r[j + 1], rho[j], rho[j + 1], drho[j], drho[j + 1], r_ref)
    return np.column_stack((r, F - F_at + F_ref))


def _partial(a, b, fa, fb, da, db, x):
    """Integral over [a, x] of the cubic Hermite interpolant on [a, b]."""
    h = b - a
    t = (x - a) / h
    # integrals over [0, t] of the Hermite basis functions
    i00 = t - t**3 + t**4 / 2
    i10 = t**2 / 2 - 2 * t**3 / 3 + t**4 / 4
    i01 = t**3 - t**4 / 2
    i11 = -t**3 / 3 + t**4 / 4
    return h * (fa * i00 + h * da * i10 + fb * i01 + h * db * i11)


def geometry_samples(traj: Trajectory, r_ref: float | None = None,
                     F_ref: float = 0.0) -> list[GeometrySample]:
    p = traj.params
    r_ref = traj.r_init if r_ref is None else r_ref
    F = potential(traj, r_ref, F_ref)[:, 1]
    out = []
    for (r, rho, drho, dd), f in zip(traj.samples, F):
        warped = scalar_curvature_warped(p, rho, drho, dd) if rho > 0 else math.nan
        out.append(GeometrySample(float(r), float(rho), float(f),
                                  scalar_curvature_direct(drho, p.lam), warped))
    return out


def route_gaps(traj: Trajectory) -> np.ndarray:
    """Per-sample ``(r, R_direct, |R_direct - R_warped|, rounding floor)``.

    The floor is the float64 unit roundoff times the largest summand of the
    warped-product numerator over ``rho^2``: no evaluation of ``R_warped`` from
    stored samples can be more accurate than that.  Samples with rho <= 0 are
    dropped.
    """
    p = traj.params
    n = p.n
    u = np.finfo(float).eps
    rows = []
    for r, rho, drho, dd in traj.samples:
        if not rho > 0:
            continue
        rd = scalar_curvature_direct(drho, p.lam)
        rw = scalar_curvature_warped(p, rho, drho, dd)
        big = max(abs(p.rbar), (n - 1) * (n - 2) * drho * drho, abs(2 * (n - 1) * rho * dd))
        rows.append((r, rd, abs(rd - rw), u * big / (rho * rho)))
    return np.array(rows, dtype=float).reshape(-1, 4)


def curvature_route_gap(traj: Trajectory, rtol: float, atol: float,
                        above_floor: bool = False) -> tuple[float, float]:
    """Worst ratio of |R_direct - R_warped| to ``rtol |R| + atol`` and where it occurs.

    With ``above_floor`` only samples whose rounding floor is below
    ``rtol |R| + atol`` count.
    """
    g = route_gaps(traj)
    if len(g) == 0:
        return 0.0, traj.r_init
    bound = rtol * np.abs(g[:, 1]) + atol
    ratio = g[:, 2] / bound
    if above_floor:
        ratio = np.where(g[:, 3] < bound, ratio, 0.0)
    i = int(np.argmax(ratio))
    return float(ratio[i]), float(g[i, 0])


def soliton_range_check(traj: Trajectory, increasing: bool,
                        end_tol: float = 1e-6) -> VerificationReport:
    """Scalar-curvature range along a line solution.

    ``increasing`` (rho' > 0): lam < R < 0 at every sample.  Otherwise
    R < lam at every sample and R -> lam at the forward end.
    """
    lam = traj.params.lam
    R = traj.drho + lam
    r = traj.r
    rep = VerificationReport("soliton-range")
    if increasing:
        lo, hi = int(np.argmin(R - lam)), int(np.argmax(R))
        rep.add("R > lambda", bool(R[lo] > lam), float(R[lo] - lam), float(r[lo]))
        rep.add("R < 0", bool(R[hi] < 0), float(R[hi]), float(r[hi]))
    else:
        hi = int(np.argmax(R))
        rep.add("R < lambda", bool(R[hi] < lam), float(R[hi] - lam), float(r[hi]))
        gap = abs(float(R[-1]) - lam)
        rep.add("R -> lambda at the forward end", gap <= end_tol, gap, float(r[-1]))
    return rep


def make_constant_example(n: int, lam: float, rbar: float,
                          r_lo: float = -10.0, r_hi: float = 10.0,
                          num: int = 201) -> Trajectory:
    """The R = lambda line solution: rho = sqrt(rbar/lam) everywhere."""
    if not lam < 0:
        raise ValueError(f"the constant example needs lambda < 0, got {lam}")
    if not rbar < 0:
        raise ValueError(f"the constant example needs rbar < 0, got {rbar}")
    if not r_lo < r_hi or num < 2:
        raise ValueError("need r_lo < r_hi and at least two samples")
    params = SolitonParams(n, lam, rbar)
    c = math.sqrt(rbar / lam)
    r = np.linspace(r_lo, r_hi, num)
    samples = np.column_stack((r, np.full(num, c), np.zeros(num), np.zeros(num)))
    return Trajectory(
        params=params,
        samples=samples,
        termination_fwd=Termination.WINDOW_END,
        termination_bwd=Termination.WINDOW_END,
        r_init=float(r[num // 2]),
    )
