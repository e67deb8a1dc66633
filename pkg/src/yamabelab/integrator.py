"""Adaptive Dormand-Prince 5(4) integration of the warp equation.

The first-order system is ``(rho, rho')`` with ``rho''`` from
:func:`rho_second`.  Backward runs integrate ``s = -(r - r0)`` forward, so a
single stepping loop serves both directions.  Each accepted step keeps the
4th-order continuous extension, which is what event location and
:meth:`Trajectory.evaluate` use.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .soliton_ode import DomainError, SolitonParams, SolitonState, rho_second, rho_third


class EventKind(str, enum.Enum):
    RHO_ZERO = "RhoZero"
    DRHO_ZERO = "DRhoZero"
    DDRHO_ZERO = "DDRhoZero"
    DRHO_PLUS_LAMBDA_ZERO = "DRhoPlusLambdaZero"
    BLOWUP = "Blowup"
    CONVERGED = "Converged"
    WINDOW_END = "WindowEnd"


ROOT_KINDS = (
    EventKind.RHO_ZERO,
    EventKind.DRHO_ZERO,
    EventKind.DDRHO_ZERO,
    EventKind.DRHO_PLUS_LAMBDA_ZERO,
)


class Termination(str, enum.Enum):
    WINDOW_END = "WindowEnd"
    RHO_ZERO = "RhoZero"
    BLOWUP = "Blowup"
    CONVERGED = "Converged"
    STEP_UNDERFLOW = "StepUnderflow"
    STEP_LIMIT = "StepLimit"
    NOT_INTEGRATED = "NotIntegrated"


FAILURES = (Termination.STEP_UNDERFLOW, Termination.STEP_LIMIT)


class IntegrationError(RuntimeError):
    """Integration could not proceed (step-size underflow)."""


class BracketError(ValueError):
    """Monitor has no sign change over the requested bracket."""


@dataclass(frozen=True)
class IntegrationOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    r_span: float = 100.0
    h_init: float = 1e-3
    h_max: float = 1.0
    blowup_threshold: float = 1e8
    converge_eps: float = 1e-8
    converge_window: float = 5.0
    root_tol: float = 1e-12
    # RhoZero fires when the linear time-to-zero of rho drops to this value
    tip_horizon: float = 1e-6
    max_steps: int = 2_000_000

    def __post_init__(self):
        positive = (
            "rtol", "atol", "r_span", "h_init", "h_max", "blowup_threshold",
            "converge_eps", "converge_window", "root_tol", "tip_horizon",
        )
        for name in positive:
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        if self.h_init > self.h_max:
            raise ValueError("h_init must not exceed h_max")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    def with_(self, **kw) -> "IntegrationOptions":
        return replace(self, **kw)


@dataclass(frozen=True)
class Event:
    kind: EventKind
    r: float
    state: SolitonState
    ddrho: float
    dddrho: float
    direction: int = 1

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "r": self.r,
            "rho": self.state.rho,
            "drho": self.state.drho,
            "ddrho": self.ddrho,
            "dddrho": self.dddrho,
            "direction": self.direction,
        }


@dataclass(frozen=True)
class _Segment:
    """Continuous extension of one accepted step, stored in r-order."""

    r_lo: float
    r_hi: float
    r0: float
    direction: int
    s0: float
    h: float
    coef: tuple  # 5 pairs (rho, drho)

    def __call__(self, r: float) -> tuple[float, float]:
        s = self.direction * (r - self.r0)
        th = (s - self.s0) / self.h
        th1 = 1.0 - th
        (a0, b0), (a1, b1), (a2, b2), (a3, b3), (a4, b4) = self.coef
        rho = a0 + th * (a1 + th1 * (a2 + th * (a3 + th1 * a4)))
        drho = b0 + th * (b1 + th1 * (b2 + th * (b3 + th1 * b4)))
        return rho, drho

    def shifted(self, dr: float) -> "_Segment":
        return replace(self, r_lo=self.r_lo + dr, r_hi=self.r_hi + dr, r0=self.r0 + dr)


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution with events and per-direction termination reasons.

    ``samples`` columns are ``r, rho, rho', rho''`` in increasing ``r``.
    Trajectories re-read from disk carry no dense output.
    """

    params: SolitonParams
    samples: np.ndarray
    events: tuple = ()
    termination_fwd: Termination = Termination.NOT_INTEGRATED
    termination_bwd: Termination = Termination.NOT_INTEGRATED
    r_init: float = 0.0
    asymptote_fwd: float | None = None
    asymptote_bwd: float | None = None
    segments: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError("samples must be an (N, 4) array of r, rho, drho, ddrho")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "_starts", [seg.r_lo for seg in self.segments])

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def r(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def rho(self) -> np.ndarray:
        return self.samples[:, 1]

    @property
    def drho(self) -> np.ndarray:
        return self.samples[:, 2]

    @property
    def ddrho(self) -> np.ndarray:
        return self.samples[:, 3]

    @property
    def has_dense(self) -> bool:
        return bool(self.segments)

    @property
    def r_min(self) -> float:
        return float(self.samples[0, 0])

    @property
    def r_max(self) -> float:
        return float(self.samples[-1, 0])

    def evaluate(self, r: float) -> tuple[float, float]:
        """Dense-output ``(rho, rho')`` at ``r``."""
        if not self.segments:
            raise ValueError("trajectory has no dense output")
        if not (self.r_min <= r <= self.r_max):
            raise ValueError(f"r={r} outside [{self.r_min}, {self.r_max}]")
        i = bisect.bisect_right(self._starts, r) - 1
        i = min(max(i, 0), len(self.segments) - 1)
        return self.segments[i](r)

    def state_at(self, r: float) -> SolitonState:
        rho, drho = self.evaluate(r)
        return SolitonState(r, rho, drho)

    def events_of(self, kind: EventKind) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    def asymptote(self, direction: int) -> float | None:
        return self.asymptote_fwd if direction > 0 else self.asymptote_bwd

    def termination(self, direction: int) -> Termination:
        return self.termination_fwd if direction > 0 else self.termination_bwd

    def shifted(self, dr: float) -> "Trajectory":
        """Same solution with the radial origin moved by ``dr``."""
        samples = self.samples.copy()
        samples[:, 0] += dr
        events = tuple(replace(e, r=e.r + dr, state=replace(e.state, r=e.state.r + dr))
                       for e in self.events)
        return replace(
            self,
            samples=samples,
            events=events,
            r_init=self.r_init + dr,
            segments=tuple(s.shifted(dr) for s in self.segments),
        )

    def restricted(self, r_lo: float | None = None, r_hi: float | None = None) -> "Trajectory":
        """Sub-trajectory on ``[r_lo, r_hi]``; a cut side becomes NotIntegrated."""
        lo = self.r_min if r_lo is None else max(r_lo, self.r_min)
        hi = self.r_max if r_hi is None else min(r_hi, self.r_max)
        if not lo < hi:
            raise ValueError("empty restriction")
        r = self.r
        keep = self.samples[(r > lo) & (r < hi)]
        rows = [self._row(lo)] if lo > self.r_min else [self.samples[0]]
        rows.extend(keep)
        rows.append(self._row(hi) if hi < self.r_max else self.samples[-1])
        segs = tuple(s for s in self.segments if s.r_hi > lo and s.r_lo < hi)
        events = tuple(e for e in self.events if lo <= e.r <= hi)
        bwd_cut = lo > self.r_min
        fwd_cut = hi < self.r_max
        return replace(
            self,
            samples=np.array(rows),
            events=events,
            termination_fwd=Termination.NOT_INTEGRATED if fwd_cut else self.termination_fwd,
            termination_bwd=Termination.NOT_INTEGRATED if bwd_cut else self.termination_bwd,
            asymptote_fwd=None if fwd_cut else self.asymptote_fwd,
            asymptote_bwd=None if bwd_cut else self.asymptote_bwd,
            r_init=min(max(self.r_init, lo), hi),
            segments=segs,
        )

    def resample(self, dr: float) -> "Trajectory":
        """Uniformly spaced samples (plus both end points) from the dense output."""
        if not dr > 0:
            raise ValueError("dr must be positive")
        count = int(math.floor((self.r_max - self.r_min) / dr))
        grid = self.r_min + dr * np.arange(count + 1)
        grid = grid[grid < self.r_max]
        rows = [self._row(float(x)) for x in grid[1:]]
        samples = np.array([self.samples[0], *rows, self.samples[-1]])
        return replace(self, samples=samples)

    def _row(self, r: float):
        rho, drho = self.evaluate(r)
        return np.array([r, rho, drho, rho_second(self.params, rho, drho)])


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_A71, _A73, _A74, _A75, _A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)
_D1 = -12715105075 / 11282082432
_D3 = 87487479700 / 32700410799
_D4 = -10690763975 / 1880347072
_D5 = 701980252875 / 199316789632
_D6 = -1453857185 / 822651844
_D7 = 69997945 / 29380423

_SAFE, _BETA = 0.9, 0.04
_EXPO1 = 0.2 - _BETA * 0.75
_FACC1, _FACC2 = 5.0, 0.1  # inverse of (min, max) step-change factors


def _rhs(n: int, lam: float, rbar: float, d: int, rho: float, drho: float):
    if not rho > 0.0:
        return None
    dd = (rbar - (n - 1) * (n - 2) * drho * drho - rho * rho * (drho + lam)) / (2 * (n - 1) * rho)
    if not math.isfinite(dd):
        return None
    return d * drho, d * dd


def locate_root(monitor, bracket: tuple[float, float], root_tol: float = 1e-12,
                max_iter: int = 200) -> float:
    """Bisection for a sign change of ``monitor`` on ``bracket``.

    Stops once ``|monitor|`` is below ``root_tol`` times the larger end value.
    """
    a, b = bracket
    fa, fb = monitor(a), monitor(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if not (fa * fb < 0.0):
        raise BracketError(f"no sign change on [{a}, {b}] (values {fa}, {fb})")
    scale = max(abs(fa), abs(fb))
    best, fbest = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        fm = monitor(m)
        if abs(fm) < abs(fbest):
            best, fbest = m, fm
        if abs(fm) <= root_tol * scale:
            return m
        if (fm < 0.0) == (fa < 0.0):
            a, fa = m, fm
        else:
            b = m
    return best


def _event_monitors(params: SolitonParams, d: int, tip_horizon: float):
    lam = params.lam

    def ddrho_of(rho, drho):
        return rho_second(params, rho, drho) if rho > 0 else math.nan

    return (
        (EventKind.RHO_ZERO, lambda rho, drho: rho - tip_horizon * max(-d * drho, 0.0)),
        (EventKind.DRHO_ZERO, lambda rho, drho: drho),
        (EventKind.DDRHO_ZERO, ddrho_of),
        (EventKind.DRHO_PLUS_LAMBDA_ZERO, lambda rho, drho: drho + lam),
    )


def _crossed(fa: float, fb: float) -> bool:
    if math.isnan(fa) or math.isnan(fb):
        return False
    return (fa < 0.0 < fb) or (fb < 0.0 < fa) or (fb == 0.0 and fa != 0.0)


def _make_event(params, kind, r, rho, drho, d) -> Event:
    if rho > 0:
        dd = rho_second(params, rho, drho)
        ddd = rho_third(params, rho, drho, dd)
    else:
        dd = ddd = math.nan
    return Event(kind, r, SolitonState(r, max(rho, 0.0), drho), dd, ddd, d)


def _run_direction(params: SolitonParams, init: SolitonState, d: int,
                   opts: IntegrationOptions, hold_at_start: bool = False):
    """Integrate one direction; returns (rows, segments, events, reason, asymptote)."""
    n, lam, rbar = params.n, params.lam, params.rbar
    r0 = init.r
    y0, y1 = init.rho, init.drho
    rtol, atol = opts.rtol, opts.atol
    span = opts.r_span
    hmin = 1e-12 * span
    monitors = _event_monitors(params, d, opts.tip_horizon)

    rows, segments, events = [], [], []
    k = _rhs(n, lam, rbar, d, y0, y1)
    if k is None:
        raise DomainError(f"initial state not admissible: rho={y0}, drho={y1}")
    k1a, k1b = k
    mvals = [m(y0, y1) for _, m in monitors]

    s = 0.0
    h = min(opts.h_init, opts.h_max, span)
    facold = 1e-4
    last_rejected = False
    small = abs(y1) < opts.converge_eps and abs(k1b) < opts.converge_eps
    hold_start = 0.0 if (hold_at_start and small) else None
    # an exact equilibrium never "converges"; the window must start after r0
    if not hold_at_start and small:
        hold_start = math.inf
    steps = 0

    while True:
        steps += 1
        if steps > opts.max_steps:
            return rows, segments, events, Termination.STEP_LIMIT, None
        if h < hmin:
            return rows, segments, events, Termination.STEP_UNDERFLOW, None
        last = s + h >= span
        if last:
            h = span - s

        stages = None
        ya = y0 + h * _A21 * k1a
        yb = y1 + h * _A21 * k1b
        k2 = _rhs(n, lam, rbar, d, ya, yb)
        if k2 is not None:
            ya = y0 + h * (_A31 * k1a + _A32 * k2[0])
            yb = y1 + h * (_A31 * k1b + _A32 * k2[1])
            k3 = _rhs(n, lam, rbar, d, ya, yb)
            if k3 is not None:
                ya = y0 + h * (_A41 * k1a + _A42 * k2[0] + _A43 * k3[0])
                yb = y1 + h * (_A41 * k1b + _A42 * k2[1] + _A43 * k3[1])
                k4 = _rhs(n, lam, rbar, d, ya, yb)
                if k4 is not None:
                    ya = y0 + h * (_A51 * k1a + _A52 * k2[0] + _A53 * k3[0] + _A54 * k4[0])
                    yb = y1 + h * (_A51 * k1b + _A52 * k2[1] + _A53 * k3[1] + _A54 * k4[1])
                    k5 = _rhs(n, lam, rbar, d, ya, yb)
                    if k5 is not None:
                        ya = y0 + h * (_A61 * k1a + _A62 * k2[0] + _A63 * k3[0]
                                       + _A64 * k4[0] + _A65 * k5[0])
                        yb = y1 + h * (_A61 * k1b + _A62 * k2[1] + _A63 * k3[1]
                                       + _A64 * k4[1] + _A65 * k5[1])
                        k6 = _rhs(n, lam, rbar, d, ya, yb)
                        if k6 is not None:
                            za = y0 + h * (_A71 * k1a + _A73 * k3[0] + _A74 * k4[0]
                                           + _A75 * k5[0] + _A76 * k6[0])
                            zb = y1 + h * (_A71 * k1b + _A73 * k3[1] + _A74 * k4[1]
                                           + _A75 * k5[1] + _A76 * k6[1])
                            k7 = _rhs(n, lam, rbar, d, za, zb)
                            if k7 is not None:
                                stages = (k2, k3, k4, k5, k6, k7)

        if stages is None:
            # a stage left the domain rho > 0
            h *= 0.25
            last_rejected = True
            continue

        k2, k3, k4, k5, k6, k7 = stages
        ea = h * (_E1 * k1a + _E3 * k3[0] + _E4 * k4[0] + _E5 * k5[0] + _E6 * k6[0] + _E7 * k7[0])
        eb = h * (_E1 * k1b + _E3 * k3[1] + _E4 * k4[1] + _E5 * k5[1] + _E6 * k6[1] + _E7 * k7[1])
        ska = atol + rtol * max(abs(y0), abs(za))
        skb = atol + rtol * max(abs(y1), abs(zb))
        # hypot avoids the overflow of squaring huge scaled errors
        err = math.hypot(ea / ska, eb / skb) / math.sqrt(2.0)
        if not math.isfinite(err):
            h *= 0.25
            last_rejected = True
            continue

        fac11 = err ** _EXPO1 if err > 0 else 0.0
        if err > 1.0:
            h = h / min(_FACC1, fac11 / _SAFE)
            last_rejected = True
            continue

        # accepted
        fac = max(_FACC2, min(_FACC1, fac11 / facold**_BETA / _SAFE))
        facold = max(err, 1e-4)
        h_next = min(h / fac, opts.h_max)
        if last_rejected:
            h_next = min(h_next, h)
        last_rejected = False

        da, db = za - y0, zb - y1
        bsa, bsb = h * k1a - da, h * k1b - db
        coef = (
            (y0, y1),
            (da, db),
            (bsa, bsb),
            (da - h * k7[0] - bsa, db - h * k7[1] - bsb),
            (
                h * (_D1 * k1a + _D3 * k3[0] + _D4 * k4[0] + _D5 * k5[0] + _D6 * k6[0] + _D7 * k7[0]),
                h * (_D1 * k1b + _D3 * k3[1] + _D4 * k4[1] + _D5 * k5[1] + _D6 * k6[1] + _D7 * k7[1]),
            ),
        )
        s_new = span if last else s + h
        ra, rb = r0 + d * s, r0 + d * s_new
        seg = _Segment(min(ra, rb), max(ra, rb), r0, d, s, h, coef)

        # root-type events inside the step
        new_mvals = [m(za, zb) for _, m in monitors]
        found = []
        for (kind, mon), fa, fb in zip(monitors, mvals, new_mvals):
            if not _crossed(fa, fb):
                continue

            def along(rr, mon=mon):
                return mon(*seg(rr))

            try:
                rr = locate_root(along, (ra, rb), opts.root_tol)
            except BracketError:
                continue
            found.append((d * (rr - r0), kind, rr))
        found.sort(key=lambda t: t[0])
        terminal = None
        for _, kind, rr in found:
            rho_e, drho_e = seg(rr)
            events.append(_make_event(params, kind, rr, rho_e, drho_e, d))
            if kind == EventKind.RHO_ZERO:
                terminal = (rr, rho_e, drho_e)
                break
        if terminal is not None:
            rr, rho_e, drho_e = terminal
            seg = replace(seg, r_lo=min(ra, rr), r_hi=max(ra, rr))
            segments.append(seg)
            rows.append((rr, rho_e, drho_e))
            return rows, segments, events, Termination.RHO_ZERO, None

        segments.append(seg)
        rows.append((rb, za, zb))
        s, y0, y1 = s_new, za, zb
        k1a, k1b = k7
        mvals = new_mvals

        if abs(y0) > opts.blowup_threshold or abs(y1) > opts.blowup_threshold:
            events.append(_make_event(params, EventKind.BLOWUP, rb, y0, y1, d))
            return rows, segments, events, Termination.BLOWUP, None

        if abs(y1) < opts.converge_eps and abs(k1b) < opts.converge_eps:
            if hold_start == math.inf:
                pass
            elif hold_start is None:
                hold_start = s
            elif s - hold_start >= opts.converge_window:
                events.append(_make_event(params, EventKind.CONVERGED, rb, y0, y1, d))
                return rows, segments, events, Termination.CONVERGED, y0
        else:
            hold_start = None

        if last:
            events.append(_make_event(params, EventKind.WINDOW_END, rb, y0, y1, d))
            return rows, segments, events, Termination.WINDOW_END, None
        h = h_next


def integrate(
    params: SolitonParams,
    init: SolitonState,
    direction: str = "both",
    opts: IntegrationOptions | None = None,
    converged_at_start: str = "none",
) -> Trajectory:
    """Integrate from ``init`` forward, backward or both ways in ``r``.

    A start state that already passes the convergence test only counts toward
    the Converged window in the directions named by ``converged_at_start``
    (none, forward, backward or both); otherwise the test must first fail and
    then hold again, so an exact equilibrium runs to WindowEnd.
    """
    opts = opts or IntegrationOptions()
    if direction not in ("forward", "backward", "both"):
        raise ValueError(f"unknown direction {direction!r}")
    if converged_at_start not in ("none", "forward", "backward", "both"):
        raise ValueError(f"unknown direction {converged_at_start!r}")
    if not init.rho > 0:
        raise DomainError("integration needs rho > 0; start tips with sphere_tip_initialize")

    first = (init.r, init.rho, init.drho)
    parts = {}
    for d, name in ((1, "forward"), (-1, "backward")):
        if direction in (name, "both"):
            hold = converged_at_start in (name, "both")
            parts[d] = _run_direction(params, init, d, opts, hold)
        else:
            parts[d] = ([], [], [], Termination.NOT_INTEGRATED, None)

    bwd_rows, bwd_segs, bwd_events, bwd_reason, bwd_asym = parts[-1]
    fwd_rows, fwd_segs, fwd_events, fwd_reason, fwd_asym = parts[1]
    rows = [*reversed(bwd_rows), first, *fwd_rows]
    samples = np.array([(r, rho, drho, rho_second(params, rho, drho)) for r, rho, drho in rows])
    events = tuple(sorted([*bwd_events, *fwd_events], key=lambda e: e.r))
    segments = tuple([*reversed(bwd_segs), *fwd_segs])
    return Trajectory(
        params=params,
        samples=samples,
        events=events,
        termination_fwd=fwd_reason,
        termination_bwd=bwd_reason,
        r_init=init.r,
        asymptote_fwd=fwd_asym,
        asymptote_bwd=bwd_asym,
        segments=segments,
    )


def tip_slope(params: SolitonParams) -> float:
    """rho'(0) of a smooth tip: (n-1)(n-2) rho'(0)^2 = rbar."""
    if not params.rbar > 0:
        raise ValueError(f"a smooth tip needs rbar > 0, got {params.rbar}")
    return math.sqrt(params.rbar / ((params.n - 1) * (params.n - 2)))


def sphere_tip_initialize(params: SolitonParams, r0: float = 1e-4) -> SolitonState:
    """First-order Taylor start next to a tip at r = 0.

    The truncation error is O(r0^3) in rho since rho''(0) = 0 at a smooth tip.
    """
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    slope = tip_slope(params)
    return SolitonState(r0, slope * r0, slope)


def asymptotic_rates(params: SolitonParams) -> tuple[float, float]:
    """(unstable, stable) exponential rates of solutions approaching the fixed warp.

    For rbar < 0 these are the eigenvalues of the linearisation at
    ``rho = sqrt(rbar/lam)``; for rbar = 0 they are ``+k`` and ``-k`` of the
    power-law modes ``rho ~ exp(k r)`` with ``k^2 = -lam / (n (n-1))``.
    """
    c = params.fixed_warp
    if c is None or not params.lam < 0:
        raise ValueError("asymptotic rates need lam < 0 and rbar <= 0")
    n, lam = params.n, params.lam
    if c == 0.0:
        k = math.sqrt(-lam / (n * (n - 1)))
        return k, -k
    b = c / (2 * (n - 1))
    disc = math.sqrt(b * b - 4 * lam / (n - 1))
    return 0.5 * (-b + disc), 0.5 * (-b - disc)


def line_from_asymptote(
    params: SolitonParams,
    increasing: bool,
    rho_anchor: float,
    opts: IntegrationOptions | None = None,
) -> Trajectory:
    """Line solution that tends to ``sqrt(rbar/lam)`` at one end, anchored at rho(0).

    ``increasing=True`` builds the rho' > 0 solution that converges as
    r -> -inf; ``increasing=False`` the rho' < 0 one that converges as
    r -> +inf.  Both are separatrices of a saddle, so they are shot from the
    asymptotic end along the linearised manifold, where integrating away from
    the asymptote is stable.  The result is shifted so that ``rho(0) =
    rho_anchor``.
    """
    opts = opts or IntegrationOptions()
    c = params.fixed_warp
    if c is None:
        raise ValueError("need rbar/lam >= 0 for an asymptotic line solution")
    if not rho_anchor > c:
        raise ValueError(f"anchor {rho_anchor} must exceed the asymptote {c}")
    unstable, stable = asymptotic_rates(params)
    rate = unstable if increasing else stable
    delta = 0.25 * opts.converge_eps / abs(rate)
    if c > 0:
        delta = min(delta, 1e-6 * c)
    start = SolitonState(0.0, c + delta, rate * delta)
    away = 1 if increasing else -1
    traj = integrate(params, start, "both", opts,
                     converged_at_start="backward" if increasing else "forward")

    mask = traj.r * away >= 0
    rr, rho = traj.r[mask], traj.rho[mask]
    hits = np.nonzero(rho >= rho_anchor)[0]
    if hits.size == 0:
        raise IntegrationError(
            f"warp never reached {rho_anchor} within r_span={opts.r_span}; enlarge the window"
        )
    j = hits[0] if away > 0 else hits[-1]
    order = sorted((float(rr[j - away]), float(rr[j]))) if away > 0 else sorted(
        (float(rr[j]), float(rr[j + 1])))
    r_star = locate_root(lambda x: traj.evaluate(x)[0] - rho_anchor, tuple(order), 1e-15)
    return traj.shifted(-r_star)
