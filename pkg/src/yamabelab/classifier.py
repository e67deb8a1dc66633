"""Branch classification of trajectories and the theorem-level check suites.

Branches follow the warped-product trichotomy for complete solitons, refined
by the sign of ``R - lambda = rho'``:

* ``Trivial``: rho' vanishes identically, R = lambda.
* ``RotationallySymmetricHalfLine``: a smooth tip (rho -> 0 with
  (n-1)(n-2) rho'(0)^2 = rbar) closes one end over a round sphere.
* ``LineRLessLambda`` / ``LineRGreaterLambda``: rho' has a fixed sign and the
  warp settles to a constant at the end where the argument needs it.
* ``NotGlobal``: the run itself contradicts completeness (blow-up, a
  non-smooth zero of rho, two tips).
* ``Inconclusive``: nothing contradicts completeness inside the window but
  the window does not settle the branch either.

Compact solitons are never reported; nontrivial compact ones do not exist.
A direction that was not integrated is not examined, so a forward-only run
can realise a half-line of a branch.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .integrator import (
    FAILURES,
    Event,
    EventKind,
    IntegrationOptions,
    Termination,
    Trajectory,
    integrate,
    tip_slope,
)
from .soliton_ode import SolitonParams, SolitonState, eq1_terms, rho_third


class Branch(str, enum.Enum):
    TRIVIAL = "Trivial"
    HALF_LINE = "RotationallySymmetricHalfLine"
    LINE_R_LESS = "LineRLessLambda"
    LINE_R_GREATER = "LineRGreaterLambda"
    NOT_GLOBAL = "NotGlobal"
    INCONCLUSIVE = "Inconclusive"


TRIVIAL_EPS = 1e-9
TIP_RTOL = 1e-3


@dataclass(frozen=True)
class Classification:
    branch: Branch
    asymptote_c: float | None = None
    details: str = ""

    def as_dict(self) -> dict:
        return {"branch": self.branch.value, "asymptote_c": self.asymptote_c,
                "details": self.details}


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    worst_residual: float
    at_r: float | None = None

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "worst_residual": self.worst_residual, "at_r": self.at_r}


@dataclass
class VerificationReport:
    suite: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, worst: float, at_r: float | None = None) -> Check:
        if any(c.name == name for c in self.checks):
            raise ValueError(f"duplicate check name {name!r} in suite {self.suite}")
        check = Check(name, bool(passed), float(worst), None if at_r is None else float(at_r))
        self.checks.append(check)
        return check

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for c in other.checks:
            self.add(prefix + c.name, c.passed, c.worst_residual, c.at_r)

    def as_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed,
                "checks": [c.as_dict() for c in self.checks]}


def _terminal_event(traj: Trajectory, direction: int, kind: EventKind) -> Event | None:
    for e in traj.events:
        if e.kind == kind and e.direction == direction:
            return e
    return None


def smooth_tip(traj: Trajectory, direction: int, rtol: float = TIP_RTOL) -> bool:
    """True when the run closes off at a zero of rho with the smooth-tip slope."""
    if traj.termination(direction) != Termination.RHO_ZERO:
        return False
    p = traj.params
    if not p.rbar > 0:
        return False
    e = _terminal_event(traj, direction, EventKind.RHO_ZERO)
    if e is None:
        return False
    slope = tip_slope(p)
    # rho must decrease toward the tip
    return abs(-direction * e.state.drho - slope) <= rtol * slope


def classify(traj: Trajectory, tol: float = TRIVIAL_EPS) -> Classification:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    p = traj.params
    if not p.lam < 0:
        raise ValueError("classification covers expanding solitons (lambda < 0) only")

    drho = traj.drho
    ends = {1: traj.termination_fwd, -1: traj.termination_bwd}
    if all(t == Termination.NOT_INTEGRATED for t in ends.values()):
        return Classification(Branch.INCONCLUSIVE, None, "no direction integrated")

    failed = [d for d, t in ends.items() if t in FAILURES]
    blowups = [d for d, t in ends.items() if t == Termination.BLOWUP]
    zeros = [d for d, t in ends.items() if t == Termination.RHO_ZERO]
    smooth = [d for d in zeros if smooth_tip(traj, d)]
    rough = [d for d in zeros if d not in smooth]

    max_abs = float(np.max(np.abs(drho)))
    if max_abs <= tol and not (blowups or zeros or failed):
        c = float(np.mean(traj.rho))
        return Classification(Branch.TRIVIAL, c, f"max|rho'| = {max_abs:.3g}")

    if blowups:
        return Classification(Branch.NOT_GLOBAL, None, f"blow-up in direction(s) {blowups}")
    if rough:
        e = _terminal_event(traj, rough[0], EventKind.RHO_ZERO)
        slope = e.state.drho if e is not None else math.nan
        return Classification(
            Branch.NOT_GLOBAL, None, f"rho -> 0 without a smooth tip (rho' = {slope:.6g})"
        )
    if len(smooth) == 2:
        return Classification(Branch.NOT_GLOBAL, None, "tips at both ends (compact)")
    if failed:
        return Classification(
            Branch.INCONCLUSIVE, None, f"integration failed: {[ends[d].value for d in failed]}"
        )
    if smooth:
        e = _terminal_event(traj, smooth[0], EventKind.RHO_ZERO)
        r_tip = e.r - e.state.rho / e.state.drho
        return Classification(Branch.HALF_LINE, None, f"smooth tip near r = {r_tip:.6g}")

    pos = bool(np.any(drho > tol))
    neg = bool(np.any(drho < -tol))
    if pos and neg:
        return Classification(Branch.INCONCLUSIVE, None, "rho' changes sign inside the window")
    if pos:
        if traj.termination_bwd == Termination.CONVERGED:
            return Classification(Branch.LINE_R_GREATER, traj.asymptote_bwd,
                                  "rho' > 0, converged as r decreases")
        return Classification(Branch.INCONCLUSIVE, None,
                              f"rho' > 0 but backward run ended {traj.termination_bwd.value}")
    if traj.termination_fwd == Termination.CONVERGED:
        return Classification(Branch.LINE_R_LESS, traj.asymptote_fwd,
                              "rho' < 0, converged as r increases")
    return Classification(Branch.INCONCLUSIVE, None,
                          f"rho' < 0 but forward run ended {traj.termination_fwd.value}")


def _require(traj: Trajectory, branch: Branch, tol: float) -> None:
    got = classify(traj, tol).branch
    if got != branch:
        raise ValueError(f"trajectory is classified {got.value}, not {branch.value}")


def _argmin(values: np.ndarray, r: np.ndarray):
    i = int(np.argmin(values))
    return float(values[i]), float(r[i])


def verify_r_less_lambda(traj: Trajectory, params: SolitonParams, tol: float = 1e-3,
                         classify_tol: float = TRIVIAL_EPS) -> VerificationReport:
    """rho'' > 0, rbar <= 0, rho' increasing, rho -> sqrt(rbar/lam) as r -> +inf."""
    _require(traj, Branch.LINE_R_LESS, classify_tol)
    rep = VerificationReport("r-less-lambda")
    r = traj.r
    worst, at = _argmin(traj.ddrho, r)
    rep.add("rho'' > 0", worst > 0, worst, at)
    rep.add("rbar <= 0", params.rbar <= 0, params.rbar)
    target = params.fixed_warp
    c = traj.asymptote_fwd
    if c is None or target is None:
        rep.add("forward asymptote", False, math.inf)
    else:
        rep.add("forward asymptote", abs(c - target) <= tol, abs(c - target), traj.r_max)
    inc = np.diff(traj.drho)
    worst, at = _argmin(inc, r[1:])
    rep.add("rho' strictly increasing", worst > 0, worst, at)
    return rep


def flat_runs(traj: Trajectory, root_tol: float, converge_eps: float) -> list[tuple[float, float]]:
    """Maximal runs of samples with |rho''| below ``root_tol`` times its local scale.

    Samples in a converged tail (|rho'| and |rho''| below ``converge_eps``) are
    skipped.
    """
    p = traj.params
    runs, start, prev = [], None, None
    for r, rho, drho, dd in traj.samples:
        tail = abs(drho) < converge_eps and abs(dd) < converge_eps
        if rho > 0 and not tail:
            scale = max(abs(t) for t in eq1_terms(p, rho, drho, dd)) / (2 * (p.n - 1) * rho)
            flat = abs(dd) < root_tol * scale
        else:
            flat = False
        if flat:
            start = r if start is None else start
            prev = r
        elif start is not None:
            runs.append((start, prev))
            start = None
    if start is not None:
        runs.append((start, prev))
    return runs


def verify_r_greater_lambda(
    traj: Trajectory,
    params: SolitonParams,
    tol: float = 1e-3,
    opts: IntegrationOptions | None = None,
    classify_tol: float = TRIVIAL_EPS,
) -> VerificationReport:
    """0 < rho' < -lam, rho'' >= 0 without flat stretches, backward limit, rbar <= 0."""
    opts = opts or IntegrationOptions()
    _require(traj, Branch.LINE_R_GREATER, classify_tol)
    rep = VerificationReport("r-greater-lambda")
    r, d = traj.r, traj.drho
    lo, at_lo = _argmin(d, r)
    hi_margin, at_hi = _argmin(-params.lam - d, r)
    worst = min(lo, hi_margin)
    rep.add("0 < rho' < -lambda", lo > 0 and hi_margin > 0, worst,
            at_lo if lo <= hi_margin else at_hi)
    worst, at = _argmin(traj.ddrho, r)
    rep.add("rho'' >= 0", worst >= 0, worst, at)
    runs = flat_runs(traj, opts.root_tol, opts.converge_eps)
    longest = max((b - a for a, b in runs), default=0.0)
    at = next((a for a, b in runs if b - a == longest), None)
    rep.add("no open interval with rho'' = 0", longest < opts.converge_window, longest, at)
    target = params.fixed_warp
    c = traj.asymptote_bwd
    if c is None or target is None:
        rep.add("backward asymptote", False, math.inf)
    else:
        rep.add("backward asymptote", abs(c - target) <= tol, abs(c - target), traj.r_min)
    rep.add("rbar <= 0", params.rbar <= 0, params.rbar)
    return rep


class Claim2Check(NamedTuple):
    dddrho_positive: bool
    rho_above_sqrt: bool
    identity_ok: bool
    dddrho: float
    identity_error: float


def quadratic_root_drho(params: SolitonParams, rho: float) -> float:
    """Positive rho' solving the warp equation with rho'' = 0, or nan."""
    q = (params.n - 1) * (params.n - 2)
    x = params.rbar - params.lam * rho * rho
    disc = rho**4 + 4 * q * x
    if disc < 0:
        return math.nan
    # rationalised form of (-rho^2 + sqrt(disc)) / (2q)
    return 2 * x / (rho * rho + math.sqrt(disc))


def check_claim2_event(params: SolitonParams, event: Event, rtol: float = 1e-8) -> Claim2Check:
    """Checks at a zero of rho'': rho''' > 0, rho > sqrt(rbar/lam), and the root formula."""
    if event.kind != EventKind.DDRHO_ZERO:
        raise ValueError(f"expected a DDRhoZero event, got {event.kind.value}")
    rho, drho = event.state.rho, event.state.drho
    ddrho = 0.0 if math.isnan(event.ddrho) else event.ddrho
    ddd = rho_third(params, rho, drho, ddrho)
    target = params.fixed_warp
    above = target is not None and rho > target
    root = quadratic_root_drho(params, rho)
    if math.isnan(root):
        err = math.inf
    else:
        err = abs(drho - root) / max(abs(root), 1e-300)
    return Claim2Check(ddd > 0, above, err <= rtol, ddd, err)


def verify_claim2(trajs, rtol: float = 1e-8) -> VerificationReport:
    """Run :func:`check_claim2_event` on every zero of rho'' found with rho' > 0."""
    rep = VerificationReport("claim2")
    for i, traj in enumerate(trajs):
        p = traj.params
        for j, e in enumerate(traj.events_of(EventKind.DDRHO_ZERO)):
            if not e.state.drho > 0:
                continue
            res = check_claim2_event(p, e, rtol)
            tag = f"traj[{i}] event[{j}]"
            rep.add(f"{tag} rho''' > 0", res.dddrho_positive, res.dddrho, e.r)
            target = p.fixed_warp or 0.0
            rep.add(f"{tag} rho > sqrt(rbar/lambda)", res.rho_above_sqrt,
                    e.state.rho - target, e.r)
            rep.add(f"{tag} quadratic root", res.identity_ok, res.identity_error, e.r)
    return rep


def line_outcome(traj: Trajectory, tol: float = TRIVIAL_EPS) -> str:
    """How a run started on a line ends: tip, blowup, sign-change or survivor."""
    ends = (traj.termination_fwd, traj.termination_bwd)
    if Termination.RHO_ZERO in ends:
        return "tip"
    if Termination.BLOWUP in ends:
        return "blowup"
    if np.any(traj.drho > tol) and np.any(traj.drho < -tol):
        return "sign-change"
    if any(t in FAILURES for t in ends):
        return "failed"
    return "survivor"


def _claim1_one(args):
    params, rho0, drho0, opts, cap = args
    span = opts.r_span
    while True:
        traj = integrate(params, SolitonState(0.0, rho0, drho0), "both", opts.with_(r_span=span))
        outcome = line_outcome(traj)
        if outcome != "survivor" or 2 * span > cap:
            break
        span *= 2
    at = None
    for e in traj.events:
        if e.kind in (EventKind.RHO_ZERO, EventKind.BLOWUP):
            at = e.r
    return outcome, span, at


def falsify_claim1(params: SolitonParams, grid, opts: IntegrationOptions | None = None,
                   cap: float = 800.0, workers: int = 1) -> VerificationReport:
    """No line initial condition with rbar > 0 survives as a global rho' > 0 line.

    Runs ending in the window without a contradiction are repeated with a
    doubled window up to ``cap``; any that still survive fail the suite.
    """
    opts = opts or IntegrationOptions()
    if not params.rbar > 0:
        raise ValueError("the line-survival harness needs rbar > 0")
    grid = [(float(a), float(b)) for a, b in grid]
    for rho0, drho0 in grid:
        if not (rho0 > 0 and drho0 > 0):
            raise ValueError(f"grid point ({rho0}, {drho0}) is not in the rho, rho' > 0 regime")
    jobs = [(params, a, b, opts, cap) for a, b in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_claim1_one, jobs))
    else:
        results = [_claim1_one(j) for j in jobs]
    rep = VerificationReport("claim1")
    for i, ((rho0, drho0), (outcome, span, at)) in enumerate(zip(grid, results)):
        rep.add(f"ic[{i}] rho0={rho0:g} drho0={drho0:g} -> {outcome}",
                outcome != "survivor", span, at)
    return rep


def epsilon_propositions_check(params: SolitonParams, traj: Trajectory,
                               eps: float = 0.1) -> VerificationReport:
    """Linear-bound consequences of rho' < -eps and rho' > eps.

    If rho' < -eps on the whole forward half, rho must reach 0 within
    rho(r_init)/eps; if rho' > eps on the whole backward half, the same bound
    holds going backward.  A hypothesis that fails makes its check vacuous.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    rep = VerificationReport("epsilon")
    r0 = traj.r_init
    rho0 = float(np.interp(r0, traj.r, traj.rho))
    bound = rho0 / eps
    halves = (
        (1, "rho' < -eps forces a forward zero", traj.r >= r0, lambda d: d < -eps),
        (-1, "rho' > eps forces a backward zero", traj.r <= r0, lambda d: d > eps),
    )
    for d, name, mask, hyp in halves:
        end = traj.termination(d)
        if end == Termination.NOT_INTEGRATED or mask.sum() < 2 or not np.all(hyp(traj.drho[mask])):
            rep.add(name, True, 0.0)
            continue
        e = _terminal_event(traj, d, EventKind.RHO_ZERO)
        if e is not None:
            dist = abs(e.r - r0)
            rep.add(name, dist <= bound, dist - bound, e.r)
        elif end == Termination.WINDOW_END:
            reach = abs(traj.r_max - r0) if d > 0 else abs(r0 - traj.r_min)
            rep.add(name, reach < bound, reach - bound, traj.r_max if d > 0 else traj.r_min)
        else:
            edge = traj.r_max if d > 0 else traj.r_min
            rep.add(name, False, abs(edge - r0) - bound, edge)
    return rep
