"""Curated verification grids, one per named suite.

These are the grids the acceptance tests and ``yamabelab verify`` run.  The
line-branch suites look at two kinds of trajectory per grid point:

* the literal run from ``(rho0, drho0)``, classified and verified only if it
  lands in the branch under test;
* the line solution through ``rho0`` built by shooting from the asymptotic
  end (:func:`line_from_asymptote`).  Generic initial data miss these
  separatrices, so the literal runs almost never realise a line branch.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .classifier import (
    Branch,
    VerificationReport,
    classify,
    epsilon_propositions_check,
    falsify_claim1,
    verify_claim2,
    verify_r_greater_lambda,
    verify_r_less_lambda,
)
from .geometry import route_gaps, soliton_range_check
from .integrator import (
    IntegrationOptions,
    Trajectory,
    integrate,
    line_from_asymptote,
    sphere_tip_initialize,
)
from .soliton_ode import (
    SolitonParams,
    SolitonState,
    eq1_residual,
    eq2_residual,
    rho_second,
    scale_transform,
)

OPTS = IntegrationOptions()
ASYMPTOTE_TOL = 1e-3
FD_RTOL = 1e-4
ROUTE_FACTOR = 20.0
SCALING_RTOL = 1e-10
TIP_RTOL = 1e-6
EPS = 0.1

R_LESS_GRID = dict(n=(3, 4, 5), lam=(-1.0, -2.0), rbar=(0.0, -1.0), rho0=(2.0, 3.0),
                   drho0=(-0.2, -0.5))
R_GREATER_GRID = dict(n=(3, 4), lam=(-1.0,), rbar=(0.0, -1.0), rho0=(1.0, 2.0),
                      drho0=(0.2, 0.5, 0.8))
CLAIM1_PARAMS = (3, -1.0, 2.0)
CLAIM1_GRID = tuple(itertools.product((0.5, 1.0, 2.0), (0.1, 0.5, 1.0, 2.0)))
CLAIM1_CAP = 800.0


@dataclass
class SuiteResult:
    report: VerificationReport
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.report.passed

    def as_dict(self) -> dict:
        out = self.report.as_dict()
        out["notes"] = list(self.notes)
        return out


@dataclass(frozen=True)
class Case:
    label: str
    traj: Trajectory
    constructed: bool = False


def _grid(grid: dict):
    for n, lam, rbar, rho0, drho0 in itertools.product(
        grid["n"], grid["lam"], grid["rbar"], grid["rho0"], grid["drho0"]
    ):
        yield SolitonParams(n, lam, rbar), rho0, drho0


def _tag(p: SolitonParams, rho0: float, drho0: float | None = None) -> str:
    s = f"n={p.n} lam={p.lam:g} rbar={p.rbar:g} rho0={rho0:g}"
    return s if drho0 is None else s + f" drho0={drho0:g}"


@lru_cache(maxsize=None)
def literal_run(n: int, lam: float, rbar: float, rho0: float, drho0: float,
                r_span: float = OPTS.r_span) -> Trajectory:
    return integrate(SolitonParams(n, lam, rbar), SolitonState(0.0, rho0, drho0), "both",
                     OPTS.with_(r_span=r_span))


@lru_cache(maxsize=None)
def line_run(n: int, lam: float, rbar: float, rho0: float, increasing: bool) -> Trajectory:
    """Line through rho0; the rho' < 0 one is cut to its forward half-line."""
    traj = line_from_asymptote(SolitonParams(n, lam, rbar), increasing, rho0, OPTS)
    return traj if increasing else traj.restricted(0.0)


@lru_cache(maxsize=None)
def full_decreasing_line(n: int, lam: float, rbar: float, rho0: float) -> Trajectory:
    return line_from_asymptote(SolitonParams(n, lam, rbar), False, rho0, OPTS)


@lru_cache(maxsize=None)
def constant_run() -> Trajectory:
    return integrate(SolitonParams(3, -1.0, -1.0), SolitonState(0.0, 1.0, 0.0), "both",
                     OPTS.with_(r_span=50.0))


@lru_cache(maxsize=None)
def tip_run(n: int = 3, lam: float = -1.0, rbar: float = 2.0) -> Trajectory:
    p = SolitonParams(n, lam, rbar)
    return integrate(p, sphere_tip_initialize(p), "both", OPTS)


def r_less_cases() -> list[Case]:
    cases, seen = [], set()
    for p, rho0, drho0 in _grid(R_LESS_GRID):
        cases.append(Case("R<lambda " + _tag(p, rho0, drho0),
                          literal_run(p.n, p.lam, p.rbar, rho0, drho0)))
        key = (p.n, p.lam, p.rbar, rho0)
        if key not in seen:
            seen.add(key)
            cases.append(Case("R<lambda line " + _tag(p, rho0), line_run(*key, False), True))
    return cases


def r_greater_cases() -> list[Case]:
    cases, seen = [], set()
    for p, rho0, drho0 in _grid(R_GREATER_GRID):
        cases.append(Case("R>lambda " + _tag(p, rho0, drho0),
                          literal_run(p.n, p.lam, p.rbar, rho0, drho0)))
        key = (p.n, p.lam, p.rbar, rho0)
        c = p.fixed_warp
        if key not in seen and c is not None and rho0 > c:
            seen.add(key)
            cases.append(Case("R>lambda line " + _tag(p, rho0), line_run(*key, True), True))
    return cases


def _branch_suite(name: str, branch: Branch, cases: list[Case], verifier) -> SuiteResult:
    rep = VerificationReport(name)
    notes = []
    counts: dict = {}
    verified = 0
    for case in cases:
        cls = classify(case.traj)
        counts[cls.branch.value] = counts.get(cls.branch.value, 0) + 1
        if case.constructed:
            rep.add(f"{case.label}: classified {branch.value}", cls.branch == branch,
                    0.0 if cls.branch == branch else 1.0)
        if cls.branch != branch:
            continue
        verified += 1
        sub = verifier(case.traj, case.traj.params)
        rep.extend(sub, prefix=f"{case.label}: ")
    rep.add("at least one trajectory verified", verified > 0, float(verified))
    notes.append(f"branch counts: {counts}")
    notes.append(f"verified trajectories: {verified}")
    return SuiteResult(rep, notes)


def _with_range(rep: VerificationReport, traj: Trajectory, increasing: bool) -> VerificationReport:
    rep.extend(soliton_range_check(traj, increasing))
    return rep


def suite_r_less_lambda() -> SuiteResult:
    cases = r_less_cases()
    res = _branch_suite("r-less-lambda", Branch.LINE_R_LESS, cases,
                        lambda t, p: _with_range(verify_r_less_lambda(t, p, ASYMPTOTE_TOL), t, False))
    blown = []
    for (n, lam, rbar, rho0) in sorted({(p.n, p.lam, p.rbar, r0) for p, r0, _ in _grid(R_LESS_GRID)}):
        full = full_decreasing_line(n, lam, rbar, rho0)
        blown.append(f"{classify(full).branch.value}@r={full.r_min:.3f}")
    res.notes.append("backward continuation of each rho' < 0 line: " + ", ".join(sorted(set(
        b.split("@")[0] for b in blown))))
    return res


def suite_r_greater_lambda() -> SuiteResult:
    cases = r_greater_cases()
    res = _branch_suite("r-greater-lambda", Branch.LINE_R_GREATER, cases,
                        lambda t, p: _with_range(verify_r_greater_lambda(t, p, ASYMPTOTE_TOL, OPTS),
                                                 t, True))
    # anchors at or below the asymptote admit no rho' > 0 line
    for p, rho0, drho0 in _grid(R_GREATER_GRID):
        c = p.fixed_warp
        if c is not None and rho0 <= c:
            got = classify(literal_run(p.n, p.lam, p.rbar, rho0, drho0)).branch
            res.report.add(f"{_tag(p, rho0, drho0)}: rho0 <= sqrt(rbar/lambda) is not a line",
                           got != Branch.LINE_R_GREATER, rho0 - c)
    return res


def suite_claim2() -> SuiteResult:
    trajs = [c.traj for c in r_greater_cases()]
    rep = verify_claim2(trajs)
    count = len(rep.checks) // 3
    rep.add("at least one rho'' = 0 event examined", count > 0, float(count))
    return SuiteResult(rep, [f"events examined: {count}"])


def suite_claim1(workers: int = 1) -> SuiteResult:
    p = SolitonParams(*CLAIM1_PARAMS)
    rep = falsify_claim1(p, CLAIM1_GRID, OPTS, cap=CLAIM1_CAP, workers=workers)
    survivors = sum(not c.passed for c in rep.checks)
    return SuiteResult(rep, [f"survivors: {survivors} of {len(CLAIM1_GRID)}"])


def _all_cases() -> list[Case]:
    return [
        Case("constant", constant_run()),
        Case("tip", tip_run()),
        *r_less_cases(),
        *r_greater_cases(),
    ]


def suite_epsilon() -> SuiteResult:
    rep = VerificationReport("epsilon")
    active = 0
    for case in _all_cases():
        sub = epsilon_propositions_check(case.traj.params, case.traj, EPS)
        for c in sub.checks:
            rep.add(f"{case.label}: {c.name}", c.passed, c.worst_residual, c.at_r)
            active += c.at_r is not None
    return SuiteResult(rep, [f"non-vacuous checks: {active}"])


def suite_curvature_routes() -> SuiteResult:
    """Both curvature routes on every suite-3/4 trajectory.

    The pinned bound sits below the float64 rounding floor on the last samples
    before a collapse (rho ~ 1e-4, rho' ~ 1e2).  Those samples are checked
    against the rounding floor instead and counted in the notes.
    """
    rep = VerificationReport("curvature-routes")
    floored = 0
    literal_fail = 0
    for case in [*r_less_cases(), *r_greater_cases()]:
        g = route_gaps(case.traj)
        bound = ROUTE_FACTOR * (OPTS.rtol * np.abs(g[:, 1]) + OPTS.atol)
        below = g[:, 3] * ROUTE_FACTOR < bound
        ratio = np.where(below, g[:, 2] / bound, 0.0)
        i = int(np.argmax(ratio))
        rep.add(f"{case.label}: gap <= 20 (rtol|R| + atol) above rounding floor",
                bool(ratio[i] <= 1.0), float(ratio[i] * ROUTE_FACTOR), float(g[i, 0]))
        excess = g[:, 2] / (ROUTE_FACTOR * g[:, 3])
        j = int(np.argmax(np.where(below, 0.0, excess)))
        rep.add(f"{case.label}: gap <= 20 x rounding floor elsewhere",
                bool(below.all() or excess[~below].max() <= 1.0),
                float(0.0 if below.all() else excess[~below].max()), float(g[j, 0]))
        floored += int((~below).sum())
        literal_fail += bool((g[:, 2] > bound).any())
    return SuiteResult(rep, [
        f"samples under the rounding floor: {floored}",
        f"trajectories over the bound at some sample: {literal_fail}",
    ])


def _fd(f, x: float, h: float) -> float:
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def third_derivative_gap(traj: Trajectory, h: float = 1e-3, skip_tail: float = OPTS.converge_eps):
    """Worst residual of the differentiated ODE, relative to its scale, with rho''' from finite differences.

    rho'' along the dense output is differenced with a 5-point central
    stencil at every interior sample; samples within 2h of either end and
    converged-tail samples are skipped.
    """
    p = traj.params

    def ddrho_at(x):
        rho, drho = traj.evaluate(x)
        return rho_second(p, rho, drho)

    worst, at, used = 0.0, None, 0
    lo, hi = traj.r_min + 2.5 * h, traj.r_max - 2.5 * h
    for r, rho, drho, dd in traj.samples:
        if not (lo <= r <= hi) or rho <= 0:
            continue
        if abs(drho) < skip_tail and abs(dd) < skip_tail:
            continue
        # shrink the stencil where the warp itself is small (near a tip)
        fd = _fd(ddrho_at, float(r), min(h, 0.05 * rho))
        res = eq2_residual(p, rho, drho, dd, fd)
        rel = abs(res.eq2_res) / res.scale
        used += 1
        if rel > worst:
            worst, at = rel, float(r)
    return worst, at, used


def consistency_cases() -> list[Case]:
    return [
        Case("constant", constant_run()),
        Case("tip", tip_run()),
        Case("tip n=4 rbar=3", tip_run(4, -1.0, 3.0)),
        Case("R>lambda line n=3 rbar=-1", line_run(3, -1.0, -1.0, 2.0, True)),
        Case("R>lambda line n=4 rbar=0", line_run(4, -1.0, 0.0, 1.0, True)),
        Case("R<lambda line n=3 rbar=-1", line_run(3, -1.0, -1.0, 2.0, False)),
    ]


def suite_eq_consistency() -> SuiteResult:
    rep = VerificationReport("eq-consistency")
    notes = []
    for case in consistency_cases():
        worst, at, used = third_derivative_gap(case.traj)
        rep.add(f"{case.label}: finite-difference rho''' vs eq2", worst <= FD_RTOL, worst, at)
        notes.append(f"{case.label}: {used} interior samples")
    return SuiteResult(rep, notes)


def _scaled_rep(kind: str, b: float) -> Trajectory:
    """Representative of each branch, built directly in the scaled frame."""
    def P(n, lam, rbar):
        return scale_transform(SolitonParams(n, lam, rbar), SolitonState(0.0, 1.0, 0.0), b)[0]

    if kind == "Trivial":
        p, s = scale_transform(SolitonParams(3, -1.0, -1.0), SolitonState(0.0, 1.0, 0.0), b)
        return integrate(p, s, "both", OPTS.with_(r_span=50.0 / b))
    if kind == "RotationallySymmetricHalfLine":
        p = P(3, -1.0, 2.0)
        return integrate(p, sphere_tip_initialize(p, 1e-4 / b), "both", OPTS.with_(r_span=100.0 / b))
    if kind == "LineRGreaterLambda":
        p = P(3, -1.0, -1.0)
        return line_from_asymptote(p, True, 2.0 * b, OPTS)
    if kind == "LineRLessLambda":
        p = P(3, -1.0, -1.0)
        return line_from_asymptote(p, False, 2.0 * b, OPTS).restricted(0.0)
    if kind == "NotGlobal":
        p, s = scale_transform(SolitonParams(3, -1.0, -1.0), SolitonState(0.0, 2.0, 0.5), b)
        return integrate(p, s, "both", OPTS.with_(r_span=100.0 / b))
    if kind == "Inconclusive":
        p, s = scale_transform(SolitonParams(3, -1.0, -1.0), SolitonState(0.0, 2.0, 0.5), b)
        return integrate(p, s, "both", OPTS.with_(r_span=0.5 / b))
    raise ValueError(kind)


SCALING_BRANCHES = ("Trivial", "RotationallySymmetricHalfLine", "LineRGreaterLambda",
                    "LineRLessLambda", "NotGlobal", "Inconclusive")


def suite_scaling(seed: int = 20240601, count: int = 200) -> SuiteResult:
    rep = VerificationReport("scaling")
    rng = np.random.default_rng(seed)
    for b in (0.5, 2.0):
        worst, worst_src = 0.0, 0.0
        for _ in range(count):
            n = int(rng.integers(3, 8))
            p = SolitonParams(n, -float(rng.uniform(0.1, 5.0)), float(rng.uniform(-5.0, 5.0)))
            s = SolitonState(0.0, float(rng.uniform(0.05, 10.0)), float(rng.uniform(-3.0, 3.0)))
            src = eq1_residual(p, s.rho, s.drho, rho_second(p, s.rho, s.drho))
            q, t = scale_transform(p, s, b)
            img = eq1_residual(q, t.rho, t.drho, rho_second(q, t.rho, t.drho))
            worst = max(worst, abs(img.eq1_res) / img.scale)
            worst_src = max(worst_src, abs(src.eq1_res) / src.scale)
        rep.add(f"b={b:g}: image of zero-residual states has zero residual",
                worst <= SCALING_RTOL, worst)
        for kind in SCALING_BRANCHES:
            got = classify(_scaled_rep(kind, b)).branch.value
            base = classify(_scaled_rep(kind, 1.0)).branch.value
            rep.add(f"b={b:g}: {kind} branch preserved", got == base == kind,
                    0.0 if got == base == kind else 1.0)
    return SuiteResult(rep)


def suite_constant() -> SuiteResult:
    rep = VerificationReport("constant-example")
    traj = constant_run()
    dev = float(np.max(np.abs(traj.rho - 1.0)))
    rep.add("max |rho - 1| <= 1e-8", dev <= 1e-8, dev)
    R = traj.drho + traj.params.lam
    gap = float(np.max(np.abs(R - traj.params.lam)))
    rep.add("R == lambda at every sample", gap <= 1e-12, gap)
    rep.add("window end both ways",
            traj.termination_fwd.value == traj.termination_bwd.value == "WindowEnd", 0.0)
    return SuiteResult(rep, [f"samples: {len(traj)}"])


def tip_residual(traj: Trajectory, r_min: float = 0.01, h: float = 1e-3) -> tuple[float, float]:
    """Worst relative ODE residual with rho'' from differencing the dense rho'."""
    p = traj.params
    worst, at = 0.0, None
    for r in traj.r:
        if r <= r_min or r > traj.r_max - 2.5 * h:
            continue
        rho, drho = traj.evaluate(float(r))
        dd = _fd(lambda x: traj.evaluate(x)[1], float(r), h)
        res = eq1_residual(p, rho, drho, dd)
        rel = abs(res.eq1_res) / res.scale
        if rel > worst:
            worst, at = rel, float(r)
    return worst, at


def suite_tip() -> SuiteResult:
    rep = VerificationReport("tip")
    notes = []
    for args in ((3, -1.0, 2.0), (4, -1.0, 3.0)):
        traj = tip_run(*args)
        label = f"n={args[0]} lam={args[1]:g} rbar={args[2]:g}"
        worst, at = tip_residual(traj)
        rep.add(f"{label}: ODE residual for r > 0.01", worst <= TIP_RTOL, worst, at)
        cls = classify(traj)
        rep.add(f"{label}: classified RotationallySymmetricHalfLine",
                cls.branch == Branch.HALF_LINE, 0.0 if cls.branch == Branch.HALF_LINE else 1.0)
        notes.append(f"{label}: {cls.details}")
    return SuiteResult(rep, notes)


SUITES = {
    "constant": suite_constant,
    "eq-consistency": suite_eq_consistency,
    "r-less-lambda": suite_r_less_lambda,
    "r-greater-lambda": suite_r_greater_lambda,
    "claim1": suite_claim1,
    "claim2": suite_claim2,
    "epsilon": suite_epsilon,
    "curvature-routes": suite_curvature_routes,
    "scaling": suite_scaling,
    "tip": suite_tip,
}


def run_suite(name: str, **kw) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return fn(**kw)
