"""Acceptance criteria 1-11, one printed PASS/FAIL line each.

Run with ``pytest -v tests/test_acceptance.py`` or directly as a script.
Criteria 3, 4 and 8 also have a literal reading that cannot hold; those are
kept as strict expected failures so the shortfall stays visible.
"""

from __future__ import annotations

import io
import json
import os
import sys
import tempfile

import numpy as np
import pytest

from yamabelab import suites
from yamabelab.classifier import Branch, classify
from yamabelab.integrator import integrate
from yamabelab.serialize import read_stream, write_stream
from yamabelab.soliton_ode import SolitonParams, SolitonState

from conftest import ACCEPTANCE_LINES, run_cli

# tolerances pinned by the acceptance criteria
CONST_RHO_TOL = 1e-8
FD_RTOL = 1e-4
ASYMPTOTE_TOL = 1e-3
CLAIM2_RTOL = 1e-8
EPS = 0.1
ROUTE_FACTOR = 20.0
SCALING_RTOL = 1e-10
TIP_RTOL = 1e-6

assert (suites.FD_RTOL, suites.ASYMPTOTE_TOL, suites.EPS, suites.ROUTE_FACTOR,
        suites.SCALING_RTOL, suites.TIP_RTOL) == (FD_RTOL, ASYMPTOTE_TOL, EPS, ROUTE_FACTOR,
                                                  SCALING_RTOL, TIP_RTOL)


def report(label: str, passed: bool, detail: str) -> None:
    line = f"criterion {label}: {'PASS' if passed else 'FAIL'}  {detail}"
    # collected lines are printed in the pytest terminal summary
    ACCEPTANCE_LINES.append(line)
    print(line)


def _worst(res, prefix=""):
    vals = [c.worst_residual for c in res.report.checks if c.name.startswith(prefix)]
    return max(vals) if vals else 0.0


def crit1():
    res = suites.suite_constant()
    traj = suites.constant_run()
    dev = float(np.max(np.abs(traj.rho - 1.0)))
    return res.passed, f"max|rho-1| = {dev:.1e} (<= {CONST_RHO_TOL:g}), R = lambda at {len(traj)} samples"


def crit2():
    res = suites.suite_eq_consistency()
    return res.passed, (f"{len(res.report.checks)} trajectories, worst relative gap "
                        f"{_worst(res):.1e} (<= {FD_RTOL:g})")


def crit3():
    res = suites.suite_r_less_lambda()
    return res.passed, "; ".join(res.notes)


def crit4():
    res = suites.suite_r_greater_lambda()
    return res.passed, "; ".join(res.notes)


def crit5():
    res = suites.suite_claim1()
    return res.passed, f"{res.notes[0]} (cap {suites.CLAIM1_CAP:g})"


def crit6():
    res = suites.suite_claim2()
    ident = _worst_named(res, "quadratic root")
    return res.passed, f"{res.notes[0]}, worst root-identity error {ident:.1e} (<= {CLAIM2_RTOL:g})"


def _worst_named(res, suffix):
    vals = [c.worst_residual for c in res.report.checks if c.name.endswith(suffix)]
    return max(vals) if vals else 0.0


def crit7():
    res = suites.suite_epsilon()
    return res.passed, f"eps = {EPS:g}, {len(res.report.checks)} checks, {res.notes[0]}"


def crit8():
    res = suites.suite_curvature_routes()
    return res.passed, "; ".join(res.notes)


def crit9():
    res = suites.suite_scaling()
    return res.passed, (f"b in (0.5, 2), residual image <= {SCALING_RTOL:g}, "
                        f"{len(suites.SCALING_BRANCHES)} branch representatives")


def crit10():
    traj = suites.tip_run()
    worst, at = suites.tip_residual(traj)
    branch = classify(traj).branch
    ok = worst <= TIP_RTOL and branch == Branch.HALF_LINE
    return ok, f"ODE residual {worst:.1e} (<= {TIP_RTOL:g}) for r > 0.01, branch {branch.value}"


def _lines(out):
    return [json.loads(x) for x in out.splitlines() if x.strip()]


def crit11():
    const = ["--n", 3, "--lambda", -1, "--rbar", -1]
    results = {}

    p = run_cli("integrate", *const, "--rho0", 1, "--drho0", 0)
    rows = _lines(p.stdout)
    results["integrate constant"] = p.returncode == 0 and all(r["R"] == -1.0 for r in rows[:-1])

    # the CLI stream and the library trajectory agree bit for bit, both ways
    p = run_cli("integrate", *const, "--rho0", 2, "--drho0", 0.5)
    lib = integrate(SolitonParams(3, -1.0, -1.0), SolitonState(0.0, 2.0, 0.5))
    buf = io.StringIO()
    write_stream(lib, buf)
    back = read_stream(io.StringIO(p.stdout))
    results["round trip"] = (p.stdout == buf.getvalue()
                             and back.samples.tobytes() == lib.samples.tobytes())

    results["integrate n=2 -> 2"] = run_cli(
        "integrate", "--n", 2, "--lambda", -1, "--rbar", -1, "--rho0", 1, "--drho0", 0
    ).returncode == 2
    results["integrate underflow -> 3"] = run_cli(
        "integrate", *const, "--rho0", 2, "--drho0", 0.5, "--rtol", 1e-300, "--atol", 1e-300
    ).returncode == 3

    p = run_cli("classify", *const, "--rho0", 1, "--drho0", 0)
    results["classify Trivial -> 0"] = p.returncode == 0 and json.loads(p.stdout)["branch"] == "Trivial"
    p = run_cli("classify", *const, "--rho0", 2, "--drho0", 0.5, "--shoot")
    results["classify line -> 0"] = (p.returncode == 0
                                     and json.loads(p.stdout)["branch"] == "LineRGreaterLambda")
    results["classify short window -> 4"] = run_cli(
        "classify", *const, "--rho0", 2, "--drho0", 0.5, "--r-span", 0.5).returncode == 4

    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "one.json")
        with open(cfg, "w") as fh:
            json.dump({"n": [3], "lambda": [-1], "rbar": [-1], "rho0": [1], "drho0": [0]}, fh)
        p = run_cli("scan", "--config", cfg)
        recs = _lines(p.stdout)[1:-1]
        results["scan 1 point"] = p.returncode == 0 and len(recs) == 1 and recs[0]["branch"] == "Trivial"
        q = run_cli("scan", "--config", cfg)
        results["scan deterministic"] = p.stdout.splitlines()[1:] == q.stdout.splitlines()[1:]
        with open(cfg, "w") as fh:
            json.dump({"n": [], "lambda": [-1], "rbar": [-1], "rho0": [1], "drho0": [0]}, fh)
        results["scan empty -> 2"] = run_cli("scan", "--config", cfg).returncode == 2

    results["verify eq-consistency -> 0"] = run_cli("verify", "--suite", "eq-consistency").returncode == 0
    results["verify nonsense -> 2"] = run_cli("verify", "--suite", "nonsense").returncode == 2
    p = run_cli("example", "--name", "constant", *const)
    results["example constant"] = p.returncode == 0 and all(r["rho"] == 1.0 for r in _lines(p.stdout)[:-1])
    results["example guard -> 2"] = run_cli(
        "example", "--name", "constant", "--rbar", 1, "--lambda", -1).returncode == 2

    bad = [k for k, v in results.items() if not v]
    return not bad, f"{len(results) - len(bad)}/{len(results)} invocations" + (
        f", failing: {bad}" if bad else "")


CRITERIA = {1: crit1, 2: crit2, 3: crit3, 4: crit4, 5: crit5, 6: crit6, 7: crit7, 8: crit8,
            9: crit9, 10: crit10, 11: crit11}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    passed, detail = CRITERIA[number]()
    report(str(number), passed, detail)
    assert passed, detail


# literal readings that cannot hold -------------------------------------------------

def _literal_less_ok(traj) -> bool:
    c = traj.params.fixed_warp
    return (traj.ddrho.min() > 0 and bool(np.all(np.diff(traj.drho) > 0))
            and traj.asymptote_fwd is not None and abs(traj.asymptote_fwd - c) <= ASYMPTOTE_TOL)


def _literal_greater_ok(traj) -> bool:
    c = traj.params.fixed_warp
    lam = traj.params.lam
    return (traj.drho.min() > 0 and traj.drho.max() < -lam and traj.ddrho.min() >= 0
            and traj.asymptote_bwd is not None and abs(traj.asymptote_bwd - c) <= ASYMPTOTE_TOL)


def _literal(grid, ok):
    total = bad = 0
    for p, rho0, drho0 in suites._grid(grid):
        traj = suites.literal_run(p.n, p.lam, p.rbar, rho0, drho0)
        if classify(traj).branch == Branch.INCONCLUSIVE:
            continue
        total += 1
        bad += not ok(traj)
    return total, bad


@pytest.mark.xfail(strict=True, reason="literal grid data are off the separatrix and collapse")
def test_criterion3_literal_initial_data():
    total, bad = _literal(suites.R_LESS_GRID, _literal_less_ok)
    report("3 (literal initial data)", bad == 0, f"{bad} of {total} non-Inconclusive runs violate")
    assert bad == 0


@pytest.mark.xfail(strict=True, reason="literal grid data are off the separatrix and collapse")
def test_criterion4_literal_initial_data():
    total, bad = _literal(suites.R_GREATER_GRID, _literal_greater_ok)
    report("4 (literal initial data)", bad == 0, f"{bad} of {total} non-Inconclusive runs violate")
    assert bad == 0


@pytest.mark.xfail(strict=True, reason="bound lies below the float64 rounding floor near collapse")
def test_criterion8_every_sample():
    worst, where = 0.0, ""
    for case in [*suites.r_less_cases(), *suites.r_greater_cases()]:
        g = suites.route_gaps(case.traj)
        ratio = g[:, 2] / (suites.OPTS.rtol * np.abs(g[:, 1]) + suites.OPTS.atol)
        if ratio.max() > worst:
            worst, where = float(ratio.max()), case.label
    report("8 (every sample)", worst <= ROUTE_FACTOR,
           f"worst gap {worst:.1e} x (rtol|R|+atol) on {where}")
    assert worst <= ROUTE_FACTOR


if __name__ == "__main__":
    ok = True
    for k in sorted(CRITERIA):
        passed, detail = CRITERIA[k]()
        report(str(k), passed, detail)
        ok &= passed
    sys.exit(0 if ok else 1)
