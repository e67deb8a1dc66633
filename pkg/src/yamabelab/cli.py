"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 usage or config error,
3 integration failure, 4 inconclusive.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys

from .classifier import Branch, classify
from .geometry import make_constant_example
from .integrator import (
    FAILURES,
    IntegrationError,
    IntegrationOptions,
    integrate,
    line_from_asymptote,
    sphere_tip_initialize,
)
from .scan import TIP, ConfigError, ScanConfig, applicable_reports, exit_code, render, run_scan, timestamp_line
from .serialize import write_stream
from .soliton_ode import SolitonParams, SolitonState
from .suites import SUITES, run_suite

OK, CHECK_FAILED, USAGE, INTEGRATION_FAILED, INCONCLUSIVE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 by itself; raise instead so main() owns every exit
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@contextlib.contextmanager
def _sink(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _params_args(p: argparse.ArgumentParser, n_default=None) -> None:
    p.add_argument("--n", type=int, required=n_default is None, default=n_default,
                   help="dimension of the soliton, at least 3")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--rbar", type=float, required=True, help="scalar curvature of the fibre")


def _run_args(p: argparse.ArgumentParser) -> None:
    _params_args(p)
    p.add_argument("--rho0", type=float)
    p.add_argument("--drho0", type=float)
    p.add_argument("--tip", action="store_true", help="start next to a smooth tip (rbar > 0)")
    p.add_argument("--r0", type=float, default=1e-4, help="tip start offset")
    p.add_argument("--shoot", action="store_true",
                   help="follow the line solution through rho0 that settles at "
                        "sqrt(rbar/lambda); the sign of drho0 picks the side, and for "
                        "rho' < 0 only the forward half-line is kept")
    p.add_argument("--r-span", type=float, default=IntegrationOptions.r_span)
    p.add_argument("--rtol", type=float, default=IntegrationOptions.rtol)
    p.add_argument("--atol", type=float, default=IntegrationOptions.atol)
    p.add_argument("--direction", choices=("forward", "backward", "both"), default="both")
    p.add_argument("--out", help="output file (default standard output)")


def _options(args) -> IntegrationOptions:
    return IntegrationOptions(r_span=args.r_span, rtol=args.rtol, atol=args.atol)


def _trajectory(args):
    """Run requested by the integrate/classify flags, plus its initial data."""
    params = SolitonParams(args.n, args.lam, args.rbar)
    opts = _options(args)
    if args.tip:
        if args.rho0 is not None or args.drho0 is not None or args.shoot:
            raise UsageError("--tip excludes --rho0, --drho0 and --shoot")
        state = sphere_tip_initialize(params, args.r0)
        return params, integrate(params, state, args.direction, opts), TIP, opts
    if args.rho0 is None or args.drho0 is None:
        raise UsageError("need --rho0 and --drho0, or --tip")
    init = (args.rho0, args.drho0)
    if args.shoot:
        if args.drho0 == 0:
            raise UsageError("--shoot needs a nonzero --drho0 to pick the side")
        traj = line_from_asymptote(params, args.drho0 > 0, args.rho0, opts)
        if args.drho0 < 0:
            traj = traj.restricted(0.0)
        return params, traj, None, opts
    state = SolitonState(0.0, args.rho0, args.drho0)
    return params, integrate(params, state, args.direction, opts), init, opts


def _failed(traj) -> bool:
    return traj.termination_fwd in FAILURES or traj.termination_bwd in FAILURES


def cmd_integrate(args) -> int:
    _, traj, _, _ = _trajectory(args)
    with _sink(args.out) as fh:
        write_stream(traj, fh)
    return INTEGRATION_FAILED if _failed(traj) else OK


def cmd_classify(args) -> int:
    params, traj, init, opts = _trajectory(args)
    cls = classify(traj, args.tol)
    reps = applicable_reports(params, traj, cls, init, opts, literal=init is not None)
    out = cls.as_dict()
    out["checks"] = [dict(c.as_dict(), suite=r.suite) for r in reps for c in r.checks]
    out["suites"] = {r.suite: r.passed for r in reps}
    out["termination_fwd"] = traj.termination_fwd.value
    out["termination_bwd"] = traj.termination_bwd.value
    with _sink(args.out) as fh:
        fh.write(json.dumps(out, indent=2) + "\n")
    if _failed(traj):
        return INTEGRATION_FAILED
    if cls.branch == Branch.INCONCLUSIVE:
        return INCONCLUSIVE
    return OK if all(r.passed for r in reps) else CHECK_FAILED


def cmd_scan(args) -> int:
    cfg = ScanConfig.load(args.config)
    print(f"grid size: {len(cfg)}", file=sys.stderr)
    records = run_scan(cfg)
    text = render(records, cfg.format, timestamp_line())
    with _sink(args.out or cfg.output_path) as fh:
        fh.write(text)
    return exit_code(records)


def cmd_verify(args) -> int:
    kw = {"workers": args.workers} if args.suite == "claim1" else {}
    res = run_suite(args.suite, **kw)
    with _sink(args.out) as fh:
        fh.write(json.dumps(res.as_dict(), indent=2) + "\n")
    return OK if res.passed else CHECK_FAILED


def cmd_example(args) -> int:
    if args.name == "constant":
        half = args.r_span / 2
        traj = make_constant_example(args.n, args.lam, args.rbar, -half, half, args.num)
    else:
        params = SolitonParams(args.n, args.lam, args.rbar)
        opts = IntegrationOptions(r_span=args.r_span)
        traj = integrate(params, sphere_tip_initialize(params), "both", opts)
    with _sink(args.out) as fh:
        write_stream(traj, fh)
    return INTEGRATION_FAILED if _failed(traj) else OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="yamabelab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("integrate", help="integrate one initial condition to a JSONL stream")
    _run_args(p)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("classify", help="classify one run and apply its checks")
    _run_args(p)
    p.add_argument("--tol", type=float, default=1e-9, help="threshold for a flat warp")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("scan", help="sweep a parameter grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="overrides output_path from the config")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", help="run a curated verification suite")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example", help="closed-form constant warp or tip shooting")
    p.add_argument("--name", required=True, choices=("constant", "sphere-tip"))
    _params_args(p, n_default=3)
    p.add_argument("--r-span", type=float, default=20.0)
    p.add_argument("--num", type=int, default=201, help="samples of the constant example")
    p.add_argument("--out")
    p.set_defaults(func=cmd_example)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return INTEGRATION_FAILED
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
