"""Parameter sweeps: config parsing, per-point runs and record output."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

from .classifier import (
    Branch,
    classify,
    epsilon_propositions_check,
    falsify_claim1,
    verify_claim2,
    verify_r_greater_lambda,
    verify_r_less_lambda,
)
from .integrator import IntegrationOptions, integrate, sphere_tip_initialize
from .soliton_ode import SolitonParams, SolitonState

CSV_HEADER = ("grid_index", "n", "lambda", "rbar", "rho0", "drho0", "branch",
              "asymptote_c", "suite_pass", "termination_fwd", "termination_bwd")
TIP = "tip"


class ConfigError(ValueError):
    pass


def _float_list(obj: dict, key: str) -> list[float]:
    vals = obj.get(key, [])
    if not isinstance(vals, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                              for v in vals):
        raise ConfigError(f"{key!r} must be a list of numbers")
    return [float(v) for v in vals]


@dataclass(frozen=True)
class ScanConfig:
    n: tuple
    lam: tuple
    rbar: tuple
    inits: tuple  # (rho0, drho0) pairs or TIP
    opts: IntegrationOptions = field(default_factory=IntegrationOptions)
    output_path: str | None = None
    format: str = "jsonl"
    workers: int = 1

    @classmethod
    def from_dict(cls, obj: dict) -> "ScanConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        known = {"n", "lambda", "rbar", "rho0", "drho0", "tip", "opts", "format",
                 "output_path", "workers"}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        ns = obj.get("n", [])
        if not isinstance(ns, list) or not all(isinstance(v, int) and not isinstance(v, bool)
                                               for v in ns):
            raise ConfigError("'n' must be a list of integers")
        lam, rbar = _float_list(obj, "lambda"), _float_list(obj, "rbar")
        rho0, drho0 = _float_list(obj, "rho0"), _float_list(obj, "drho0")
        tip = obj.get("tip", False)
        if not isinstance(tip, bool):
            raise ConfigError("'tip' must be a boolean")
        inits = [tuple(x) for x in itertools.product(rho0, drho0)]
        if tip:
            inits.append(TIP)
        if not ns or not lam or not rbar or not inits:
            raise ConfigError("every grid must be nonempty")
        if tip and any(not rb > 0 for rb in rbar):
            raise ConfigError("tip entries require rbar > 0")
        raw = obj.get("opts", {})
        if not isinstance(raw, dict):
            raise ConfigError("'opts' must be an object")
        names = {f.name for f in fields(IntegrationOptions)}
        if set(raw) - names:
            raise ConfigError(f"unknown opts: {sorted(set(raw) - names)}")
        try:
            opts = IntegrationOptions(**raw)
            for n_, l_, r_ in itertools.product(ns, lam, rbar):
                SolitonParams(n_, l_, r_)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        fmt = obj.get("format", "jsonl")
        if fmt not in ("jsonl", "csv"):
            raise ConfigError(f"format must be jsonl or csv, got {fmt!r}")
        workers = obj.get("workers", 1)
        if not isinstance(workers, int) or workers < 1:
            raise ConfigError("'workers' must be a positive integer")
        out = obj.get("output_path")
        if out is not None and not isinstance(out, str):
            raise ConfigError("'output_path' must be a string")
        return cls(tuple(ns), tuple(lam), tuple(rbar), tuple(inits), opts, out, fmt, workers)

    @classmethod
    def load(cls, path: str) -> "ScanConfig":
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(obj)

    def points(self) -> list[tuple]:
        return list(itertools.product(self.n, self.lam, self.rbar, self.inits))

    def __len__(self) -> int:
        return len(self.n) * len(self.lam) * len(self.rbar) * len(self.inits)


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def applicable_reports(params: SolitonParams, traj, cls, init, opts: IntegrationOptions,
                       literal: bool = True) -> list:
    """Verification reports that apply to a classified run.

    The epsilon bounds apply to every trajectory, the branch suites to their
    branch, and the survival protocol to line data with rbar > 0.
    """
    reps = [epsilon_propositions_check(params, traj)]
    if cls.branch == Branch.LINE_R_LESS:
        reps.append(verify_r_less_lambda(traj, params))
    elif cls.branch == Branch.LINE_R_GREATER:
        reps.append(verify_r_greater_lambda(traj, params, opts=opts))
        reps.append(verify_claim2([traj]))
    if literal and params.rbar > 0 and init != TIP and init[0] > 0 and init[1] > 0:
        reps.append(falsify_claim1(params, [tuple(init)], opts))
    return reps


def run_point(args) -> dict:
    """Integrate, classify and check one grid point; never raises."""
    index, (n, lam, rbar, init), opts = args
    try:
        params = SolitonParams(n, lam, rbar)
        if init == TIP:
            state = sphere_tip_initialize(params)
            init_d = {"tip": True, "rho0": state.rho, "drho0": state.drho, "r0": state.r}
        else:
            state = SolitonState(0.0, init[0], init[1])
            init_d = {"tip": False, "rho0": init[0], "drho0": init[1], "r0": 0.0}
        traj = integrate(params, state, "both", opts)
        cls = classify(traj)
        suites = {r.suite: r.passed for r in applicable_reports(params, traj, cls, init, opts)}
        terminal = {}
        for d, key in ((1, "fwd"), (-1, "bwd")):
            row = traj.samples[-1] if d > 0 else traj.samples[0]
            terminal[key] = {"r": float(row[0]), "rho": float(row[1]), "drho": float(row[2])}
        return {
            "grid_index": index,
            "params": params.as_dict(),
            "init": init_d,
            "branch": cls.branch.value,
            "asymptote_c": _clean(cls.asymptote_c),
            "details": cls.details,
            "report_summary": suites,
            "suite_pass": all(suites.values()),
            "termination_fwd": traj.termination_fwd.value,
            "termination_bwd": traj.termination_bwd.value,
            "terminal": terminal,
        }
    except Exception as exc:  # sentinel record, keeps the rest of the scan alive
        return {"grid_index": index, "status": "FAILED",
                "error": f"{type(exc).__name__}: {exc}"}


def run_scan(cfg: ScanConfig) -> list[dict]:
    jobs = [(i, pt, cfg.opts) for i, pt in enumerate(cfg.points())]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(run_point, jobs))
    else:
        records = [run_point(j) for j in jobs]
    return sorted(records, key=lambda r: r["grid_index"])


def summarize(records: list[dict]) -> dict:
    branches: dict = {}
    suites: dict = {}
    failed = 0
    for rec in records:
        if rec.get("status") == "FAILED":
            failed += 1
            continue
        branches[rec["branch"]] = branches.get(rec["branch"], 0) + 1
        for name, ok in rec["report_summary"].items():
            s = suites.setdefault(name, [0, 0])
            s[0] += bool(ok)
            s[1] += 1
    return {
        "records": len(records),
        "failed": failed,
        "branch_counts": dict(sorted(branches.items())),
        "suite_pass_rates": {k: v[0] / v[1] for k, v in sorted(suites.items())},
        "all_pass": failed == 0 and all(v[0] == v[1] for v in suites.values()),
    }


def timestamp_line() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def render(records: list[dict], fmt: str, stamp: str) -> str:
    """Whole output file; only the first line depends on ``stamp``."""
    summary = summarize(records)
    buf = io.StringIO()
    if fmt == "jsonl":
        buf.write(json.dumps({"generated": stamp}) + "\n")
        for rec in records:
            buf.write(json.dumps(rec) + "\n")
        buf.write(json.dumps({"summary": summary}) + "\n")
        return buf.getvalue()
    buf.write(f"# generated {stamp}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        if rec.get("status") == "FAILED":
            w.writerow([rec["grid_index"], "FAILED", rec["error"]])
            continue
        p, init = rec["params"], rec["init"]
        rho0, drho0 = (TIP, TIP) if init["tip"] else (init["rho0"], init["drho0"])
        c = rec["asymptote_c"]
        w.writerow([rec["grid_index"], p["n"], repr(p["lambda"]), repr(p["rbar"]), rho0, drho0,
                    rec["branch"], "" if c is None else repr(c), rec["suite_pass"],
                    rec["termination_fwd"], rec["termination_bwd"]])
    buf.write("# summary " + json.dumps(summary) + "\n")
    return buf.getvalue()


def exit_code(records: list[dict]) -> int:
    if any(r.get("status") == "FAILED" for r in records):
        return 3
    return 0 if summarize(records)["all_pass"] else 1


__all__ = ["ConfigError", "ScanConfig", "applicable_reports", "run_point", "run_scan", "summarize", "render",
           "exit_code", "CSV_HEADER", "TIP"]
