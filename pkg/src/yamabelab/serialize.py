"""JSONL sample streams.

One JSON object per sample, then a trailing summary object.  Floats are
written with ``repr`` precision, so reading a stream back reproduces every
number bit for bit.
"""

from __future__ import annotations

import json
import math
from typing import IO, Iterable

import numpy as np

from .integrator import Event, EventKind, Termination, Trajectory
from .soliton_ode import SolitonParams, SolitonState


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def sample_lines(traj: Trajectory) -> Iterable[str]:
    lam = traj.params.lam
    for r, rho, drho, dd in traj.samples:
        yield json.dumps({"r": float(r), "rho": float(rho), "drho": float(drho),
                          "ddrho": float(dd), "R": float(drho) + lam})


def summary_dict(traj: Trajectory) -> dict:
    return {
        "params": traj.params.as_dict(),
        "r_init": traj.r_init,
        "events": [{k: (_num(v) if isinstance(v, float) else v) for k, v in e.as_dict().items()}
                   for e in traj.events],
        "termination_fwd": traj.termination_fwd.value,
        "termination_bwd": traj.termination_bwd.value,
        "asymptote_fwd": traj.asymptote_fwd,
        "asymptote_bwd": traj.asymptote_bwd,
    }


def write_stream(traj: Trajectory, fh: IO[str], extra: dict | None = None) -> None:
    for line in sample_lines(traj):
        fh.write(line + "\n")
    summary = summary_dict(traj)
    if extra:
        summary.update(extra)
    fh.write(json.dumps(summary) + "\n")


def read_stream(lines: Iterable[str]) -> Trajectory:
    """Parse a stream written by :func:`write_stream` (no dense output)."""
    rows, summary = [], None
    for line in lines:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        if "termination_fwd" in obj:
            summary = obj
        else:
            rows.append((obj["r"], obj["rho"], obj["drho"], obj["ddrho"]))
    if summary is None:
        raise ValueError("stream has no summary line")
    p = summary["params"]
    params = SolitonParams(p["n"], p["lambda"], p["rbar"], permissive=not p["lambda"] < 0)
    events = []
    for e in summary["events"]:
        dd = math.nan if e["ddrho"] is None else e["ddrho"]
        ddd = math.nan if e["dddrho"] is None else e["dddrho"]
        events.append(Event(EventKind(e["kind"]), e["r"], SolitonState(e["r"], e["rho"], e["drho"]),
                            dd, ddd, e["direction"]))
    return Trajectory(
        params=params,
        samples=np.array(rows, dtype=float).reshape(-1, 4),
        events=tuple(events),
        termination_fwd=Termination(summary["termination_fwd"]),
        termination_bwd=Termination(summary["termination_bwd"]),
        r_init=summary["r_init"],
        asymptote_fwd=summary["asymptote_fwd"],
        asymptote_bwd=summary["asymptote_bwd"],
    )
