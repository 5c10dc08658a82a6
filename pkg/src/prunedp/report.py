"""Reading input series and serialising solver reports.

JSON report schema (keys marked ? are omitted when not applicable)::

    method            solver name
    n                 series length
    beta?             penalty per changepoint (penalised methods, binseg)
    kmax?             largest changepoint count (constrained methods, binseg)
    sigma, kappa      cost-model noise level, inequality-pruning slack
    changepoints      1-based last index of each segment but the final one
    k                 number of changepoints
    total_cost        sum of segment costs
    penalised_objective?  total_cost + beta * k
    means             fitted segment means
    wall_time_ms      solver time only (no I/O)
    segmentations?    constrained methods: [{k, total_cost, changepoints}] for k = 0..kmax;
                      the top-level fields then describe k = kmax
    trace?            {"candidate_count": [...], "pruned_at": [[t, tau] or [k, t, tau], ...]}
    fingerprint       {"n", "checksum" (sha256 of the float64 values), "params"}
"""
from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .algorithms import ConstrainedResult, RunTrace, Segmentation


class InputError(ValueError):
    """Unreadable series file."""


def read_series(path: str | Path) -> np.ndarray:
    """Parse one number per line; an optional first line ``value`` is a header."""
    if str(path) == "-":
        lines = sys.stdin.read().splitlines()
        name = "<stdin>"
    else:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        name = str(path)
    values = []
    seen_data = False
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip().rstrip(",").strip().strip('"')
        if not text:
            continue
        if not seen_data and text.lower() == "value":
            seen_data = True
            continue
        seen_data = True
        try:
            v = float(text)
        except ValueError:
            raise InputError(f"{name}:{lineno}: cannot parse {raw!r} as a number") from None
        if not np.isfinite(v):
            raise InputError(f"{name}:{lineno}: non-finite value {raw!r}")
        values.append(v)
    if not values:
        raise InputError(f"{name}: no data")
    return np.asarray(values, dtype=np.float64)


def checksum(values: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(values, dtype="<f8").tobytes()).hexdigest()


@dataclass
class RunReport:
    method: str
    n: int
    changepoints: list[int]
    k: int
    total_cost: float
    means: list[float]
    wall_time_ms: float
    sigma: float = 1.0
    kappa: float = 0.0
    beta: float | None = None
    kmax: int | None = None
    penalised_objective: float | None = None
    segmentations: list[dict] | None = None
    trace: dict | None = None
    fingerprint: dict = field(default_factory=dict)

    @classmethod
    def build(cls, method: str, values: np.ndarray, result, run_trace: RunTrace | None,
              *, sigma: float = 1.0, kappa: float = 0.0, beta: float | None = None,
              kmax: int | None = None, include_trace: bool = False) -> "RunReport":
        segs = None
        if isinstance(result, ConstrainedResult):
            segs = [{"k": s.k, "total_cost": s.total_cost, "changepoints": list(s.changepoints)}
                    for s in result.segmentations]
            seg: Segmentation = result.segmentations[-1]
        else:
            seg = result
        trace = None
        if include_trace and run_trace is not None and run_trace.candidate_count is not None:
            trace = {"candidate_count": run_trace.candidate_count.tolist(),
                     "pruned_at": [list(e) for e in run_trace.pruned_at]}
        params = {"method": method, "sigma": sigma, "kappa": kappa, "beta": beta, "kmax": kmax}
        return cls(
            method=method,
            n=int(values.size),
            changepoints=list(seg.changepoints),
            k=seg.k,
            total_cost=seg.total_cost,
            means=list(seg.means),
            wall_time_ms=(run_trace.wall_time * 1e3) if run_trace is not None else 0.0,
            sigma=sigma,
            kappa=kappa,
            beta=beta,
            kmax=kmax,
            penalised_objective=seg.penalised_objective,
            segmentations=segs,
            trace=trace,
            fingerprint={"n": int(values.size), "checksum": checksum(values), "params": params},
        )

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))
