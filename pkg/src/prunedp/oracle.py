"""Brute-force segmentation by enumerating every changepoint subset.

Exponential in ``n``; meant as ground truth for small inputs only.  Ties are
broken the way the dynamic programs break them: prefer the smallest last
changepoint, then the smallest previous one, and so on.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import GaussianCostModel, as_series

N_LIMIT = 20
# relative gap under which two enumerated totals count as a tie
TIE_RTOL = 1e-12


@dataclass
class OracleResult:
    best_penalised: tuple[float, tuple[int, ...]] | None = None
    best_per_k: list[tuple[float, tuple[int, ...]]] = field(default_factory=list)


def _enumerate(series, model, n_limit):
    """Total cost and changepoint count of every subset of ``1..n-1``."""
    n = series.n
    if n > n_limit:
        raise ValueError(f"n={n} exceeds the oracle limit {n_limit}")
    cost = np.zeros((n + 1, n + 1))
    for t in range(n):
        for s in range(t + 1, n + 1):
            cost[t, s] = model.segment_cost(series, t, s)
    masks = np.arange(2 ** (n - 1), dtype=np.int64)
    total = np.zeros(masks.size)
    start = np.zeros(masks.size, dtype=np.int64)
    count = np.zeros(masks.size, dtype=np.int64)
    for i in range(1, n):
        bit = ((masks >> (i - 1)) & 1).astype(bool)
        total[bit] += cost[start[bit], i]
        start[bit] = i
        count[bit] += 1
    total += cost[start, n]
    return masks, total, count


def _changepoints(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(1, n) if mask >> (i - 1) & 1)


def _pick(values, masks, n):
    best = values.min()
    tol = TIE_RTOL * max(1.0, abs(best))
    tied = masks[values <= best + tol]
    cps = min((_changepoints(int(m), n) for m in tied), key=lambda c: c[::-1] + (0,))
    return float(best), cps


def oracle_penalised(series, model=None, beta: float = 0.0, n_limit: int = N_LIMIT) -> OracleResult:
    """Exact minimum of total cost + ``beta`` per changepoint."""
    series = as_series(series)
    model = model or GaussianCostModel()
    masks, total, count = _enumerate(series, model, n_limit)
    return OracleResult(best_penalised=_pick(total + beta * count, masks, series.n))


def oracle_constrained(series, model=None, K: int = 1, n_limit: int = N_LIMIT) -> OracleResult:
    """Exact minimum total cost for each changepoint count ``0..K``."""
    series = as_series(series)
    model = model or GaussianCostModel()
    if not 0 <= K < series.n:
        raise ValueError(f"K={K} must satisfy 0 <= K < n={series.n}")
    masks, total, count = _enumerate(series, model, n_limit)
    per_k = []
    for k in range(K + 1):
        sel = count == k
        per_k.append(_pick(total[sel], masks[sel], series.n))
    return OracleResult(best_per_k=per_k)
