"""Exact penalised and constrained changepoint solvers.

Penalised (minimise cost + beta per changepoint):
    :func:`op_solve`, :func:`pelt_solve`, :func:`fpop_solve`
Constrained (best segmentation with exactly k changepoints, k <= K):
    :func:`sns_solve`, :func:`snip_solve`, :func:`pdpa_solve`
Greedy comparator:
    :func:`binseg_solve`

Changepoints are reported as the 1-based index of the last point of each
segment, so ``[3]`` splits ``y1..y6`` into ``y1..y3`` and ``y4..y6``.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .model import GaussianCostModel, TimeSeries, as_series
from .piecewise import PiecewiseState, default_domain

# store the full C[k][t] table only below this many entries
FULL_TABLE_LIMIT = 10_000_000

PENALISED = ("op", "pelt", "fpop")
CONSTRAINED = ("sns", "snip", "pdpa")
METHODS = PENALISED + CONSTRAINED + ("binseg",)


@dataclass
class Segmentation:
    changepoints: tuple[int, ...]
    total_cost: float
    penalised_objective: float | None = None
    means: tuple[float, ...] = ()

    @property
    def k(self) -> int:
        return len(self.changepoints)


@dataclass
class ConstrainedResult:
    """Optimal segmentations with 0..K changepoints.

    ``costs`` is the full ``C[k][t]`` table (``inf`` where undefined) when it
    fits under :data:`FULL_TABLE_LIMIT`, otherwise only the last column.
    """

    costs: np.ndarray
    segmentations: list[Segmentation]

    @property
    def kmax(self) -> int:
        return len(self.segmentations) - 1

    @property
    def final_costs(self) -> np.ndarray:
        return self.costs[:, -1] if self.costs.ndim == 2 else self.costs

    def best_penalised(self, beta: float) -> tuple[float, int]:
        vals = self.final_costs + beta * np.arange(self.kmax + 1)
        k = int(np.argmin(vals))
        return float(vals[k]), k


@dataclass
class RunTrace:
    """Per-step diagnostics.

    ``candidate_count[t]`` (penalised) or ``candidate_count[k, t]``
    (constrained) is the number of candidate last changepoints minimised over
    at time ``t``; entries never processed are 0.  ``pruned_at`` lists
    ``(t, tau)`` or ``(k, t, tau)`` for every candidate discarded at step t.
    """

    method: str
    candidate_count: np.ndarray | None = None
    pruned_at: list[tuple[int, ...]] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def constrained(self) -> bool:
        return self.candidate_count is not None and self.candidate_count.ndim == 2

    def rows(self):
        """``(t, k, count)`` for every processed step, ``k`` is None when penalised."""
        cc = self.candidate_count
        if cc is None:
            return
        if cc.ndim == 1:
            for t in range(1, cc.shape[0]):
                yield t, None, int(cc[t])
        else:
            n = cc.shape[1] - 1
            for k in range(1, cc.shape[0]):
                for t in range(k + 1, n + 1):
                    yield t, k, int(cc[k, t])

    def candidate_sets(self, k: int | None = None) -> dict[int, frozenset[int]]:
        """Replay ``pruned_at`` into the candidate set used at every step.

        Raises ``ValueError`` if a candidate is pruned twice or reappears.
        """
        cc = self.candidate_count
        if cc is None:
            raise ValueError("trace was not collected")
        if cc.ndim == 2:
            if k is None:
                raise ValueError("constrained traces need k")
            events = [(t, tau) for kk, t, tau in self.pruned_at if kk == k]
            first, n = k, cc.shape[1] - 1
        else:
            events = list(self.pruned_at)
            first, n = 0, cc.shape[0] - 1
        by_t: dict[int, list[int]] = {}
        for t, tau in events:
            by_t.setdefault(t, []).append(tau)
        alive = {first}
        dead: set[int] = set()
        out = {}
        for t in range(first + 1, n + 1):
            out[t] = frozenset(alive)
            alive.add(t)
            for tau in by_t.get(t, ()):
                if tau in dead or tau not in alive:
                    raise ValueError(f"candidate {tau} pruned at t={t} is not alive")
                alive.discard(tau)
                dead.add(tau)
        return out


def _model(model) -> GaussianCostModel:
    if model is None:
        return GaussianCostModel()
    if isinstance(model, (int, float)):
        return GaussianCostModel(float(model))
    return model


def segmentation_from(series: TimeSeries, model: GaussianCostModel, changepoints,
                      beta: float | None = None, objective: float | None = None) -> Segmentation:
    """Build a :class:`Segmentation`, recomputing cost and means from the data."""
    cps = tuple(int(c) for c in changepoints)
    bounds = (0,) + cps + (series.n,)
    total = 0.0
    means = []
    for t, s in zip(bounds, bounds[1:]):
        total += model.segment_cost(series, t, s)
        means.append(series.segment_mean(t, s))
    if objective is None and beta is not None:
        objective = total + beta * len(cps)
    return Segmentation(cps, total, objective, tuple(means))


def _trace_arrays(n: int, trace: bool):
    if trace:
        return (np.zeros(n + 1, dtype=np.int64), np.empty(n + 1, dtype=np.int64),
                np.empty(n + 1, dtype=np.int64))
    dummy = np.zeros(1, dtype=np.int64)
    return dummy, dummy, dummy


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not (beta >= 0 and math.isfinite(beta)):
        raise ValueError(f"beta must be finite and non-negative, got {beta!r}")
    return beta


# ----------------------------------------------------------------- penalised

def _penalised(method, series, model, beta, run):
    series = as_series(series)
    model = _model(model)
    beta = _check_beta(beta)
    n = series.n
    F = np.empty(n + 1, dtype=np.float64)
    F[0] = -beta
    last = np.zeros(n + 1, dtype=np.int64)
    t0 = time.perf_counter()
    tr = run(series.cum_sum, series.cum_sumsq, model.inv2s2, F, last, beta)
    elapsed = time.perf_counter() - t0
    cps = kernels.backtrack(last)
    seg = segmentation_from(series, model, cps, beta, objective=float(F[n]))
    if tr is None:
        tr = RunTrace(method)
    tr.wall_time = elapsed
    return seg, tr


def op_solve(series, model=None, beta: float = 0.0, trace: bool = True):
    """Optimal Partitioning: exact O(n^2) penalised recursion."""
    def run(cs, css, inv, F, last, beta):
        kernels.full_sweep(cs, css, inv, F, F, last, beta, 0)
        if trace:
            return RunTrace("op", np.arange(cs.shape[0], dtype=np.int64))
    return _penalised("op", series, model, beta, run)


def pelt_solve(series, model=None, beta: float = 0.0, kappa: float = 0.0, trace: bool = True):
    """Optimal Partitioning with inequality-based (PELT) pruning."""
    def run(cs, css, inv, F, last, beta):
        n = cs.shape[0] - 1
        counts, ev_t, ev_tau = _trace_arrays(n, trace)
        nev = kernels.inequality_sweep(cs, css, inv, F, F, last, beta, float(kappa), 0,
                                       trace, counts, ev_t, ev_tau)
        if trace:
            return RunTrace("pelt", counts, list(zip(ev_t[:nev].tolist(), ev_tau[:nev].tolist())))
    return _penalised("pelt", series, model, beta, run)


def fpop_solve(series, model=None, beta: float = 0.0, trace: bool = True,
               engine: str = "kernel", domain: tuple[float, float] | None = None,
               on_step: Callable | None = None):
    """Optimal Partitioning with functional pruning (FPOP).

    ``engine="kernel"`` runs the flat-array sweep; ``engine="piecewise"`` steps
    a :class:`~prunedp.piecewise.PiecewiseState` and calls
    ``on_step(t, state, F_t)`` after every step.
    """
    series = as_series(series)
    model = _model(model)
    dlo, dhi = domain or default_domain(series, model.sigma)
    if engine == "piecewise":
        return _fpop_piecewise(series, model, _check_beta(beta), trace, (dlo, dhi), on_step)
    if engine != "kernel":
        raise ValueError(f"unknown engine {engine!r}")

    def run(cs, css, inv, F, last, beta):
        n = cs.shape[0] - 1
        counts, ev_t, ev_tau = _trace_arrays(n, trace)
        nev = kernels.functional_sweep(cs, css, inv, F, F, last, beta, 0, dlo, dhi,
                                       trace, counts, ev_t, ev_tau)
        if trace:
            return RunTrace("fpop", counts, list(zip(ev_t[:nev].tolist(), ev_tau[:nev].tolist())))
    return _penalised("fpop", series, model, beta, run)


def _fpop_piecewise(series, model, beta, trace, domain, on_step):
    n = series.n
    F = np.empty(n + 1)
    F[0] = -beta
    last = np.zeros(n + 1, dtype=np.int64)
    counts = np.zeros(n + 1, dtype=np.int64)
    pruned = []
    t0 = time.perf_counter()
    state = PiecewiseState.start(domain, model, tau=0, level=F[0] + beta)
    for t in range(1, n + 1):
        state.add_point(series.values[t - 1])
        F[t], last[t] = state.global_min()
        before = state.taus
        counts[t] = len(before)
        state.prune_insert(F[t] + beta, t)
        if trace:
            after = set(state.taus)
            pruned.extend((t, tau) for tau in before + [t] if tau not in after)
        if on_step is not None:
            on_step(t, state, F[t])
    elapsed = time.perf_counter() - t0
    seg = segmentation_from(series, model, kernels.backtrack(last), beta, objective=float(F[n]))
    tr = RunTrace("fpop", counts if trace else None, pruned, elapsed)
    return seg, tr


# --------------------------------------------------------------- constrained

def _check_kmax(series: TimeSeries, K: int) -> int:
    K = int(K)
    if K < 0:
        raise ValueError("K must be non-negative")
    if K >= series.n:
        raise ValueError(f"K={K} must be smaller than n={series.n}")
    return K


def _constrained(method, series, model, K, sweep, trace):
    series = as_series(series)
    model = _model(model)
    K = _check_kmax(series, K)
    n = series.n
    cs, css, inv = series.cum_sum, series.cum_sumsq, model.inv2s2
    full = (K + 1) * (n + 1) <= FULL_TABLE_LIMIT
    ptr = np.zeros((K + 1, n + 1), dtype=np.int32 if n < 2**31 - 1 else np.int64)
    table = np.full((K + 1, n + 1), np.inf) if full else None
    counts = np.zeros((K + 1, n + 1), dtype=np.int64) if trace else None
    pruned: list[tuple[int, int, int]] = []
    final = np.full(K + 1, np.inf)
    argmin = np.zeros(n + 1, dtype=np.int64)

    t0 = time.perf_counter()
    prev = np.full(n + 1, np.inf)
    for t in range(1, n + 1):
        prev[t] = kernels.seg_cost(cs, css, inv, 0, t)
    final[0] = prev[n]
    if full:
        table[0] = prev
    for k in range(1, K + 1):
        cur = np.full(n + 1, np.inf)
        argmin[:] = 0
        cnt, ev = sweep(cs, css, inv, prev, cur, argmin, k, trace)
        ptr[k] = argmin
        if trace:
            counts[k] = cnt
            pruned.extend((k, t, tau) for t, tau in ev)
        final[k] = cur[n]
        if full:
            table[k] = cur
        prev = cur
    elapsed = time.perf_counter() - t0

    segs = [segmentation_from(series, model, ())]
    for k in range(1, K + 1):
        cps = [0] * k
        t = n
        for l in range(k, 0, -1):
            t = int(ptr[l, t])
            cps[l - 1] = t
        segs.append(segmentation_from(series, model, cps))
    result = ConstrainedResult(table if full else final, segs)
    return result, RunTrace(method, counts, pruned, elapsed)


def _events(nev, ev_t, ev_tau):
    return list(zip(ev_t[:nev].tolist(), ev_tau[:nev].tolist()))


def sns_solve(series, model=None, K: int = 1, trace: bool = True):
    """Segment Neighbourhood Search: exact O(K n^2) constrained recursion."""
    def sweep(cs, css, inv, prev, cur, argmin, k, trace):
        kernels.full_sweep(cs, css, inv, prev, cur, argmin, 0.0, k)
        n = cs.shape[0] - 1
        cnt = np.zeros(n + 1, dtype=np.int64)
        cnt[k + 1:] = np.arange(1, n - k + 1)
        return cnt, []
    return _constrained("sns", series, model, K, sweep, trace)


def snip_solve(series, model=None, K: int = 1, kappa: float = 0.0, trace: bool = True):
    """Segment Neighbourhood Search with inequality-based pruning (SNIP)."""
    def sweep(cs, css, inv, prev, cur, argmin, k, trace):
        n = cs.shape[0] - 1
        counts, ev_t, ev_tau = _trace_arrays(n, trace)
        nev = kernels.inequality_sweep(cs, css, inv, prev, cur, argmin, 0.0, float(kappa), k,
                                       trace, counts, ev_t, ev_tau)
        return counts, _events(nev, ev_t, ev_tau)
    return _constrained("snip", series, model, K, sweep, trace)


def pdpa_solve(series, model=None, K: int = 1, trace: bool = True,
               engine: str = "kernel", domain: tuple[float, float] | None = None,
               on_step: Callable | None = None):
    """Segment Neighbourhood Search with functional pruning (pDPA).

    ``on_step(k, t, state, C_kt)`` is called after every step when
    ``engine="piecewise"``.
    """
    series = as_series(series)
    model = _model(model)
    dlo, dhi = domain or default_domain(series, model.sigma)
    if engine == "kernel":
        def sweep(cs, css, inv, prev, cur, argmin, k, trace):
            n = cs.shape[0] - 1
            counts, ev_t, ev_tau = _trace_arrays(n, trace)
            nev = kernels.functional_sweep(cs, css, inv, prev, cur, argmin, 0.0, k, dlo, dhi,
                                           trace, counts, ev_t, ev_tau)
            return counts, _events(nev, ev_t, ev_tau)
    elif engine == "piecewise":
        y = series.values

        def sweep(cs, css, inv, prev, cur, argmin, k, trace):
            n = cs.shape[0] - 1
            counts = np.zeros(n + 1, dtype=np.int64)
            events = []
            state = PiecewiseState.start((dlo, dhi), model, tau=k, level=prev[k])
            for t in range(k + 1, n + 1):
                state.add_point(y[t - 1])
                cur[t], argmin[t] = state.global_min()
                before = state.taus
                counts[t] = len(before)
                state.prune_insert(prev[t], t)
                if trace:
                    after = set(state.taus)
                    events.extend((t, tau) for tau in before + [t] if tau not in after)
                if on_step is not None:
                    on_step(k, t, state, cur[t])
            return counts, events
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return _constrained("pdpa", series, model, K, sweep, trace)


# ------------------------------------------------------------------- binseg

def binseg_solve(series, model=None, K: int | None = None, beta: float = 0.0,
                 trace: bool = True):
    """Greedy binary segmentation.

    Repeatedly applies the single split with the largest cost reduction,
    stopping after ``K`` splits or when no split reduces the cost by at least
    ``beta`` (and by a positive amount).  Not guaranteed optimal.
    """
    series = as_series(series)
    model = _model(model)
    beta = _check_beta(beta)
    n = series.n
    K = n - 1 if K is None else int(K)
    if K < 0:
        raise ValueError("K must be non-negative")
    cs, css, inv = series.cum_sum, series.cum_sumsq, model.inv2s2

    t0 = time.perf_counter()
    heap = []

    def push(t, s):
        if s - t >= 2:
            gain, j = kernels.best_split(cs, css, inv, t, s)
            heapq.heappush(heap, (-gain, j, t, s))

    push(0, n)
    cps = []
    while heap and len(cps) < K:
        neg_gain, j, t, s = heap[0]
        gain = -neg_gain
        if gain < beta or gain <= 0.0:
            break
        heapq.heappop(heap)
        cps.append(j)
        push(t, j)
        push(j, s)
    elapsed = time.perf_counter() - t0
    cps.sort()
    seg = segmentation_from(series, model, cps, beta)
    return seg, RunTrace("binseg", None, [], elapsed)


# -------------------------------------------------------------- consistency

def penalised_constrained_consistency(series, model=None, beta: float = 0.0, K: int = 1,
                                      rtol: float = 1e-9) -> bool | None:
    """Check ``min_k C[k, n] + beta k == F(n)``.

    Returns None (inconclusive) when the penalised optimum uses more than
    ``K`` changepoints.
    """
    series = as_series(series)
    seg, _ = fpop_solve(series, model, beta, trace=False)
    if seg.k > K:
        return None
    res, _ = sns_solve(series, model, K, trace=False)
    value, _ = res.best_penalised(beta)
    return close(value, seg.penalised_objective, rtol)


def close(a: float, b: float, rtol: float = 1e-9) -> bool:
    """Relative comparison with an absolute floor of ``rtol`` near zero."""
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


# ---------------------------------------------------------------- dispatch

def solve(method: str, series, model=None, beta: float | None = None, K: int | None = None,
          kappa: float = 0.0, trace: bool = True):
    """Run any solver by name; returns ``(result, trace)``."""
    if method == "op":
        return op_solve(series, model, beta, trace)
    if method == "pelt":
        return pelt_solve(series, model, beta, kappa, trace)
    if method == "fpop":
        return fpop_solve(series, model, beta, trace)
    if method == "sns":
        return sns_solve(series, model, K, trace)
    if method == "snip":
        return snip_solve(series, model, K, kappa, trace)
    if method == "pdpa":
        return pdpa_solve(series, model, K, trace)
    if method == "binseg":
        return binseg_solve(series, model, K, beta if beta is not None else 0.0, trace)
    raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
