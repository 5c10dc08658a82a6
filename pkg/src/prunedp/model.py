"""Gaussian change-in-mean cost model, sufficient statistics and penalties."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# segment costs in [-COST_GUARD, 0) are rounding noise
COST_GUARD = 1e-9


class TimeSeries:
    """Immutable series of observations with cumulative sums.

    ``cum_sum[t]`` is the sum of the first ``t`` values, so the statistics of
    ``values[t:s]`` (the points ``t+1 .. s`` in 1-based terms) are available in
    O(1) as differences.
    """

    __slots__ = ("values", "cum_sum", "cum_sumsq")

    def __init__(self, values: Sequence[float] | np.ndarray):
        y = np.array(values, dtype=np.float64).ravel()
        if y.size < 1:
            raise ValueError("a time series needs at least one observation")
        if not np.all(np.isfinite(y)):
            raise ValueError("time series contains non-finite values")

        # accumulate in extended precision, store as double for the kernels
        acc = y.astype(np.longdouble)
        cs = np.zeros(y.size + 1, dtype=np.longdouble)
        css = np.zeros(y.size + 1, dtype=np.longdouble)
        np.cumsum(acc, out=cs[1:])
        np.cumsum(acc * acc, out=css[1:])

        y.setflags(write=False)
        cs = cs.astype(np.float64)
        css = css.astype(np.float64)
        cs.setflags(write=False)
        css.setflags(write=False)
        object.__setattr__(self, "values", y)
        object.__setattr__(self, "cum_sum", cs)
        object.__setattr__(self, "cum_sumsq", css)

    def __setattr__(self, name, value):
        raise AttributeError("TimeSeries is immutable")

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"TimeSeries(n={self.n})"

    def segment_sum(self, t: int, s: int) -> float:
        return float(self.cum_sum[s] - self.cum_sum[t])

    def segment_mean(self, t: int, s: int) -> float:
        return self.segment_sum(t, s) / (s - t)


@dataclass(frozen=True)
class GaussianCostModel:
    """Quadratic loss ``(y - mu)^2 / (2 sigma^2)`` for a change in mean."""

    sigma: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma!r}")

    @property
    def inv2s2(self) -> float:
        return 1.0 / (2.0 * self.sigma * self.sigma)

    def pointwise_cost(self, y: float, mu: float) -> float:
        if not (math.isfinite(y) and math.isfinite(mu)):
            raise ValueError("pointwise cost needs finite y and mu")
        d = y - mu
        return d * d * self.inv2s2

    def segment_cost(self, series: TimeSeries, t: int, s: int) -> float:
        """Cost of ``y[t+1 .. s]`` (1-based, inclusive), i.e. ``values[t:s]``."""
        n = series.n
        if not (0 <= t < s <= n):
            raise IndexError(f"segment ({t}, {s}] outside 0 <= t < s <= {n}")
        d = series.cum_sum[s] - series.cum_sum[t]
        rss = (series.cum_sumsq[s] - series.cum_sumsq[t]) - d * d / (s - t)
        cost = float(rss * self.inv2s2)
        return cost if cost > 0.0 else 0.0


@dataclass(frozen=True)
class Penalty:
    """Penalty settings.

    ``beta`` is the per-changepoint cost of the penalised problem, ``kappa``
    the pruning slack for inequality-based pruning (0 is valid for the
    Gaussian cost) and ``kmax`` the largest changepoint count of the
    constrained problem.
    """

    beta: float = 0.0
    kappa: float = 0.0
    kmax: int | None = None

    def __post_init__(self):
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be a finite non-negative number, got {self.beta!r}")
        if not math.isfinite(self.kappa):
            raise ValueError("kappa must be finite")
        if self.kmax is not None and self.kmax < 1:
            raise ValueError("kmax must be a positive integer")

    def check(self, series: TimeSeries) -> None:
        if self.kmax is not None and self.kmax >= series.n:
            raise ValueError(f"kmax={self.kmax} must be smaller than n={series.n}")


def as_series(data) -> TimeSeries:
    return data if isinstance(data, TimeSeries) else TimeSeries(data)


def segment_cost(series: TimeSeries, t: int, s: int, sigma: float = 1.0) -> float:
    return GaussianCostModel(sigma).segment_cost(series, t, s)


def pointwise_cost(model: GaussianCostModel, y: float, mu: float) -> float:
    return model.pointwise_cost(y, mu)


def default_penalty(series: TimeSeries | int, sigma: float = 1.0) -> float:
    """SIC-style penalty ``2 sigma^2 log(n)``."""
    n = series if isinstance(series, (int, np.integer)) else series.n
    if n < 2:
        raise ValueError("default penalty needs n >= 2")
    return 2.0 * sigma * sigma * math.log(n)
