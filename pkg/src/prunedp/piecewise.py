"""Piecewise-quadratic representation of the functional cost ``Cost*(mu)``.

Each live candidate last-changepoint ``tau`` is a :class:`QuadPiece`: the
quadratic ``a mu^2 + b mu + c`` together with the set of ``mu`` on which it is
the minimal candidate.  :class:`PiecewiseState` holds all live pieces; their
validity sets partition the working domain ``D``.

This is the object-level implementation used for inspection and checking.
The solvers in :mod:`prunedp.kernels` run the same recursion on flat arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .model import GaussianCostModel, TimeSeries

# shortest interval kept after an intersection or difference
EPS_LEN = 1e-12
# tolerance on the cover invariant (sum of lengths vs |D|)
COVER_TOL = 1e-6


class PiecewiseInvariantError(RuntimeError):
    """The validity sets stopped partitioning the domain."""


class IntervalSet:
    """Finite union of closed, sorted, pairwise disjoint intervals."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Sequence[float]] = ()):
        self.intervals = _normalize(intervals)

    @classmethod
    def _raw(cls, intervals: list[tuple[float, float]]) -> "IntervalSet":
        obj = cls.__new__(cls)
        obj.intervals = tuple(intervals)
        return obj

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls._raw([])

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __eq__(self, other) -> bool:
        if isinstance(other, IntervalSet):
            return self.intervals == other.intervals
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __repr__(self) -> str:
        if not self.intervals:
            return "IntervalSet(empty)"
        return "IntervalSet(" + " u ".join(f"[{lo:g}, {hi:g}]" for lo, hi in self.intervals) + ")"

    def __and__(self, other: "IntervalSet") -> "IntervalSet":
        return intersect(self, other)

    def __sub__(self, other: "IntervalSet") -> "IntervalSet":
        return subtract(self, other)

    def __or__(self, other: "IntervalSet") -> "IntervalSet":
        return union(self, other)

    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def length(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)

    @property
    def lo(self) -> float:
        return self.intervals[0][0]

    def contains(self, x: float) -> bool:
        return any(lo <= x <= hi for lo, hi in self.intervals)


def _normalize(intervals: Iterable[Sequence[float]]) -> tuple[tuple[float, float], ...]:
    items = []
    for lo, hi in intervals:
        lo, hi = float(lo), float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"interval [{lo}, {hi}] has lo > hi")
        items.append((lo, hi))
    items.sort()
    out: list[tuple[float, float]] = []
    for lo, hi in items:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return tuple(out)


def intersect(set_a: IntervalSet, set_b: IntervalSet) -> IntervalSet:
    """Set intersection; pieces shorter than ``EPS_LEN`` are dropped."""
    a, b = set_a.intervals, set_b.intervals
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if hi - lo >= EPS_LEN:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return IntervalSet._raw(out)


def subtract(base: IntervalSet, cut: IntervalSet) -> IntervalSet:
    """Set difference ``base \\ cut`` (closure taken); short pieces dropped."""
    out = []
    cuts = cut.intervals
    j = 0
    for lo, hi in base.intervals:
        cur = lo
        while j < len(cuts) and cuts[j][1] < cur:
            j += 1
        k = j
        while k < len(cuts) and cuts[k][0] <= hi:
            clo, chi = cuts[k]
            if clo - cur >= EPS_LEN:
                _append(out, cur, clo)
            cur = max(cur, chi)
            if cur >= hi:
                break
            k += 1
        if hi - cur >= EPS_LEN:
            _append(out, cur, hi)
    return IntervalSet._raw(out)


def _append(out: list, lo: float, hi: float) -> None:
    # a cut narrower than EPS_LEN leaves no gap
    if out and lo - out[-1][1] < EPS_LEN:
        out[-1] = (out[-1][0], hi)
    else:
        out.append((lo, hi))


def union(set_a: IntervalSet, set_b: IntervalSet) -> IntervalSet:
    return IntervalSet(set_a.intervals + set_b.intervals)


@dataclass
class QuadPiece:
    """Candidate ``tau`` with cost ``a mu^2 + b mu + c`` on ``valid``."""

    tau: int
    a: float
    b: float
    c: float
    valid: IntervalSet = field(default_factory=IntervalSet.empty)

    def __call__(self, mu):
        return (self.a * mu + self.b) * mu + self.c

    def argmin_on(self, region: IntervalSet) -> tuple[float, float]:
        """Smallest value of the piece over ``region`` and where it occurs."""
        best_v, best_mu = math.inf, math.nan
        if self.a > 0:
            vertex = -self.b / (2.0 * self.a)
        else:
            vertex = None
        for lo, hi in region:
            if vertex is None:
                mu = lo
            elif vertex < lo:
                mu = lo
            elif vertex > hi:
                mu = hi
            else:
                mu = vertex
            v = self(mu)
            if v < best_v:
                best_v, best_mu = v, mu
        return best_v, best_mu


def threshold_interval(piece: QuadPiece, level: float,
                       domain: tuple[float, float] | None = None) -> IntervalSet:
    """``{mu : piece(mu) <= level}``, clipped to ``domain`` when given."""
    a, b, c = piece.a, piece.b, piece.c - level
    if a <= 0:
        raise ValueError("threshold_interval needs a strictly convex piece (a > 0)")
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return IntervalSet.empty()
    root = math.sqrt(disc)
    # sign-aware form avoids cancellation in -b +/- root
    q = -0.5 * (b + math.copysign(root, b))
    if q == 0.0:
        r1 = r2 = -b / (2.0 * a)
    else:
        r1, r2 = q / a, c / q
        if r1 > r2:
            r1, r2 = r2, r1
    if domain is not None:
        r1, r2 = max(r1, domain[0]), min(r2, domain[1])
        if r1 > r2:
            return IntervalSet.empty()
    return IntervalSet._raw([(r1, r2)])


def default_domain(series: TimeSeries, sigma: float = 1.0) -> tuple[float, float]:
    """Data hull widened by three times ``max(sigma, sample std)``."""
    y = series.values
    spread = max(sigma, float(np.std(y)))
    return float(y.min()) - 3.0 * spread, float(y.max()) + 3.0 * spread


class PiecewiseState:
    """All live candidates of ``Cost*(mu)`` at one time step.

    Mutated in place by :meth:`add_point` and :meth:`prune_insert`; both also
    return ``self`` so calls can be chained.
    """

    def __init__(self, domain: tuple[float, float], model: GaussianCostModel | None = None,
                 pieces: list[QuadPiece] | None = None):
        lo, hi = float(domain[0]), float(domain[1])
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"domain must be a finite interval, got {domain!r}")
        self.domain = (lo, hi)
        self.model = model or GaussianCostModel()
        self.pieces: list[QuadPiece] = list(pieces or [])

    @classmethod
    def start(cls, domain, model=None, tau: int = 0, level: float = 0.0) -> "PiecewiseState":
        """State holding one constant candidate valid on the whole domain."""
        state = cls(domain, model)
        state.pieces.append(QuadPiece(tau, 0.0, 0.0, level, IntervalSet._raw([state.domain])))
        return state

    def __len__(self) -> int:
        return len(self.pieces)

    def __repr__(self) -> str:
        return f"PiecewiseState(domain={self.domain}, taus={self.taus})"

    @property
    def taus(self) -> list[int]:
        return [p.tau for p in self.pieces]

    @property
    def domain_set(self) -> IntervalSet:
        return IntervalSet._raw([self.domain])

    def add_point(self, y: float) -> "PiecewiseState":
        if not math.isfinite(y):
            raise ValueError(f"cannot absorb non-finite observation {y!r}")
        w = self.model.inv2s2
        da, db, dc = w, -2.0 * y * w, y * y * w
        for p in self.pieces:
            p.a += da
            p.b += db
            p.c += dc
        return self

    def global_min(self) -> tuple[float, int]:
        """Minimum of ``Cost*`` and the (smallest) candidate attaining it."""
        if not self.pieces:
            raise ValueError("global_min of an empty state")
        best_v, best_tau = math.inf, -1
        for p in self.pieces:
            v, _ = p.argmin_on(p.valid)
            if v < best_v or (v == best_v and p.tau < best_tau):
                best_v, best_tau = v, p.tau
        return best_v, best_tau

    def prune_insert(self, level: float, tau: int, check: bool = True) -> "PiecewiseState":
        """Restrict every piece to where it is below ``level`` and insert the
        constant candidate ``tau`` on the remainder of the domain."""
        cut = IntervalSet.empty()
        for p in self.pieces:
            below = threshold_interval(p, level, self.domain)
            p.valid = intersect(p.valid, below)
            if below:
                cut = union(cut, below)
        fresh = QuadPiece(tau, 0.0, 0.0, level, subtract(self.domain_set, cut))
        live = [p for p in self.pieces if p.valid]
        if fresh.valid:
            live.append(fresh)
        live.sort(key=lambda p: (p.valid.lo, p.tau))
        self.pieces = live
        if check:
            self.check_invariants()
        return self

    def step(self, y: float, new_level: float, new_tau: int, check: bool = True) -> "PiecewiseState":
        return self.add_point(y).prune_insert(new_level, new_tau, check=check)

    def owner(self, mu: float) -> QuadPiece | None:
        for p in self.pieces:
            if p.valid.contains(mu):
                return p
        return None

    def evaluate(self, mu: float) -> float:
        """``Cost*(mu)`` as the minimum over all stored pieces."""
        return min(p(mu) for p in self.pieces)

    def check_invariants(self) -> None:
        lo, hi = self.domain
        total = 0.0
        spans = []
        for p in self.pieces:
            if not p.valid:
                self._fail(f"piece tau={p.tau} has an empty validity set")
            total += p.valid.length
            spans.extend((a, b, p.tau) for a, b in p.valid)
            if p.valid.intervals[0][0] < lo - EPS_LEN or p.valid.intervals[-1][1] > hi + EPS_LEN:
                self._fail(f"piece tau={p.tau} leaves the domain")
        if abs(total - (hi - lo)) > COVER_TOL:
            self._fail(f"validity sets cover {total!r}, domain length {hi - lo!r}")
        spans.sort()
        for (a0, b0, t0), (a1, b1, t1) in zip(spans, spans[1:]):
            if b0 - a1 >= EPS_LEN:
                self._fail(f"validity sets of tau={t0} and tau={t1} overlap on [{a1}, {b0}]")

    def _fail(self, msg: str):
        dump = "\n".join(
            f"  tau={p.tau} a={p.a!r} b={p.b!r} c={p.c!r} valid={p.valid!r}" for p in self.pieces
        )
        raise PiecewiseInvariantError(f"{msg}\nstate dump (domain={self.domain}):\n{dump}")


def add_point(state: PiecewiseState, y: float) -> PiecewiseState:
    return state.add_point(y)


def global_min(state: PiecewiseState) -> tuple[float, int]:
    return state.global_min()


def step(state: PiecewiseState, y: float, new_level: float, new_tau: int) -> PiecewiseState:
    return state.step(y, new_level, new_tau)
