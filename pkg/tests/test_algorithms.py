import math

import numpy as np
import pytest

from conftest import piecewise_constant, rel_close
from prunedp import algorithms as alg
from prunedp.algorithms import (
    binseg_solve,
    fpop_solve,
    op_solve,
    pdpa_solve,
    pelt_solve,
    penalised_constrained_consistency,
    snip_solve,
    sns_solve,
)
from prunedp.model import GaussianCostModel, TimeSeries, default_penalty
from prunedp.oracle import oracle_constrained, oracle_penalised

PENALISED = [op_solve, pelt_solve, fpop_solve]
CONSTRAINED = [sns_solve, snip_solve, pdpa_solve]


def recomputed_cost(y, cps, sigma=1.0):
    bounds = [0, *cps, len(y)]
    return sum(float(np.sum((y[a:b] - y[a:b].mean()) ** 2)) / (2 * sigma**2)
               for a, b in zip(bounds, bounds[1:]))


class TestPenalisedExamples:
    @pytest.mark.parametrize("solver", PENALISED)
    def test_step(self, solver, step_series):
        seg, _ = solver(step_series, None, 1.0)
        assert seg.changepoints == (3,)
        assert seg.penalised_objective == pytest.approx(1.0)
        assert seg.means == pytest.approx((1.0, 10.0))

    @pytest.mark.parametrize("solver", PENALISED)
    def test_large_penalty(self, solver, step_series):
        seg, _ = solver(step_series, None, 100.0)
        assert seg.changepoints == () and seg.penalised_objective == pytest.approx(60.75)

    @pytest.mark.parametrize("solver", PENALISED)
    @pytest.mark.parametrize("beta", [0.5, 3.0])
    def test_constant(self, solver, beta):
        seg, _ = solver(np.full(30, -1.5), None, beta)
        assert seg.changepoints == () and seg.penalised_objective == 0.0

    @pytest.mark.parametrize("solver", PENALISED)
    def test_single_point(self, solver):
        seg, tr = solver([2.0], None, 1.0)
        assert seg.changepoints == () and seg.total_cost == 0.0
        assert tr.candidate_count[1] == 1

    def test_pelt_single_point_candidate_set(self):
        _, tr = pelt_solve([2.0], None, 1.0)
        assert tr.candidate_sets() == {1: frozenset({0})}

    def test_rejects_negative_beta(self, step_series):
        with pytest.raises(ValueError):
            op_solve(step_series, None, -1.0)

    def test_op_trace_is_unpruned(self, rng):
        _, tr = op_solve(rng.normal(size=20), None, 2.0)
        assert list(tr.candidate_count[1:]) == list(range(1, 21))


def _random_series(rng, n_max):
    n = int(rng.integers(1, n_max + 1))
    return piecewise_constant(rng, n, int(rng.integers(0, max(1, n // 10) + 1))) if n > 1 else rng.normal(size=1)


def test_pruned_penalised_match_op(rng):
    # 200 random series, n <= 200
    for _ in range(200):
        y = _random_series(rng, 200)
        beta = float(rng.uniform(0.5, 3 * math.log(max(y.size, 2))))
        ref, _ = op_solve(y, None, beta)
        for solver in (pelt_solve, fpop_solve):
            seg, _ = solver(y, None, beta)
            assert seg.changepoints == ref.changepoints
            assert seg.penalised_objective == ref.penalised_objective


def test_pruned_constrained_match_sns(rng):
    # 100 random series, n <= 150, K <= 6
    for _ in range(100):
        n = int(rng.integers(8, 151))
        y = piecewise_constant(rng, n, int(rng.integers(0, 6)))
        K = int(rng.integers(1, 7))
        ref, _ = sns_solve(y, None, K)
        for solver in (snip_solve, pdpa_solve):
            res, _ = solver(y, None, K)
            np.testing.assert_array_equal(res.final_costs, ref.final_costs)
            assert [s.changepoints for s in res.segmentations] == [s.changepoints for s in ref.segmentations]


def test_exact_against_oracle_small(rng):
    for _ in range(60):
        n = int(rng.integers(2, 13))
        y = rng.normal(0, 1, n) + np.where(np.arange(n) >= n // 2, rng.normal(0, 4), 0.0)
        beta = float(rng.uniform(0.1, 3 * math.log(n)))
        cost, cps = oracle_penalised(y, beta=beta).best_penalised
        for solver in PENALISED:
            seg, _ = solver(y, None, beta)
            assert seg.changepoints == cps and rel_close(seg.penalised_objective, cost)
        K = int(rng.integers(1, n))
        per_k = oracle_constrained(y, K=K).best_per_k
        for solver in CONSTRAINED:
            res, _ = solver(y, None, K)
            for k, (c, cp) in enumerate(per_k):
                assert rel_close(res.final_costs[k], c)
                assert res.segmentations[k].changepoints == cp


class TestConstrainedExamples:
    @pytest.mark.parametrize("solver", CONSTRAINED)
    def test_step(self, solver, step_series):
        res, _ = solver(step_series, None, 2)
        np.testing.assert_allclose(res.final_costs, [60.75, 0.0, 0.0], atol=1e-12)
        assert res.segmentations[1].changepoints == (3,)
        assert all(s.k == k for k, s in enumerate(res.segmentations))

    @pytest.mark.parametrize("solver", CONSTRAINED)
    def test_zero_changepoints(self, solver, step_series):
        res, _ = solver(step_series, None, 0)
        assert res.final_costs.tolist() == [pytest.approx(60.75)]
        assert res.segmentations[0].changepoints == ()

    @pytest.mark.parametrize("solver", CONSTRAINED)
    def test_k_must_be_below_n(self, solver):
        with pytest.raises(ValueError):
            solver([1.0, 2.0, 3.0], None, 3)

    def test_two_point_minimal_case(self):
        # k = 1, t = 2: the only placement is after the first point
        for solver in CONSTRAINED:
            res, _ = solver([0.0, 4.0], None, 1)
            assert res.costs[1, 2] == 0.0 and res.costs[0, 2] == pytest.approx(4.0)
            assert res.segmentations[1].changepoints == (1,)

    def test_costs_non_increasing_in_k(self, rng):
        for _ in range(100):
            n = int(rng.integers(6, 60))
            res, _ = sns_solve(piecewise_constant(rng, n, 3), None, min(5, n - 1))
            assert np.all(np.diff(res.final_costs) <= 1e-12)

    def test_snip_k1(self, rng):
        y = piecewise_constant(rng, 80, 2)
        a, _ = snip_solve(y, None, 1)
        b, _ = sns_solve(y, None, 1)
        np.testing.assert_array_equal(a.final_costs, b.final_costs)

    def test_rolling_storage_above_limit(self, rng, monkeypatch):
        y = piecewise_constant(rng, 60, 3)
        full, _ = pdpa_solve(y, None, 4)
        monkeypatch.setattr(alg, "FULL_TABLE_LIMIT", 10)
        rolled, _ = pdpa_solve(y, None, 4)
        assert rolled.costs.ndim == 1
        np.testing.assert_array_equal(rolled.final_costs, full.final_costs)
        assert [s.changepoints for s in rolled.segmentations] == [s.changepoints for s in full.segmentations]


class TestDominance:
    def test_functional_subset_of_inequality_penalised(self, rng):
        for _ in range(30):
            y = piecewise_constant(rng, 150, 4)
            beta = default_penalty(TimeSeries(y))
            _, tp = pelt_solve(y, None, beta)
            _, tf = fpop_solve(y, None, beta)
            sp, sf = tp.candidate_sets(), tf.candidate_sets()
            for t in sp:
                assert sf[t] <= sp[t]
                assert len(sf[t]) == tf.candidate_count[t]

    def test_functional_subset_of_inequality_constrained(self, rng):
        for _ in range(15):
            y = piecewise_constant(rng, 120, 4)
            _, ts = snip_solve(y, None, 5)
            _, tq = pdpa_solve(y, None, 5)
            for k in range(1, 6):
                ss, sq = ts.candidate_sets(k), tq.candidate_sets(k)
                for t in ss:
                    assert sq[t] <= ss[t]


class TestInvariants:
    @pytest.mark.parametrize("solver", PENALISED)
    def test_segmentation_cost_recomputes(self, solver, rng):
        y = piecewise_constant(rng, 120, 5)
        seg, tr = solver(y, GaussianCostModel(1.7), 4.0)
        assert rel_close(seg.total_cost, recomputed_cost(y, seg.changepoints, 1.7))
        assert rel_close(seg.penalised_objective, seg.total_cost + 4.0 * seg.k)
        assert all(c >= 1 for c in tr.candidate_count[1:])
        assert list(seg.changepoints) == sorted(set(seg.changepoints))
        assert all(1 <= c <= y.size - 1 for c in seg.changepoints)

    @pytest.mark.parametrize("solver", CONSTRAINED)
    def test_constrained_costs_recompute(self, solver, rng):
        y = piecewise_constant(rng, 90, 3)
        res, tr = solver(y, None, 5)
        for k, seg in enumerate(res.segmentations):
            assert seg.k == k
            assert rel_close(seg.total_cost, res.final_costs[k])
            assert rel_close(seg.total_cost, recomputed_cost(y, seg.changepoints))
        for t, k, count in tr.rows():
            assert count >= 1

    def test_scale_equivariance(self, rng):
        y = piecewise_constant(rng, 100, 4)
        for c in (0.1, 3.0, 250.0):
            a, _ = fpop_solve(y, None, 6.0)
            b, _ = fpop_solve(y * c, None, 6.0 * c * c)
            assert a.changepoints == b.changepoints

    def test_trace_toggle(self, rng):
        y = piecewise_constant(rng, 100, 4)
        seg_on, tr_on = fpop_solve(y, None, 5.0, trace=True)
        seg_off, tr_off = fpop_solve(y, None, 5.0, trace=False)
        assert seg_on == seg_off
        assert tr_off.candidate_count is None and tr_off.pruned_at == []
        assert tr_on.wall_time > 0 and tr_off.wall_time > 0

    def test_changepoint_count_along_beta_grid(self, rng):
        # measured, not asserted: the objective does not guarantee monotonicity
        y = piecewise_constant(rng, 300, 8)
        counts = [fpop_solve(y, None, b, trace=False)[0].k for b in np.linspace(0.5, 60, 40)]
        increases = sum(b > a for a, b in zip(counts, counts[1:]))
        print(f"changepoint counts over beta grid: {counts}; increases: {increases}")
        assert counts[0] >= counts[-1]


class TestEngines:
    def test_piecewise_fpop_matches_kernel(self, rng):
        for _ in range(10):
            y = piecewise_constant(rng, 80, 3)
            a, ta = fpop_solve(y, None, 5.0)
            b, tb = fpop_solve(y, None, 5.0, engine="piecewise")
            assert a.changepoints == b.changepoints
            assert rel_close(a.penalised_objective, b.penalised_objective)
            np.testing.assert_array_equal(ta.candidate_count, tb.candidate_count)

    def test_piecewise_pdpa_matches_kernel(self, rng):
        y = piecewise_constant(rng, 70, 3)
        a, ta = pdpa_solve(y, None, 4)
        b, tb = pdpa_solve(y, None, 4, engine="piecewise")
        np.testing.assert_allclose(a.final_costs, b.final_costs, rtol=1e-9, atol=1e-9)
        np.testing.assert_array_equal(ta.candidate_count, tb.candidate_count)

    def test_unknown_engine(self, step_series):
        with pytest.raises(ValueError):
            fpop_solve(step_series, None, 1.0, engine="tree")

    def test_live_pieces_each_own_part_of_the_minimum(self, rng):
        # at a sampled step every stored candidate is optimal on some interval
        y = piecewise_constant(rng, 60, 3, jump_sd=1.0)
        checked = []

        def probe(k, t, state, value):
            if t == 46:
                owners = set()
                for p in state.pieces:
                    for lo, hi in p.valid:
                        mid = 0.5 * (lo + hi)
                        best = min(state.pieces, key=lambda q: (q(mid), q.tau))
                        owners.add(best.tau)
                checked.append((len(state.pieces), len(owners)))

        pdpa_solve(y, None, 3, engine="piecewise", on_step=probe)
        assert checked and all(a == b for a, b in checked)


class TestBinseg:
    def test_step(self, step_series):
        seg, _ = binseg_solve(step_series, None, 5, 1.0)
        assert seg.changepoints == (3,)

    def test_constant(self):
        seg, _ = binseg_solve(np.full(20, 2.0), None, 5, 0.5)
        assert seg.changepoints == ()

    def test_respects_k(self, rng):
        y = piecewise_constant(rng, 200, 10)
        seg, _ = binseg_solve(y, None, 3, 0.0)
        assert seg.k == 3

    def test_never_beats_exact(self, rng):
        for _ in range(50):
            y = piecewise_constant(rng, int(rng.integers(10, 200)), 5)
            beta = float(rng.uniform(1, 15))
            exact, _ = fpop_solve(y, None, beta)
            greedy, _ = binseg_solve(y, None, None, beta)
            assert greedy.penalised_objective >= exact.penalised_objective - 1e-9


class TestConsistency:
    def test_step(self, step_series):
        assert penalised_constrained_consistency(step_series, None, 1.0, 3) is True

    def test_constant(self):
        assert penalised_constrained_consistency(np.full(10, 1.0), None, 2.0, 2) is True

    def test_inconclusive_when_k_too_small(self, rng):
        y = piecewise_constant(rng, 100, 8, jump_sd=10.0)
        assert penalised_constrained_consistency(y, None, 1.0, 1) is None

    def test_random(self, rng):
        for _ in range(100):
            y = piecewise_constant(rng, 60, 3)
            assert penalised_constrained_consistency(y, None, 2 * math.log(60), 10) is True


def test_solve_dispatch(step_series):
    for m in alg.METHODS:
        res, tr = alg.solve(m, step_series, beta=1.0, K=2)
        assert tr.method == m
    with pytest.raises(ValueError):
        alg.solve("nope", step_series)
