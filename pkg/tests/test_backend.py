"""The interpreted kernels must agree with the compiled ones."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from prunedp import _jit, algorithms

SCRIPT = r"""
import json, sys
import numpy as np
from prunedp import _jit, algorithms
assert not _jit.JIT_ENABLED
out = []
for seed in range(6):
    y = np.random.default_rng(seed).normal(np.repeat([0.0, 3.0, -1.0], 20), 1.0)
    row = {}
    for m in algorithms.PENALISED + ("binseg",):
        res, tr = algorithms.solve(m, y, beta=4.0)
        row[m] = [list(res.changepoints), res.penalised_objective,
                  None if tr is None or tr.candidate_count is None else tr.candidate_count.tolist()]
    for m in algorithms.CONSTRAINED:
        res, tr = algorithms.solve(m, y, K=4)
        row[m] = [[list(s.changepoints) for s in res.segmentations], res.final_costs.tolist(),
                  None if tr is None or tr.candidate_count is None else tr.candidate_count.tolist()]
    out.append(row)
json.dump(out, sys.stdout)
"""


def _local():
    out = []
    for seed in range(6):
        y = np.random.default_rng(seed).normal(np.repeat([0.0, 3.0, -1.0], 20), 1.0)
        row = {}
        for m in algorithms.PENALISED + ("binseg",):
            res, tr = algorithms.solve(m, y, beta=4.0)
            row[m] = [list(res.changepoints), res.penalised_objective,
                      None if tr is None or tr.candidate_count is None else tr.candidate_count.tolist()]
        for m in algorithms.CONSTRAINED:
            res, tr = algorithms.solve(m, y, K=4)
            row[m] = [[list(s.changepoints) for s in res.segmentations], res.final_costs.tolist(),
                      None if tr is None or tr.candidate_count is None else tr.candidate_count.tolist()]
        out.append(row)
    return out


@pytest.mark.skipif(not _jit.JIT_ENABLED, reason="compiled backend not active")
def test_pure_fallback_matches_compiled():
    env = dict(os.environ, PRUNEDP_DISABLE_JIT="1")
    proc = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    pure = json.loads(proc.stdout)
    fast = json.loads(json.dumps(_local()))
    for a, b in zip(pure, fast):
        for m in b:
            assert a[m][0] == b[m][0], m
            assert a[m][2] == b[m][2], m
            np.testing.assert_allclose(a[m][1], b[m][1], rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("value, enabled", [("1", False), ("true", False), ("0", True), ("", True)])
def test_flag_parsing(value, enabled):
    env = dict(os.environ, PRUNEDP_DISABLE_JIT=value)
    code = "from prunedp import _jit; print(_jit.JIT_ENABLED)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == str(enabled and _jit.numba is not None)
