"""Time the compiled kernels against the interpreted fallback.

    python benchmarks/bench_backends.py --n 2000 --reps 3

Each backend runs in its own interpreter so the env flag takes effect at import.
"""
import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
from prunedp import algorithms, _jit
from prunedp.model import default_penalty
from prunedp.simulate import SimSpec, simulate

n, reps, methods = int(sys.argv[1]), int(sys.argv[2]), sys.argv[3].split(",")
y, _ = simulate(SimSpec(n=n, n_changes=max(1, n // 200), seed=7))
beta = default_penalty(len(y))
for m in methods:  # warm-up, also triggers compilation
    algorithms.solve(m, y[:50], beta=beta, K=3, trace=False)
rows = []
for m in methods:
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        algorithms.solve(m, y, beta=beta, K=5, trace=False)
        best = min(best, time.perf_counter() - t0)
    rows.append({"method": m, "jit": _jit.JIT_ENABLED, "seconds": best})
json.dump(rows, sys.stdout)
"""


def run(flag, n, reps, methods):
    env = dict(os.environ, PRUNEDP_DISABLE_JIT=flag)
    out = subprocess.run([sys.executable, "-c", CHILD, str(n), str(reps), methods],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--methods", default="op,pelt,fpop,sns,snip,pdpa,binseg")
    args = ap.parse_args(argv)

    fast = run("0", args.n, args.reps, args.methods)
    pure = run("1", args.n, args.reps, args.methods)
    print(f"{'method':<8}{'numba s':>12}{'python s':>12}{'speedup':>10}")
    for f, p in zip(fast, pure):
        print(f"{f['method']:<8}{f['seconds']:>12.4f}{p['seconds']:>12.4f}{p['seconds'] / f['seconds']:>10.1f}")


if __name__ == "__main__":
    main()
