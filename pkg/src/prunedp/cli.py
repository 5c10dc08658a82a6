"""Command-line interface: ``prunedp {detect,simulate,bench,trace}``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import algorithms
from .algorithms import CONSTRAINED, METHODS, PENALISED
from .model import GaussianCostModel, TimeSeries, default_penalty
from .report import InputError, RunReport, read_series
from .simulate import SimSpec, simulate, write_simulation

log = logging.getLogger("prunedp")

TRACEABLE = ("pelt", "fpop", "snip", "pdpa")
BENCH_COLUMNS = ("n", "n_changes", "method", "rep", "seconds", "k_detected")
TRACE_COLUMNS = ("t", "k", "method", "candidate_count")


class UsageError(Exception):
    pass


def _csv_list(cast):
    def parse(text: str):
        try:
            return [cast(x) for x in text.split(",") if x.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# ------------------------------------------------------------------ detect

def run_detect(values: np.ndarray, method: str, beta: float | None = None, kmax: int | None = None,
               sigma: float = 1.0, kappa: float = 0.0, trace: bool = False) -> RunReport:
    """Solve one series and wrap the outcome in a :class:`RunReport`."""
    series = TimeSeries(values)
    model = GaussianCostModel(sigma)
    if method in CONSTRAINED and kmax is None:
        raise UsageError(f"method {method!r} requires --kmax")
    if method in PENALISED + ("binseg",) and beta is None:
        beta = default_penalty(series, sigma) if series.n >= 2 else 0.0
    if method in CONSTRAINED:
        beta = None
    result, tr = algorithms.solve(method, series, model, beta=beta, K=kmax, kappa=kappa, trace=trace)
    return RunReport.build(method, series.values, result, tr, sigma=sigma, kappa=kappa,
                           beta=beta, kmax=kmax, include_trace=trace)


_WARM: set[str] = set()


def _detect_file(path, method, beta, kmax, sigma, kappa, trace):
    if method not in _WARM:
        # keep one-off compile/cache loading out of wall_time_ms
        _warm_up([method])
        _WARM.add(method)
    return run_detect(read_series(path), method, beta, kmax, sigma, kappa, trace).to_json()


def cmd_detect(args) -> int:
    if args.method in CONSTRAINED and args.kmax is None:
        raise UsageError(f"method {args.method!r} requires --kmax")
    job = (args.method, args.beta, args.kmax, args.sigma, args.kappa, args.trace)
    if args.jobs > 1 and len(args.inputs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outputs = list(pool.map(_detect_file, args.inputs, *[[j] * len(args.inputs) for j in job]))
    else:
        outputs = [_detect_file(p, *job) for p in args.inputs]
    fh, close = _open_out(args.out)
    try:
        if len(outputs) == 1:
            fh.write(outputs[0] + "\n")
        else:
            # one compact JSON document per line, in input order
            for text in outputs:
                fh.write(RunReport.from_json(text).to_json(indent=None) + "\n")
    finally:
        if close:
            fh.close()
    return 0


# ---------------------------------------------------------------- simulate

def cmd_simulate(args) -> int:
    spec = SimSpec(n=args.n, n_changes=args.changes, jump_size=args.jump, sigma=args.sigma,
                   seed=args.seed, placement=args.placement)
    data, sidecar = write_simulation(spec, args.out)
    log.info("wrote %s and %s", data, sidecar)
    return 0


# ------------------------------------------------------------------- bench

def _warm_up(methods):
    y = np.r_[np.zeros(10), np.ones(10) * 5.0]
    for m in methods:
        try:
            algorithms.solve(m, y, beta=1.0, K=2, trace=False)
        except Exception as exc:  # noqa: BLE001 - the timed cell reports the failure
            log.warning("warm-up for %s failed: %s", m, exc)


def bench_rows(n_list, changes_list, methods, reps, seed=0, beta=None, sigma=1.0, jump=5.0):
    """Yield one CSV row dict per (n, n_changes, method, rep)."""
    if reps > 0:
        _warm_up(methods)
    for n in n_list:
        for n_changes in changes_list:
            for rep in range(reps):
                spec = SimSpec(n=n, n_changes=n_changes, jump_size=jump, sigma=sigma,
                               seed=seed + 1_000_003 * rep + n_changes, placement="equal")
                y, _ = simulate(spec)
                series = TimeSeries(y)
                model = GaussianCostModel(sigma)
                b = default_penalty(series, sigma) if beta is None else beta
                for method in methods:
                    row = {"n": n, "n_changes": n_changes, "method": method, "rep": rep}
                    try:
                        K = min(n_changes + 2, n - 1)
                        t0 = time.perf_counter()
                        result, _ = algorithms.solve(method, series, model, beta=b, K=K, trace=False)
                        row["seconds"] = f"{time.perf_counter() - t0:.6f}"
                        seg = result.segmentations[-1] if method in CONSTRAINED else result
                        row["k_detected"] = seg.k
                    except Exception as exc:  # noqa: BLE001 - a failed cell must not stop the grid
                        log.warning("bench cell %s failed: %s", row, exc)
                        row["seconds"] = "NA"
                        row["k_detected"] = "NA"
                    log.info("%s", row)
                    yield row


def cmd_bench(args) -> int:
    bad = [m for m in args.methods if m not in METHODS]
    if bad:
        raise UsageError(f"unknown method(s): {', '.join(bad)}")
    fh, close = _open_out(args.out)
    try:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in bench_rows(args.n, args.changes, args.methods, args.reps, args.seed,
                              args.beta, args.sigma, args.jump):
            writer.writerow(row)
            fh.flush()
    finally:
        if close:
            fh.close()
    return 0


# ------------------------------------------------------------------- trace

def trace_rows(values: np.ndarray, methods, beta=None, kmax=None, sigma=1.0, kappa=0.0):
    """Yield ``(t, k, method, candidate_count)`` rows; ``k`` is '' for penalised methods."""
    bad = [m for m in methods if m not in TRACEABLE]
    if bad:
        raise UsageError(f"method(s) without a pruning trace: {', '.join(bad)}")
    series = TimeSeries(values)
    model = GaussianCostModel(sigma)
    if beta is None:
        beta = default_penalty(series, sigma) if series.n >= 2 else 0.0
    for method in methods:
        if method in CONSTRAINED and kmax is None:
            raise UsageError(f"method {method!r} requires --kmax")
        _, tr = algorithms.solve(method, series, model, beta=beta, K=kmax, kappa=kappa, trace=True)
        for t, k, count in tr.rows():
            yield t, "" if k is None else k, method, count


def cmd_trace(args) -> int:
    values = read_series(args.input)
    rows = list(trace_rows(values, args.methods, args.beta, args.kmax, args.sigma, args.kappa))
    fh, close = _open_out(args.out)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        writer.writerows(rows)
    finally:
        if close:
            fh.close()
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prunedp", description="Exact changepoint detection with pruned dynamic programming.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_flags(p):
        p.add_argument("--sigma", type=float, default=1.0, help="noise standard deviation (default 1)")
        p.add_argument("--kappa", type=float, default=0.0, help="inequality-pruning constant (default 0)")

    p = sub.add_parser("detect", help="segment one or more series")
    p.add_argument("inputs", nargs="+", help="files with one value per line ('-' for stdin)")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--beta", type=float, help="penalty per changepoint (default 2 sigma^2 log n)")
    p.add_argument("--kmax", type=int, help="maximum number of changepoints (constrained methods, binseg)")
    model_flags(p)
    p.add_argument("--trace", action="store_true", help="include candidate counts in the report")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--jobs", type=int, default=1, help="solve input files in parallel")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("simulate", help="write a synthetic piecewise-constant series")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--changes", type=int, default=0)
    p.add_argument("--jump", type=float, default=5.0, help="mean shift in units of sigma (default 5)")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--placement", choices=("equal", "uniform-random"), default="equal")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="runtime versus number of true changepoints, as CSV")
    p.add_argument("--n", type=_csv_list(int), default=[200_000], help="comma-separated lengths")
    p.add_argument("--changes", type=_csv_list(int), default=[10, 100, 1000, 5000])
    p.add_argument("--methods", type=_csv_list(str), default=["fpop", "pelt", "binseg"])
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", type=float, help="penalty (default 2 sigma^2 log n)")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--jump", type=float, default=5.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("trace", help="candidate-set sizes over time, as CSV")
    p.add_argument("input")
    p.add_argument("--methods", type=_csv_list(str), default=["pelt", "fpop"])
    p.add_argument("--beta", type=float)
    p.add_argument("--kmax", type=int)
    model_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"prunedp: error: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError, ValueError) as exc:
        print(f"prunedp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
