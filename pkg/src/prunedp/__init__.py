"""Exact changepoint detection with pruned dynamic programming.

Penalised solvers (Optimal Partitioning, PELT, FPOP), constrained solvers
(Segment Neighbourhood, SNIP, pDPA), binary segmentation, and an exhaustive
oracle for small inputs, all for a change in mean under Gaussian loss.
"""
from .algorithms import (
    ConstrainedResult,
    RunTrace,
    Segmentation,
    binseg_solve,
    fpop_solve,
    op_solve,
    pdpa_solve,
    pelt_solve,
    penalised_constrained_consistency,
    snip_solve,
    sns_solve,
    solve,
)
from .model import GaussianCostModel, Penalty, TimeSeries, default_penalty, pointwise_cost, segment_cost
from .oracle import OracleResult, oracle_constrained, oracle_penalised

__version__ = "0.1.0"

__all__ = [
    "ConstrainedResult", "GaussianCostModel", "OracleResult", "Penalty", "RunTrace",
    "Segmentation", "TimeSeries", "binseg_solve", "default_penalty", "fpop_solve",
    "op_solve", "oracle_constrained", "oracle_penalised", "pdpa_solve", "pelt_solve",
    "penalised_constrained_consistency", "pointwise_cost", "segment_cost", "snip_solve",
    "sns_solve", "solve",
]
