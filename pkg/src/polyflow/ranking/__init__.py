"""Matroidal ranking for online welfare maximisation."""
from .algorithm import (
    MonteCarloResult,
    OswmInstance,
    RankingRun,
    critical_threshold,
    monte_carlo_ratio,
    perusal_run,
    priority_order,
    ranking_run,
    span,
)
from .analysis import check_span_invariants, check_threshold_corollaries, dual_coverage, independent

__all__ = [
    "MonteCarloResult", "OswmInstance", "RankingRun", "check_span_invariants",
    "check_threshold_corollaries", "critical_threshold", "dual_coverage", "independent",
    "monte_carlo_ratio", "perusal_run", "priority_order", "ranking_run", "span",
]
