"""Submodular oracles, the Lovász extension and minimisation routines."""
from .laminar import LaminarBudgetSpec, LaminarOracle, laminar_budget_enumerate, laminar_budget_eval
from .lovasz import eval_lovasz
from .oracles import (
    ContractionOracle,
    CoverageOracle,
    DirectSumOracle,
    GraphicOracle,
    GroundSet,
    PartitionOracle,
    RestrictionOracle,
    ScaledOracle,
    SubmodularOracle,
    TableOracle,
    TransversalOracle,
    UniformOracle,
    from_spec,
)
from .sfm import SfmResult, min_norm_point, sfm_min
from .verify import SubmodularityReport, verify_submodular

__all__ = [
    "ContractionOracle", "CoverageOracle", "DirectSumOracle", "GraphicOracle", "GroundSet",
    "LaminarBudgetSpec", "LaminarOracle", "PartitionOracle", "RestrictionOracle", "ScaledOracle",
    "SfmResult", "SubmodularOracle", "SubmodularityReport", "TableOracle", "TransversalOracle",
    "UniformOracle", "eval_lovasz", "from_spec", "laminar_budget_enumerate", "laminar_budget_eval", "min_norm_point",
    "sfm_min", "verify_submodular",
]
