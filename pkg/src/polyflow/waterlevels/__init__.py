"""Water-level decompositions and the checks that go with them."""
from .core import (
    KktReport,
    LevelCache,
    ThresholdedLevels,
    TightSet,
    WaterLevelDecomposition,
    decomposition_from_levels,
    minimal_tight_set,
    naive_level,
    thresholded_levels,
    verify_sua_kkt,
    water_level_brute,
    water_levels_alg1,
    water_levels_alg2,
    water_levels_brute,
)

__all__ = [
    "KktReport", "LevelCache", "ThresholdedLevels", "TightSet", "WaterLevelDecomposition",
    "decomposition_from_levels", "minimal_tight_set", "naive_level", "thresholded_levels",
    "verify_sua_kkt", "water_level_brute", "water_levels_alg1", "water_levels_alg2",
    "water_levels_brute",
]
