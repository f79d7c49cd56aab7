"""Offline optima used as ground truth."""
from .feasibility import FeasibilityResult, brute_force_feasibility
from .lp import LpSolution, lp_opt_fractional
from .oswm import OswmOptimum, oswm_opt
from .simplex import SimplexResult, maximize_leq, simplex

__all__ = [
    "FeasibilityResult", "LpSolution", "OswmOptimum", "SimplexResult", "brute_force_feasibility",
    "lp_opt_fractional", "maximize_leq", "oswm_opt", "simplex",
]
