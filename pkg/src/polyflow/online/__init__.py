"""Online solvers: fractional water-filling, the integral small-bids rule and certificates."""
from .certificate import Certification, DualCertificate, certify, coverage
from .fractional import SolveReport, price, solve_fractional, solve_matroid_intersection
from .instance import Allocation, G, SapInstance, g
from .small_bids import SmallBidsCheck, check_small_bids, solve_small_bids

__all__ = [
    "Allocation", "Certification", "DualCertificate", "G", "SapInstance", "SmallBidsCheck",
    "SolveReport", "certify", "check_small_bids", "coverage", "g", "price", "solve_fractional",
    "solve_matroid_intersection", "solve_small_bids",
]
