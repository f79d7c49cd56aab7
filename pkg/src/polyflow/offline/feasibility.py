from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .._config import get_tol
from ..exceptions import CapabilityError, InputError
from ..submodular.oracles import TABLE_LIMIT, SubmodularOracle, set_of


class FeasibilityResult(NamedTuple):
    feasible: bool
    witness: frozenset | None
    violation: float


def brute_force_feasibility(oracle: SubmodularOracle, load, tol: float | None = None) -> FeasibilityResult:
    """Check ``load(S) <= f(S)`` on every subset; report the most violated set."""
    n = oracle.n
    if n > TABLE_LIMIT:
        raise CapabilityError(f"exhaustive feasibility needs n <= {TABLE_LIMIT}")
    load = np.asarray(load, dtype=float)
    if load.shape != (n,):
        raise InputError(f"load must have length {n}")
    table = oracle.table()
    masks = np.arange(1 << n, dtype=np.int64)
    sums = np.zeros(1 << n)
    for e in range(n):
        sums[(masks >> e) & 1 == 1] += load[e]
    excess = sums - table
    worst = int(np.argmax(excess))
    tol = (get_tol() if tol is None else tol) * max(1.0, float(table[-1]))
    if excess[worst] > tol:
        return FeasibilityResult(False, set_of(worst), float(excess[worst]))
    return FeasibilityResult(True, None, float(max(excess[worst], 0.0)))
