"""Integral online assignment when every cost is small against the marginals.

Levels are taken against ``(1 - eps) f`` so that the final integral
allocation stays feasible for ``f`` itself.
"""
from __future__ import annotations

import math
import time
import warnings
from typing import NamedTuple

import numpy as np

from ..exceptions import InputError, InvariantError
from ..submodular.oracles import ScaledOracle
from ..waterlevels.core import LevelCache
from .certificate import DualCertificate, certify
from .fractional import SolveReport
from .instance import Allocation, G, SapInstance, g


class SmallBidsCheck(NamedTuple):
    holds: bool
    worst_ratio: float
    mode: str
    witness: tuple | None


def check_small_bids(inst: SapInstance, eps: float, samples: int = 2000, seed: int = 0,
                     exhaustive_limit: int = 14) -> SmallBidsCheck:
    """Test ``b_e <= eps * f_T({e})`` whenever the marginal is positive.

    Exhaustive over all ``T`` for small ground sets, sampled otherwise.
    ``worst_ratio`` is the largest ``b_e / f_T({e})`` seen.
    """
    f = inst.oracle
    n = f.n
    b = inst.costs
    worst, witness = 0.0, None
    positive_tol = 1e-12 * max(1.0, f(range(n)))
    if n <= exhaustive_limit:
        table = f.table()
        masks = np.arange(1 << n, dtype=np.int64)
        for e in range(n):
            bit = np.int64(1) << e
            T = masks[(masks & bit) == 0]
            marg = table[T | bit] - table[T]
            pos = marg > positive_tol
            if not pos.any():
                continue
            k = int(np.argmin(np.where(pos, marg, np.inf)))
            r = b[e] / marg[k]
            if r > worst:
                worst, witness = r, (e, int(T[k]))
        mode = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        for e in range(n):
            marg = f([e])
            if marg > positive_tol and b[e] / marg > worst:
                worst, witness = b[e] / marg, (e, [])
        for _ in range(samples):
            e = int(rng.integers(n))
            # log-uniform density so sparse sets (positive marginals) get sampled too
            density = math.exp(rng.uniform(math.log(0.5 / n), 0.0))
            T = frozenset(np.nonzero(rng.random(n) < density)[0].tolist()) - {e}
            marg = f(T | {e}) - f(T)
            if marg > positive_tol and b[e] / marg > worst:
                worst, witness = b[e] / marg, (e, sorted(T))
        mode = "sampled"
    return SmallBidsCheck(bool(worst <= eps * (1 + 1e-12)), float(worst), mode, witness)


def solve_small_bids(inst: SapInstance, eps: float, validate: bool = True):
    """Greedy integral allocation by ``b_e (1 - g(w_e))`` against ``(1 - eps) f``."""
    if not 0 < eps < 1:
        raise InputError("eps must lie in (0, 1)")
    if not np.allclose(inst.values, inst.costs):
        raise InputError("the integral solver needs values equal to costs")
    start = time.perf_counter()
    check = None
    if validate:
        check = check_small_bids(inst, eps)
        if not check.holds:
            warnings.warn(f"small-bids condition fails: worst b_e/f_T(e) = {check.worst_ratio:.4g} > {eps}",
                          stacklevel=2)
    f = inst.oracle
    f_scaled = ScaledOracle(f, 1.0 - eps)
    cache = LevelCache(f_scaled)
    b, v = inst.costs, inst.values
    x = np.zeros(inst.n)
    beta = np.zeros(inst.m)
    gamma = np.zeros(inst.n)
    w = cache.levels(b * x)
    chosen = []
    for j, part in enumerate(inst.parts):
        scores = {e: b[e] * (1.0 - float(g(w[e]))) for e in part}
        beta[j] = max(0.0, max(scores.values()))
        cand = [e for e in part if w[e] < 1.0 - 1e-12]
        if not cand:
            chosen.append(None)
            continue
        e = min(cand, key=lambda a: (-scores[a], a))
        if x[e] != 0:
            raise InvariantError(f"element {e} selected twice")
        x[e] = 1.0
        chosen.append(e)
        w = cache.levels(b * x)
        new_gamma = G(w)
        if np.any(new_gamma < gamma - 1e-9):
            raise InvariantError("dual entries decreased")
        gamma = np.maximum(gamma, new_gamma)
    w_orig = LevelCache(f).levels(b * x)
    if w_orig.max(initial=0.0) > 1.0 + 1e-9:
        raise InvariantError(f"final allocation infeasible: water level {w_orig.max():.12g}")
    primal = float(v @ x)
    cert = DualCertificate(gamma, beta)
    c = certify(cert, inst, primal)
    scaled_dual = DualCertificate(gamma, beta).lovasz_objective(f_scaled)
    report = SolveReport(
        "small-bids", primal, c.dual, c.dual, c.kappa, c.bound, 0.0, int(x.sum()),
        time.perf_counter() - start, [],
        {"eps": eps, "scaled_dual": scaled_dual, "max_level": float(w_orig.max(initial=0.0)),
         "chosen": [(-1 if e is None else int(e)) for e in chosen],
         "small_bids_holds": None if check is None else check.holds,
         "small_bids_worst": None if check is None else check.worst_ratio},
    )
    return Allocation(x, inst.parts, inst.m), cert, report
