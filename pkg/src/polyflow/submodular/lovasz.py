from __future__ import annotations

import numpy as np

from ..exceptions import InputError
from .oracles import SubmodularOracle


def eval_lovasz(oracle: SubmodularOracle, w) -> float:
    """Lovász extension of ``oracle`` at ``w`` (level-set sum over distinct levels).

    Evaluated block by block, which is exact for direct sums and lets the
    block oracles reuse their memoised values.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (oracle.n,):
        raise InputError(f"weight vector must have length {oracle.n}")
    if not np.all(np.isfinite(w)):
        raise InputError("weights must be finite")
    if np.any(w < 0):
        raise InputError("Lovász extension needs nonnegative weights")
    total = 0.0
    for k, block in enumerate(oracle.blocks()):
        sub = oracle.block_oracle(k)
        wb = w[list(block)] if sub is not oracle else w
        total += _lovasz_single(sub, wb)
    return total


def _lovasz_single(oracle: SubmodularOracle, w: np.ndarray) -> float:
    levels = np.unique(w[w > 0])[::-1]
    if levels.size == 0:
        return 0.0
    order = np.argsort(-w, kind="stable")
    total = 0.0
    prefix: list[int] = []
    pos = 0
    for k, tau in enumerate(levels):
        while pos < len(order) and w[order[pos]] >= tau:
            prefix.append(int(order[pos]))
            pos += 1
        nxt = levels[k + 1] if k + 1 < len(levels) else 0.0
        total += (tau - nxt) * oracle(frozenset(prefix))
    return float(total)
