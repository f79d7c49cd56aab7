from __future__ import annotations

from typing import NamedTuple

from ..exceptions import CapabilityError
from ..ranking.algorithm import OswmInstance

SEARCH_LIMIT = 10**7


class OswmOptimum(NamedTuple):
    assignment: list
    welfare: float


def oswm_opt(inst: OswmInstance) -> OswmOptimum:
    """Best offline assignment by depth-first search with a value bound.

    Items that would not raise the receiving agent's rank are never given to
    it, so every branch keeps the bundles independent.
    """
    n, m = inst.agents, inst.items
    if n > 0 and n ** m > SEARCH_LIMIT:
        raise CapabilityError(
            f"exhaustive OSWM search needs agents**items <= {SEARCH_LIMIT}; "
            "use the fractional LP value as an upper bound instead"
        )
    a = inst.weights
    best_item = [max((a[i] for i in range(n) if inst.oracles[i]([j]) > 0), default=0.0) for j in range(m)]
    suffix = [0.0] * (m + 1)
    for j in range(m - 1, -1, -1):
        suffix[j] = suffix[j + 1] + best_item[j]
    bundles = [frozenset() for _ in range(n)]
    ranks = [0.0] * n
    current = [-1] * m
    best = {"welfare": -1.0, "assignment": [-1] * m}

    def dfs(j: int, value: float):
        if value + suffix[j] <= best["welfare"] + 1e-12:
            return
        if j == m:
            best["welfare"] = value
            best["assignment"] = list(current)
            return
        for i in range(n):
            if a[i] <= 0:
                continue
            new = inst.oracles[i](bundles[i] | {j})
            if new > ranks[i]:
                old_b, old_r = bundles[i], ranks[i]
                bundles[i], ranks[i] = old_b | {j}, new
                current[j] = i
                dfs(j + 1, value + a[i] * (new - old_r))
                bundles[i], ranks[i] = old_b, old_r
                current[j] = -1
        dfs(j + 1, value)

    dfs(0, 0.0)
    return OswmOptimum(best["assignment"], float(max(best["welfare"], 0.0)))
