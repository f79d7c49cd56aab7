"""Laminar-budget set functions.

``f(S)`` is the cheapest total budget of a subfamily covering ``S``.  The
family is arranged as a forest under inclusion and evaluated bottom-up: a
node either pays its own budget or delegates to its children.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..exceptions import CapabilityError, InputError
from .oracles import SubmodularOracle


@dataclass(frozen=True)
class LaminarBudgetSpec:
    sets: tuple[frozenset, ...]
    budgets: tuple[float, ...]
    n: int

    def __init__(self, sets: Sequence[Iterable[int]], budgets: Sequence[float], n: int | None = None):
        sets = tuple(frozenset(int(e) for e in s) for s in sets)
        budgets = tuple(float(b) for b in budgets)
        if len(sets) != len(budgets):
            raise InputError("one budget per laminar set required")
        if any(b < 0 or not math.isfinite(b) for b in budgets):
            raise InputError("laminar budgets must be finite and nonnegative")
        if any(not s for s in sets):
            raise InputError("laminar sets must be nonempty")
        covered = frozenset().union(*sets) if sets else frozenset()
        if n is None:
            n = max(covered) + 1 if covered else 0
        if covered != frozenset(range(n)):
            raise InputError("laminar family must cover every element 0..n-1")
        for i, a in enumerate(sets):
            for b in sets[i + 1:]:
                if a & b and not (a <= b or b <= a):
                    raise InputError(f"family is not laminar: {sorted(a)} and {sorted(b)} cross")
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "budgets", budgets)
        object.__setattr__(self, "n", int(n))

    @classmethod
    def from_dict(cls, spec: dict) -> LaminarBudgetSpec:
        entries = spec["sets"]
        return cls([s["members"] for s in entries], [s["budget"] for s in entries], spec.get("n"))

    def to_dict(self) -> dict:
        return {
            "kind": "laminar",
            "n": self.n,
            "sets": [{"members": sorted(s), "budget": b} for s, b in zip(self.sets, self.budgets)],
        }

    def forest(self) -> tuple[list[int], list[list[int]]]:
        """Roots and child lists; equal sets nest by index order."""
        order = sorted(range(len(self.sets)), key=lambda i: (-len(self.sets[i]), i))
        parent = {}
        for pos, i in enumerate(order):
            best = None
            for j in reversed(order[:pos]):
                if self.sets[i] <= self.sets[j]:
                    best = j
                    break
            parent[i] = best
        children: list[list[int]] = [[] for _ in self.sets]
        roots = []
        for i in order:
            if parent[i] is None:
                roots.append(i)
            else:
                children[parent[i]].append(i)
        return roots, children


@functools.lru_cache(maxsize=256)
def _forest(spec: LaminarBudgetSpec):
    return spec.forest()


def laminar_budget_eval(spec: LaminarBudgetSpec, S: Iterable[int]) -> float:
    """Minimum total budget of a subfamily covering ``S``."""
    S = frozenset(S)
    if not S:
        return 0.0
    if any(not 0 <= e < spec.n for e in S):
        raise InputError("subset contains elements outside the laminar ground set")
    roots, children = _forest(spec)

    def cost(node: int, need: frozenset) -> float:
        if not need:
            return 0.0
        rest = need
        total = 0.0
        for c in children[node]:
            part = need & spec.sets[c]
            if part:
                total += cost(c, part)
                rest = rest - part
        if rest:
            total = math.inf
        return min(spec.budgets[node], total)

    total = 0.0
    rest = S
    for r in roots:
        part = S & spec.sets[r]
        if part:
            total += cost(r, part)
            rest = rest - part
    if rest:
        raise InputError(f"elements {sorted(rest)} are covered by no laminar set")
    return total


def laminar_budget_enumerate(spec: LaminarBudgetSpec, S: Iterable[int]) -> float:
    """Same value as :func:`laminar_budget_eval` by trying every subfamily (at most 20 sets)."""
    S = frozenset(S)
    k = len(spec.sets)
    if k > 20:
        raise CapabilityError("subfamily enumeration limited to 20 sets")
    best = math.inf
    for mask in range(1 << k):
        chosen = [i for i in range(k) if mask >> i & 1]
        covered = frozenset().union(*(spec.sets[i] for i in chosen)) if chosen else frozenset()
        if S <= covered:
            best = min(best, sum(spec.budgets[i] for i in chosen))
    if math.isinf(best):
        raise InputError("subset is covered by no subfamily")
    return float(best)


class LaminarOracle(SubmodularOracle):
    kind = "laminar"

    def __init__(self, spec: LaminarBudgetSpec):
        super().__init__(spec.n)
        self.spec = spec

    def _eval(self, S):
        return laminar_budget_eval(self.spec, S)

    def cardinality_profile(self):
        # symmetric families: copies of the whole ground set, optionally with every singleton at one budget
        n = self.n
        full = frozenset(range(n))
        whole = [b for s, b in zip(self.spec.sets, self.spec.budgets) if s == full]
        singles = {next(iter(s)): b for s, b in zip(self.spec.sets, self.spec.budgets) if len(s) == 1 and s != full}
        if not whole or len(whole) + len(singles) != len(self.spec.sets):
            return None
        top = min(whole)
        k = np.arange(n + 1, dtype=float)
        if not singles:
            return np.where(k > 0, top, 0.0)
        if len(singles) != n or len(set(singles.values())) != 1:
            return None
        return np.minimum(k * next(iter(singles.values())), top)

    def _compute_blocks(self):
        roots, _ = _forest(self.spec)
        return [tuple(sorted(self.spec.sets[r])) for r in roots]

    def _make_block_oracle(self, k):
        roots, _ = _forest(self.spec)
        members = sorted(self.spec.sets[roots[k]])
        local = {e: i for i, e in enumerate(members)}
        sets, budgets = [], []
        for s, b in zip(self.spec.sets, self.spec.budgets):
            if s <= self.spec.sets[roots[k]]:
                sets.append([local[e] for e in s])
                budgets.append(b)
        return LaminarOracle(LaminarBudgetSpec(sets, budgets, len(members)))

    def to_spec(self):
        return self.spec.to_dict()
