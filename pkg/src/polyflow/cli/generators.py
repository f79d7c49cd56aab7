"""Instance generators for the benchmark families and the randomized tests."""
from __future__ import annotations

import numpy as np

from ..exceptions import InputError
from ..online.instance import SapInstance
from ..ranking.algorithm import OswmInstance
from ..submodular.laminar import LaminarBudgetSpec, LaminarOracle
from ..submodular.oracles import (
    CoverageOracle,
    DirectSumOracle,
    GraphicOracle,
    PartitionOracle,
    TransversalOracle,
    UniformOracle,
)


def upper_triangular(n: int) -> SapInstance:
    """Part ``j`` may use slots ``j..n-1``; every slot has unit capacity."""
    if n < 1:
        raise InputError("upper-triangular size must be positive")
    parts, slot_of = [], []
    for j in range(n):
        parts.append(list(range(len(slot_of), len(slot_of) + n - j)))
        slot_of.extend(range(j, n))
    slots = [[e for e, s in enumerate(slot_of) if s == k] for k in range(n)]
    E = len(slot_of)
    return SapInstance(PartitionOracle(slots, [1] * n), np.ones(E), np.ones(E), parts)


def _random_tree(rng, leaves: list[int], depth: int) -> list[list[int]]:
    """Groups of leaves forming a laminar hierarchy of at most ``depth`` internal levels."""
    groups = []
    level = [[leaf] for leaf in leaves]
    for _ in range(depth):
        if len(level) <= 1:
            break
        rng.shuffle(level)
        k = max(1, len(level) // 2)
        cuts = sorted(rng.choice(np.arange(1, len(level)), size=k - 1, replace=False).tolist()) if k > 1 else []
        merged = []
        prev = 0
        for c in cuts + [len(level)]:
            chunk = level[prev:c]
            prev = c
            merged.append(sorted(x for g in chunk for x in g))
            if len(chunk) > 1:
                groups.append(merged[-1])
        level = merged
    return groups


def adwords_laminar(n: int, depth: int = 2, bidders: int = 3, seed: int = 0, budget_unit: float = 20.0,
                    max_bid: int = 1, degree: int = 2) -> SapInstance:
    """AdWords with a laminar budget hierarchy over the bidders.

    ``n`` impressions arrive; each bids on up to ``degree`` random bidders.
    All budgets are multiples of ``budget_unit * max_bid``, so every positive
    marginal is at least that large and the bids are small by a factor of
    ``budget_unit``.
    """
    rng = np.random.default_rng(seed)
    if n < 1 or bidders < 1:
        raise InputError("need at least one impression and one bidder")
    owner, bids, parts = [], [], []
    for _ in range(n):
        chosen = sorted(rng.choice(bidders, size=min(degree, bidders), replace=False).tolist())
        part = []
        for i in chosen:
            part.append(len(owner))
            owner.append(i)
            bids.append(float(rng.integers(1, max_bid + 1)))
        parts.append(part)
    unit = budget_unit * max_bid
    active = sorted(set(owner))
    leaf_sets = {i: [e for e, o in enumerate(owner) if o == i] for i in active}
    budgets = {i: unit * int(rng.integers(1, 4)) for i in active}
    sets = [leaf_sets[i] for i in active]
    values = [budgets[i] for i in active]
    for grp in _random_tree(rng, active, depth):
        members = sorted(e for i in grp for e in leaf_sets[i])
        child_total = sum(budgets[i] for i in grp)
        cap = unit * max(1, int(np.floor(0.75 * child_total / unit)))
        sets.append(members)
        values.append(cap)
    oracle = LaminarOracle(LaminarBudgetSpec(sets, values, len(owner)))
    b = np.array(bids)
    return SapInstance(oracle, b.copy(), b, parts)


def adwords_upper_triangular(n: int, budget: float = 50.0, group: int | None = None) -> SapInstance:
    """Bidder ``i`` has budget ``budget``; impression group ``j`` bids one unit on bidders ``j..n-1``.

    Each group holds ``group`` impressions (default: the budget), so the
    offline optimum spends every budget exactly.
    """
    if n < 1 or budget < 1:
        raise InputError("need n >= 1 and budget >= 1")
    group = int(budget) if group is None else int(group)
    owner, parts = [], []
    for j in range(n):
        for _ in range(group):
            parts.append(list(range(len(owner), len(owner) + n - j)))
            owner.extend(range(j, n))
    sets = [[e for e, o in enumerate(owner) if o == i] for i in range(n)]
    oracle = LaminarOracle(LaminarBudgetSpec(sets, [float(budget)] * n, len(owner)))
    ones = np.ones(len(owner))
    return SapInstance(oracle, ones, ones.copy(), parts)


def parse_graph(text: str) -> tuple[int, list[tuple[int, int]]]:
    """``"0-1,1-2,0-2"`` -> (vertex count, edge list)."""
    edges = []
    try:
        for tok in text.split(","):
            tok = tok.strip()
            if not tok:
                continue
            a, b = tok.split("-")
            edges.append((int(a), int(b)))
    except ValueError:
        raise InputError(f"malformed graph {text!r}; expected pairs like 0-1,1-2") from None
    if not edges:
        raise InputError("graph has no edges")
    if any(a < 0 or b < 0 for a, b in edges):
        raise InputError("vertex ids must be nonnegative")
    return max(max(e) for e in edges) + 1, edges


def matroid_coloring(vertices: int, edges, delta: int) -> SapInstance:
    """Colour edges with ``delta`` forests: copy ``c`` of edge ``k`` is element ``c*|E| + k``."""
    if delta < 1:
        raise InputError("delta must be positive")
    edges = [tuple(e) for e in edges]
    for a, b in edges:
        if not (0 <= a < vertices and 0 <= b < vertices):
            raise InputError(f"edge {(a, b)} outside vertex range")
    copies = [GraphicOracle(vertices, edges) for _ in range(delta)]
    oracle = DirectSumOracle(copies) if delta > 1 else copies[0]
    E = len(edges)
    parts = [[c * E + k for c in range(delta)] for k in range(E)]
    return SapInstance(oracle, np.ones(E * delta), np.ones(E * delta), parts)


def random_polymatroid(n: int, seed: int = 0, items: int | None = None, weighted: bool = True) -> SapInstance:
    """Random integer-weight coverage oracle with random parts, values and costs."""
    rng = np.random.default_rng(seed)
    items = items or max(2, n // 2 + 1)
    covers = [rng.choice(items, size=int(rng.integers(1, min(3, items) + 1)), replace=False).tolist()
              for _ in range(n)]
    weights = rng.integers(1, 4, size=items).astype(float).tolist()
    oracle = CoverageOracle(covers, weights)
    parts = random_parts(rng, n)
    if weighted:
        values = rng.integers(1, 6, size=n).astype(float)
        costs = rng.integers(1, 4, size=n).astype(float)
    else:
        values = np.ones(n)
        costs = np.ones(n)
    return SapInstance(oracle, values, costs, parts)


def random_parts(rng, n: int, m: int | None = None) -> list[list[int]]:
    perm = rng.permutation(n)
    m = m or int(rng.integers(1, n + 1))
    cuts = sorted(rng.choice(np.arange(1, n), size=m - 1, replace=False).tolist()) if m > 1 else []
    return [sorted(int(e) for e in p) for p in np.split(perm, cuts)]


def random_oracle(rng, n: int, integer: bool = True):
    """A random monotone submodular oracle on ``n`` elements drawn from the shipped families."""
    kind = int(rng.integers(0, 6))
    if kind == 0:
        return UniformOracle(n, int(rng.integers(1, n + 1)))
    if kind == 1:
        k = int(rng.integers(1, n + 1))
        labels = rng.integers(0, k, size=n)
        parts = [[e for e in range(n) if labels[e] == i] for i in range(k)]
        parts = [p for p in parts if p]
        caps = [int(rng.integers(1, len(p) + 1)) for p in parts]
        return PartitionOracle(parts, caps, n)
    if kind == 2:
        V = int(rng.integers(2, max(3, n // 2 + 2)))
        edges = [rng.choice(V, size=2, replace=False).tolist() for _ in range(n)]
        return GraphicOracle(V, edges)
    if kind == 3:
        R = int(rng.integers(1, max(2, n // 2 + 1)))
        return TransversalOracle([rng.choice(R, size=int(rng.integers(1, min(R, 2) + 1)), replace=False).tolist()
                                  for _ in range(n)])
    if kind == 4:
        items = int(rng.integers(2, 7))
        covers = [rng.choice(items, size=int(rng.integers(1, 3)), replace=False).tolist() for _ in range(n)]
        weights = rng.integers(1, 4, size=items) if integer else rng.random(items) + 0.1
        return CoverageOracle(covers, weights)
    return random_laminar_oracle(rng, n, integer)


def random_laminar_spec(rng, n: int, max_sets: int = 10, integer: bool = True) -> LaminarBudgetSpec:
    """Random laminar family covering ``0..n-1`` with at most ``max_sets`` sets."""
    sets: list[list[int]] = []

    def split(members: list[int]):
        if len(sets) >= max_sets:
            return
        sets.append(members)
        if len(members) > 1 and rng.random() < 0.7:
            k = int(rng.integers(2, min(3, len(members)) + 1))
            shuffled = rng.permutation(members).tolist()
            cuts = sorted(rng.choice(np.arange(1, len(members)), size=k - 1, replace=False).tolist())
            prev = 0
            for c in cuts + [len(members)]:
                child = sorted(shuffled[prev:c])
                prev = c
                if child and rng.random() < 0.8:
                    split(child)

    roots = random_parts(rng, n, int(rng.integers(1, min(3, n) + 1)))
    for r in roots:
        split(r)
    covered = set(e for s in sets for e in s)
    for r in roots:
        if not set(r) <= covered:
            sets.append(r)
            covered.update(r)
    if integer:
        budgets = [float(rng.integers(1, 2 * len(s) + 2)) for s in sets]
    else:
        budgets = [float(rng.random() * len(s) + 0.1) for s in sets]
    return LaminarBudgetSpec(sets, budgets, n)


def random_laminar_oracle(rng, n: int, integer: bool = True) -> LaminarOracle:
    return LaminarOracle(random_laminar_spec(rng, n, integer=integer))


def random_matroid(rng, m: int):
    """Random matroid rank oracle over ``m`` items."""
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return UniformOracle(m, int(rng.integers(1, m + 1)))
    if kind == 1:
        k = int(rng.integers(1, m + 1))
        labels = rng.integers(0, k, size=m)
        parts = [[e for e in range(m) if labels[e] == i] for i in range(k)]
        parts = [p for p in parts if p]
        return PartitionOracle(parts, [int(rng.integers(1, len(p) + 1)) for p in parts], m)
    if kind == 2:
        V = int(rng.integers(2, m + 2))
        return GraphicOracle(V, [rng.choice(V, size=2, replace=False).tolist() for _ in range(m)])
    R = int(rng.integers(1, m + 1))
    return TransversalOracle([rng.choice(R, size=int(rng.integers(1, min(R, 3) + 1)), replace=False).tolist()
                              for _ in range(m)])


def random_oswm(rng, agents: int, items: int, weighted: bool = False) -> OswmInstance:
    oracles = [random_matroid(rng, items) for _ in range(agents)]
    weights = rng.integers(1, 4, size=agents).astype(float) if weighted else np.ones(agents)
    return OswmInstance(oracles, weights, items)


def upper_triangular_oswm(n: int) -> OswmInstance:
    """Agent ``i`` can use items ``0..i`` (rank one each)."""
    oracles = [TransversalOracle([[0] if j <= i else [] for j in range(n)]) for i in range(n)]
    return OswmInstance(oracles, np.ones(n), n)


FAMILIES = ("upper-triangular", "adwords-laminar", "matroid-coloring", "random-polymatroid", "random-oswm")


def generate(family: str, **params):
    if family == "upper-triangular":
        return upper_triangular(int(params.get("n", 5)))
    if family == "adwords-laminar":
        return adwords_laminar(int(params.get("n", 8)), int(params.get("depth", 2)),
                               int(params.get("bidders", 3)), int(params.get("seed", 0)),
                               float(params.get("budget_unit", 20.0)))
    if family == "matroid-coloring":
        graph = params.get("graph", "0-1,1-2,0-2")
        if isinstance(graph, str):
            V, edges = parse_graph(graph)
        else:
            edges = [tuple(e) for e in graph]
            V = max(max(e) for e in edges) + 1
        V = int(params.get("vertices") or V)
        return matroid_coloring(V, edges, int(params.get("delta", 1)))
    if family == "random-polymatroid":
        return random_polymatroid(int(params.get("n", 8)), int(params.get("seed", 0)))
    if family == "random-oswm":
        rng = np.random.default_rng(int(params.get("seed", 0)))
        return random_oswm(rng, int(params.get("agents", 3)), int(params.get("items", 5)),
                           bool(params.get("weighted", False)))
    raise InputError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
