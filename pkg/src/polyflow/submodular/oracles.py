"""Monotone submodular set-function oracles.

Every oracle works over dense integer element ids ``0..n-1`` and is called
with any iterable of ids.  Oracles are immutable after construction;
evaluation results are memoised in a thread-safe LRU cache.

Oracles that are direct sums expose their components through ``blocks()``
and ``block_oracle(k)``; minimisation and water-level routines use this to
work one component at a time.
"""
from __future__ import annotations

import functools
import itertools
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ..exceptions import CapabilityError, InputError

TABLE_LIMIT = 20


@dataclass(frozen=True)
class GroundSet:
    """Dense element ids ``0..n-1`` with optional display labels."""

    n: int
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise InputError("ground set size must be nonnegative")
        for key in self.labels:
            if not 0 <= key < self.n:
                raise InputError(f"label for unknown element {key}")

    def __iter__(self):
        return iter(range(self.n))

    def __len__(self):
        return self.n

    def label(self, e: int) -> str:
        return self.labels.get(e, str(e))


def mask_of(S: Iterable[int]) -> int:
    m = 0
    for e in S:
        m |= 1 << e
    return m


def set_of(mask: int) -> frozenset:
    out = []
    e = 0
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return frozenset(out)


class SubmodularOracle:
    """Base class: evaluation of a monotone submodular ``f`` with ``f(∅) = 0``."""

    kind = "abstract"

    def __init__(self, n: int):
        n = int(n)
        if n < 0:
            raise InputError("oracle ground set size must be nonnegative")
        self.n = n
        self._cached_eval = functools.lru_cache(maxsize=1 << 17)(self._eval)
        self._lock = threading.Lock()
        self._table = None
        self._block_cache = None
        self._blocks = None
        self._block_index = None

    # caches and the lock are rebuilt, so oracles pickle and deep-copy
    def __getstate__(self):
        state = dict(self.__dict__)
        del state["_cached_eval"], state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._cached_eval = functools.lru_cache(maxsize=1 << 17)(self._eval)
        self._lock = threading.Lock()

    # -- evaluation -----------------------------------------------------
    def _eval(self, S: frozenset) -> float:
        raise NotImplementedError

    def __call__(self, S: Iterable[int] = ()) -> float:
        S = S if isinstance(S, frozenset) else frozenset(S)
        if S and (min(S) < 0 or max(S) >= self.n):
            raise InputError(f"subset {sorted(S)} not within ground set of size {self.n}")
        return self._cached_eval(S)

    def marginal(self, e: int, T: Iterable[int] = ()) -> float:
        """``f_T({e}) = f(T + e) - f(T)``."""
        T = frozenset(T)
        return self(T | {e}) - self(T)

    def table(self) -> np.ndarray:
        """Values of ``f`` on every subset, indexed by bitmask (n ≤ 20)."""
        if self.n > TABLE_LIMIT:
            raise CapabilityError(f"value table needs n <= {TABLE_LIMIT}, got {self.n}")
        with self._lock:
            if self._table is None:
                vals = np.empty(1 << self.n, dtype=float)
                for mask in range(1 << self.n):
                    vals[mask] = float(self._cached_eval(set_of(mask)))
                vals.setflags(write=False)
                self._table = vals
        return self._table

    # -- structure ------------------------------------------------------
    def _compute_blocks(self) -> list[tuple[int, ...]]:
        return [tuple(range(self.n))]

    def blocks(self) -> list[tuple[int, ...]]:
        """Direct-sum components; the default is a single block."""
        if self._blocks is None:
            found = [tuple(b) for b in self._compute_blocks() if len(b)]
            self._blocks = found
        return self._blocks

    def block_index(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays ``owner[e]`` (block of ``e``) and ``local[e]`` (position within it)."""
        if self._block_index is None:
            owner = np.full(self.n, -1, dtype=int)
            local = np.full(self.n, -1, dtype=int)
            for k, block in enumerate(self.blocks()):
                for i, e in enumerate(block):
                    owner[e] = k
                    local[e] = i
            self._block_index = (owner, local)
        return self._block_index

    def _make_block_oracle(self, k: int) -> SubmodularOracle:
        return RestrictionOracle(self, self.blocks()[k])

    def block_oracle(self, k: int) -> SubmodularOracle:
        """Oracle of block ``k`` on local ids (position within the block)."""
        with self._lock:
            if self._block_cache is None:
                self._block_cache = {}
        blocks = self.blocks()
        if len(blocks) == 1 and blocks[0] == tuple(range(self.n)):
            return self
        if k not in self._block_cache:
            self._block_cache[k] = self._make_block_oracle(k)
        return self._block_cache[k]

    def cardinality_profile(self) -> np.ndarray | None:
        """``h`` with ``f(S) = h[|S|]`` when ``f`` only depends on ``|S|``."""
        return None

    # -- views ----------------------------------------------------------
    def contract(self, T: Iterable[int]) -> ContractionOracle:
        return ContractionOracle(self, T)

    def restrict(self, elements: Sequence[int]) -> RestrictionOracle:
        return RestrictionOracle(self, elements)

    def scale(self, factor: float) -> ScaledOracle:
        return ScaledOracle(self, factor)

    def to_spec(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} has no JSON form")

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


# ---------------------------------------------------------------------------
# matroid rank families
# ---------------------------------------------------------------------------


class UniformOracle(SubmodularOracle):
    """Rank of the uniform matroid ``U(k, n)``: ``min(|S|, k)``."""

    kind = "uniform"

    def __init__(self, n: int, rank: int | None = None):
        super().__init__(n)
        if rank is None:
            rank = self.n
        self.rank = int(rank) if float(rank).is_integer() else float(rank)
        if self.rank < 0:
            raise InputError("uniform matroid rank must be nonnegative")

    def _eval(self, S):
        return float(min(len(S), self.rank))

    def cardinality_profile(self):
        return np.minimum(np.arange(self.n + 1), self.rank).astype(float)

    def to_spec(self):
        return {"kind": "uniform", "n": self.n, "rank": self.rank}


class PartitionOracle(SubmodularOracle):
    """Partition matroid: ``sum_i min(|S ∩ P_i|, c_i)``."""

    kind = "partition"

    def __init__(self, parts: Sequence[Sequence[int]], capacities: Sequence[float] | None = None,
                 n: int | None = None):
        parts = [tuple(int(e) for e in p) for p in parts]
        flat = [e for p in parts for e in p]
        if len(flat) != len(set(flat)):
            raise InputError("partition parts overlap")
        size = (max(flat) + 1 if flat else 0) if n is None else int(n)
        if sorted(flat) != list(range(size)):
            raise InputError("partition parts must cover elements 0..n-1 exactly")
        super().__init__(size)
        if capacities is None:
            capacities = [1] * len(parts)
        if len(capacities) != len(parts):
            raise InputError("one capacity per part required")
        if any(c < 0 for c in capacities):
            raise InputError("capacities must be nonnegative")
        self.parts = parts
        self.capacities = [int(c) if float(c).is_integer() else float(c) for c in capacities]
        self._part_of = np.empty(size, dtype=int)
        for i, p in enumerate(parts):
            self._part_of[list(p)] = i

    def _eval(self, S):
        counts = {}
        for e in S:
            i = self._part_of[e]
            counts[i] = counts.get(i, 0) + 1
        return float(sum(min(c, self.capacities[i]) for i, c in counts.items()))

    def _compute_blocks(self):
        return [p for p in self.parts if p]

    def _make_block_oracle(self, k):
        nonempty = [i for i, p in enumerate(self.parts) if p]
        i = nonempty[k]
        cap = self.capacities[i]
        return UniformOracle(len(self.parts[i]), min(len(self.parts[i]), cap))

    def to_spec(self):
        return {"kind": "partition", "parts": [list(p) for p in self.parts],
                "capacities": list(self.capacities)}


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self, size):
        self.parent = list(range(size))

    def find(self, a):
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _components(num_vertices: int, edges: Sequence[tuple[int, int]]) -> list[tuple[int, ...]]:
    """Group edge indices by connected component (in first-appearance order)."""
    uf = _UnionFind(num_vertices)
    for a, b in edges:
        uf.union(a, b)
    groups: dict[int, list[int]] = {}
    for k, (a, _) in enumerate(edges):
        groups.setdefault(uf.find(a), []).append(k)
    return [tuple(g) for g in groups.values()]


class GraphicOracle(SubmodularOracle):
    """Graphic matroid rank: size of a spanning forest of the chosen edges.

    Rank is computed as (#vertices − #components) of the subgraph with a
    union-find rebuilt per query; results are memoised.
    """

    kind = "graphic"

    def __init__(self, vertices: int, edges: Sequence[Sequence[int]]):
        edges = [tuple(int(v) for v in e) for e in edges]
        for e in edges:
            if len(e) != 2 or not all(0 <= v < vertices for v in e):
                raise InputError(f"malformed edge {e} for graph on {vertices} vertices")
        super().__init__(len(edges))
        self.vertices = int(vertices)
        self.edges = edges

    def _eval(self, S):
        uf = _UnionFind(self.vertices)
        rank = 0
        for k in S:
            a, b = self.edges[k]
            if uf.union(a, b):
                rank += 1
        return float(rank)

    def _compute_blocks(self):
        return _components(self.vertices, self.edges)

    def _make_block_oracle(self, k):
        idx = self.blocks()[k]
        verts = sorted({v for i in idx for v in self.edges[i]})
        relabel = {v: j for j, v in enumerate(verts)}
        return GraphicOracle(len(verts), [(relabel[self.edges[i][0]], relabel[self.edges[i][1]]) for i in idx])

    def to_spec(self):
        return {"kind": "graphic", "vertices": self.vertices, "edges": [list(e) for e in self.edges]}


class TransversalOracle(SubmodularOracle):
    """Transversal matroid rank via maximum bipartite matching (augmenting paths).

    Element ``e`` may be matched to any right vertex in ``neighbors[e]``.
    """

    kind = "transversal"

    def __init__(self, neighbors: Sequence[Sequence[int]]):
        super().__init__(len(neighbors))
        self.neighbors = [tuple(sorted({int(r) for r in nb})) for nb in neighbors]

    def _eval(self, S):
        match_right: dict[int, int] = {}

        def augment(e, seen):
            for r in self.neighbors[e]:
                if r in seen:
                    continue
                seen.add(r)
                if r not in match_right or augment(match_right[r], seen):
                    match_right[r] = e
                    return True
            return False

        return float(sum(1 for e in sorted(S) if augment(e, set())))

    def _compute_blocks(self):
        rights = sorted({r for nb in self.neighbors for r in nb})
        offset = {r: self.n + i for i, r in enumerate(rights)}
        uf = _UnionFind(self.n + len(rights))
        for e, nb in enumerate(self.neighbors):
            for r in nb:
                uf.union(e, offset[r])
        groups: dict[int, list[int]] = {}
        for e in range(self.n):
            groups.setdefault(uf.find(e), []).append(e)
        return [tuple(g) for g in groups.values()]

    def _make_block_oracle(self, k):
        return TransversalOracle([self.neighbors[e] for e in self.blocks()[k]])

    def to_spec(self):
        return {"kind": "transversal", "neighbors": [list(nb) for nb in self.neighbors]}


# ---------------------------------------------------------------------------
# other polymatroid families
# ---------------------------------------------------------------------------


class CoverageOracle(SubmodularOracle):
    """Weighted coverage: total weight of the items covered by the chosen sets."""

    kind = "coverage"

    def __init__(self, covers: Sequence[Sequence[int]], weights: Sequence[float]):
        super().__init__(len(covers))
        self.covers = [tuple(sorted({int(u) for u in c})) for c in covers]
        self.weights = [float(w) for w in weights]
        if any(w < 0 for w in self.weights):
            raise InputError("coverage weights must be nonnegative")
        for c in self.covers:
            if any(not 0 <= u < len(self.weights) for u in c):
                raise InputError("coverage item out of range")

    def _eval(self, S):
        covered = set()
        for e in S:
            covered.update(self.covers[e])
        return float(sum(self.weights[u] for u in covered))

    def _compute_blocks(self):
        offset = self.n
        uf = _UnionFind(self.n + len(self.weights))
        for e, c in enumerate(self.covers):
            for u in c:
                uf.union(e, offset + u)
        groups: dict[int, list[int]] = {}
        for e in range(self.n):
            groups.setdefault(uf.find(e), []).append(e)
        return [tuple(g) for g in groups.values()]

    def _make_block_oracle(self, k):
        idx = self.blocks()[k]
        items = sorted({u for e in idx for u in self.covers[e]})
        relabel = {u: j for j, u in enumerate(items)}
        return CoverageOracle([[relabel[u] for u in self.covers[e]] for e in idx],
                              [self.weights[u] for u in items])

    def to_spec(self):
        return {"kind": "coverage", "covers": [list(c) for c in self.covers], "weights": list(self.weights)}


class TableOracle(SubmodularOracle):
    """Explicit value table indexed by bitmask.

    With ``exact=True`` the values are kept as :class:`fractions.Fraction`
    and ``__call__`` returns them unconverted (cross-tests only, n ≤ 10).
    """

    kind = "table"

    def __init__(self, n: int, values, exact: bool = False):
        super().__init__(n)
        if self.n > TABLE_LIMIT or (exact and self.n > 10):
            raise CapabilityError("explicit table too large")
        self.exact = bool(exact)
        if isinstance(values, dict):
            vals = [None] * (1 << self.n)
            vals[0] = 0
            for key, val in values.items():
                S = key if isinstance(key, (frozenset, set, tuple, list)) else _parse_key(key)
                vals[mask_of(S)] = val
            if any(v is None for v in vals):
                missing = [sorted(set_of(m)) for m, v in enumerate(vals) if v is None]
                raise InputError(f"table misses subsets, e.g. {missing[0]}")
        else:
            vals = list(values)
            if len(vals) != 1 << self.n:
                raise InputError("table must list 2**n values")
        conv = Fraction if self.exact else float
        self.values = [conv(v) for v in vals]
        if self.values[0] != 0:
            raise InputError("table must have f(∅) = 0")

    def _eval(self, S):
        return self.values[mask_of(S)]

    def to_spec(self):
        out = {}
        for m in range(1, 1 << self.n):
            out[",".join(str(e) for e in sorted(set_of(m)))] = float(self.values[m])
        return {"kind": "table", "n": self.n, "values": out}


def _parse_key(key: str) -> frozenset:
    key = key.strip()
    if not key:
        return frozenset()
    return frozenset(int(tok) for tok in key.split(","))


# ---------------------------------------------------------------------------
# wrappers
# ---------------------------------------------------------------------------


class ScaledOracle(SubmodularOracle):
    kind = "scaled"

    def __init__(self, base: SubmodularOracle, factor: float):
        if factor < 0:
            raise InputError("scale factor must be nonnegative")
        super().__init__(base.n)
        self.base = base
        self.factor = float(factor)

    def _eval(self, S):
        return self.factor * self.base(S)

    def _compute_blocks(self):
        return self.base.blocks()

    def _make_block_oracle(self, k):
        return ScaledOracle(self.base.block_oracle(k), self.factor)

    def cardinality_profile(self):
        h = self.base.cardinality_profile()
        return None if h is None else self.factor * h

    def to_spec(self):
        return {"kind": "scale", "factor": self.factor, "base": self.base.to_spec()}


class DirectSumOracle(SubmodularOracle):
    """Direct sum; component ``i`` occupies the next ``parts[i].n`` ids."""

    kind = "direct-sum"

    def __init__(self, parts: Sequence[SubmodularOracle]):
        self.parts = list(parts)
        self.offsets = np.cumsum([0] + [p.n for p in self.parts])
        super().__init__(int(self.offsets[-1]))
        self._owner = np.repeat(np.arange(len(self.parts)), [p.n for p in self.parts])

    def _eval(self, S):
        local: dict[int, list[int]] = {}
        for e in S:
            i = self._owner[e]
            local.setdefault(i, []).append(e - self.offsets[i])
        return float(sum(self.parts[i](loc) for i, loc in local.items()))

    def _compute_blocks(self):
        out = []
        for i, p in enumerate(self.parts):
            off = int(self.offsets[i])
            out.extend(tuple(off + e for e in b) for b in p.blocks())
        return out

    def _make_block_oracle(self, k):
        for p in self.parts:
            nb = len(p.blocks())
            if k < nb:
                return p.block_oracle(k)
            k -= nb
        raise IndexError(k)

    def to_spec(self):
        return {"kind": "direct-sum", "parts": [p.to_spec() for p in self.parts]}


class ContractionOracle(SubmodularOracle):
    """``f_T(S) = f(S ∪ T) − f(T)`` on the base ground set (T becomes loops)."""

    kind = "contraction"

    def __init__(self, base: SubmodularOracle, contracted: Iterable[int]):
        super().__init__(base.n)
        self.base = base
        self.contracted = frozenset(int(e) for e in contracted)
        if any(not 0 <= e < base.n for e in self.contracted):
            raise InputError("contracted set outside ground set")
        self._offset = base(self.contracted)

    def _eval(self, S):
        return self.base(S | self.contracted) - self._offset

    def to_spec(self):
        return {"kind": "contract", "contracted": sorted(self.contracted), "base": self.base.to_spec()}


class RestrictionOracle(SubmodularOracle):
    """``f`` restricted to ``elements``, renumbered to local ids ``0..k-1``."""

    kind = "restriction"

    def __init__(self, base: SubmodularOracle, elements: Sequence[int]):
        elements = tuple(int(e) for e in elements)
        if len(set(elements)) != len(elements) or any(not 0 <= e < base.n for e in elements):
            raise InputError("restriction elements must be distinct ids of the base")
        super().__init__(len(elements))
        self.base = base
        self.elements = elements

    def _eval(self, S):
        return self.base(frozenset(self.elements[e] for e in S))

    def to_spec(self):
        return {"kind": "restrict", "elements": list(self.elements), "base": self.base.to_spec()}


# ---------------------------------------------------------------------------
# JSON specs
# ---------------------------------------------------------------------------


def from_spec(spec: dict) -> SubmodularOracle:
    """Build an oracle from its JSON specification."""
    from .laminar import LaminarBudgetSpec, LaminarOracle

    if not isinstance(spec, dict) or "kind" not in spec:
        raise InputError("oracle spec must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "uniform":
            return UniformOracle(spec["n"], spec.get("rank"))
        if kind == "partition":
            return PartitionOracle(spec["parts"], spec.get("capacities"), spec.get("n"))
        if kind == "graphic":
            return GraphicOracle(spec["vertices"], spec["edges"])
        if kind == "transversal":
            return TransversalOracle(spec["neighbors"])
        if kind == "coverage":
            return CoverageOracle(spec["covers"], spec["weights"])
        if kind == "laminar":
            return LaminarOracle(LaminarBudgetSpec.from_dict(spec))
        if kind == "table":
            values = spec["values"]
            n = spec.get("n")
            if n is None:
                ids = [e for key in values for e in _parse_key(key)]
                n = max(ids) + 1 if ids else 0
            return TableOracle(n, values, exact=bool(spec.get("exact", False)))
        if kind == "scale":
            return ScaledOracle(from_spec(spec["base"]), spec["factor"])
        if kind == "direct-sum":
            return DirectSumOracle([from_spec(p) for p in spec["parts"]])
        if kind == "contract":
            return ContractionOracle(from_spec(spec["base"]), spec["contracted"])
        if kind == "restrict":
            return RestrictionOracle(from_spec(spec["base"]), spec["elements"])
    except KeyError as exc:
        raise InputError(f"oracle spec of kind {kind!r} misses field {exc}") from None
    raise InputError(f"unknown oracle kind {kind!r}")


def all_subsets(elements: Sequence[int]):
    elements = list(elements)
    return itertools.chain.from_iterable(
        itertools.combinations(elements, r) for r in range(len(elements) + 1)
    )
