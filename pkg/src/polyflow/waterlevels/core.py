"""Water levels of a load vector over a polymatroid.

Three routes are provided:

* :func:`water_levels_alg1` peels maximal densest sets off the contracted
  function (densities found by Dinkelbach iteration on :func:`sfm_min`);
* :func:`water_levels_alg2` raises a common scale on the unfrozen elements
  and freezes the largest tight set whenever one appears;
* :func:`water_level_brute` evaluates the max-min definition directly,
  together with the min-max value and a saddle pair.

The first two return a :class:`WaterLevelDecomposition` carrying the chain,
the strictly decreasing densities and the dual solution of the utility
allocation program.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .._config import get_tol
from ..exceptions import CapabilityError, InputError
from ..submodular.oracles import SubmodularOracle, set_of
from ..submodular.sfm import sfm_min

LEVEL_MERGE = 1e-12


@dataclass(frozen=True)
class WaterLevelDecomposition:
    w: np.ndarray
    chain: tuple[frozenset, ...]
    densities: tuple[float, ...]
    alpha: tuple[float, ...]
    u: np.ndarray
    method: str = "alg1"

    @property
    def levels(self) -> int:
        return len(self.densities)

    def to_dict(self) -> dict:
        return {
            "w": [float(v) for v in self.w],
            "chain": [sorted(int(e) for e in S) for S in self.chain],
            "densities": [float(t) for t in self.densities],
            "alpha": [float(a) for a in self.alpha],
            "u": [float(v) for v in self.u],
        }


def _check_load(f: SubmodularOracle, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (f.n,):
        raise InputError(f"load vector must have length {f.n}")
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise InputError("loads must be finite and nonnegative")
    for e in np.nonzero(x > 0)[0]:
        if f([int(e)]) <= 0:
            raise InputError(f"element {int(e)} carries load but has f({{e}}) = 0")
    return x


def decomposition_from_levels(f: SubmodularOracle, x: np.ndarray, w: np.ndarray,
                              method: str) -> WaterLevelDecomposition:
    """Chain, densities and dual values determined by a level vector."""
    n = f.n
    w = np.asarray(w, dtype=float).copy()
    if n == 0:
        return WaterLevelDecomposition(w, (), (), (), np.zeros(0), method)
    order = np.argsort(-w, kind="stable")
    levels: list[float] = []
    groups: list[list[int]] = []
    for e in order:
        val = w[e]
        if levels and levels[-1] - val <= LEVEL_MERGE * max(1.0, abs(levels[-1])):
            groups[-1].append(int(e))
        else:
            levels.append(float(val))
            groups.append([int(e)])
    for t, grp in zip(levels, groups):
        w[grp] = t
    chain = []
    acc: set[int] = set()
    for grp in groups:
        acc.update(grp)
        chain.append(frozenset(acc))
    alpha = [levels[i] - levels[i + 1] for i in range(len(levels) - 1)] + [levels[-1]]
    u = np.zeros(n)
    pos = w > 0
    u[pos] = x[pos] / w[pos]
    if levels[-1] <= 0:
        # Zero level: complete to a base by the greedy rule on the contraction.
        prev = chain[-2] if len(chain) > 1 else frozenset()
        cur = set(prev)
        base_val = f(prev)
        for e in sorted(groups[-1]):
            cur.add(e)
            val = f(cur)
            u[e] = val - base_val
            base_val = val
    return WaterLevelDecomposition(w, tuple(chain), tuple(levels), tuple(alpha), u, method)


# ---------------------------------------------------------------------------
# contraction route: densest sets on contractions


def _block_levels_alg1(f: SubmodularOracle, x: np.ndarray, tol: float) -> np.ndarray:
    n = f.n
    w = np.zeros(n)
    T: frozenset = frozenset()
    f_T = 0.0
    prev_t = None
    scale_tol = tol * max(1.0, f(range(n)), float(x.sum()))
    while len(T) < n:
        R = [e for e in range(n) if e not in T]
        f_R = f(T | frozenset(R)) - f_T
        x_R = float(x[R].sum())
        if f_R <= scale_tol:
            # Whatever remains is spanned by T; it shares the level that spans it.
            w[R] = prev_t if prev_t is not None else 0.0
            break
        t = x_R / f_R
        while True:
            res = sfm_min(f, x, scale=t, contracted=T, which="max", tol=scale_tol)
            if res.value >= -scale_tol or not res.minimizer:
                S = res.minimizer
                break
            S = res.minimizer
            f_S = f(T | S) - f_T
            t_new = float(x[list(S)].sum()) / f_S
            if t_new <= t * (1 + 1e-15):
                break
            t = t_new
        if not S:
            S = frozenset(R)
        w[list(S)] = t
        T = T | S
        f_T = f(T)
        prev_t = t
    return w


def water_levels_alg1(f: SubmodularOracle, x, tol: float | None = None) -> WaterLevelDecomposition:
    """Water levels by repeated maximal densest sets over contractions."""
    x = _check_load(f, x)
    tol = get_tol() * 1e-2 if tol is None else tol
    w = np.zeros(f.n)
    for k, block in enumerate(f.blocks()):
        sub = f.block_oracle(k)
        idx = list(block)
        w[idx] = _block_levels_alg1(sub, x[idx] if sub is not f else x, tol)
    return decomposition_from_levels(f, x, w, "alg1")


# ---------------------------------------------------------------------------
# freezing route


def water_levels_alg2(f: SubmodularOracle, x, tol: float | None = None) -> WaterLevelDecomposition:
    """Water levels by raising a common scale and freezing tight sets.

    Frozen elements keep the load they had at their freeze scale.  Each
    round finds the largest feasible scale by Newton steps from above
    (every violated set gives the exact scale at which it becomes tight)
    and freezes the maximal tight set.  Zero-load elements that never
    enter a tight set are pinned at level 0.
    """
    x = _check_load(f, x)
    n = f.n
    tol = get_tol() * 1e-2 if tol is None else tol
    scale_tol = tol * max(1.0, f(range(n)), float(x.sum()))
    frozen = np.zeros(n, dtype=bool)
    freeze_scale = np.zeros(n)
    w = np.zeros(n)
    while True:
        live = np.nonzero(~frozen & (x > 0))[0]
        if live.size == 0:
            break
        F = frozenset(np.nonzero(frozen)[0].tolist())
        f_F = f(F)
        y_frozen = np.where(frozen, freeze_scale * x, 0.0)
        t = min((f(F | {int(e)}) - f_F) / x[e] for e in live)
        while True:
            y = np.where(frozen, y_frozen, t * x)
            res = sfm_min(f, y, scale=1.0, which="max", tol=scale_tol)
            if res.value >= -scale_tol:
                tight = res.minimizer
                break
            S = res.minimizer
            unf = [e for e in S if not frozen[e]]
            load_unf = float(x[unf].sum())
            t_new = (f(S) - float(y_frozen[list(S)].sum())) / load_unf
            if t_new >= t * (1 - 1e-15):
                tight = res.minimizer
                break
            t = t_new
        new = [e for e in tight if not frozen[e]]
        if not new:
            raise RuntimeError("freezing made no progress")
        for e in new:
            frozen[e] = True
            freeze_scale[e] = t
            w[e] = 1.0 / t if t > 0 else np.inf
    return decomposition_from_levels(f, x, w, "alg2")


# ---------------------------------------------------------------------------
# Brute force from the definition

BRUTE_LIMIT = 16


class BruteLevel(NamedTuple):
    maxmin: float
    minmax: float
    S: frozenset
    T: frozenset


def water_level_brute(f: SubmodularOracle, x, e: int, tol: float | None = None) -> BruteLevel:
    """Max-min water level of ``e``, the min-max value and a saddle pair."""
    x = np.asarray(x, dtype=float)
    if f.n > BRUTE_LIMIT:
        raise CapabilityError(f"brute-force water levels need n <= {BRUTE_LIMIT}")
    if x.shape != (f.n,) or np.any(x < 0):
        raise InputError("loads must be a nonnegative vector over the ground set")
    tol = get_tol() if tol is None else tol
    n = f.n
    table = f.table()
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    xsum = bits @ x
    bit_e = np.int64(1) << e
    S_masks = masks[(masks & bit_e) != 0]
    without = masks[(masks & bit_e) == 0]
    marg = table[without | bit_e] - table[without]
    T_masks = without[marg > tol * max(1.0, float(table[-1]))]
    if T_masks.size == 0:
        raise InputError(f"element {e} is a loop")
    row_min = np.empty(S_masks.size)
    col_max = np.full(T_masks.size, -np.inf)
    fT = table[T_masks]
    chunk = max(1, (1 << 22) // max(1, T_masks.size))
    for start in range(0, S_masks.size, chunk):
        Sm = S_masks[start:start + chunk]
        num = xsum[Sm[:, None] & ~T_masks[None, :]]
        den = table[Sm[:, None] | T_masks[None, :]] - fT[None, :]
        ratio = num / den
        row_min[start:start + chunk] = ratio.min(axis=1)
        np.maximum(col_max, ratio.max(axis=0), out=col_max)
    i = int(np.argmax(row_min))
    j = int(np.argmin(col_max))
    return BruteLevel(float(row_min[i]), float(col_max[j]), set_of(int(S_masks[i])), set_of(int(T_masks[j])))


def water_levels_brute(f: SubmodularOracle, x) -> np.ndarray:
    return np.array([water_level_brute(f, x, e).maxmin for e in range(f.n)])


def naive_level(f: SubmodularOracle, x, e: int) -> float:
    """The one-sided ratio ``max_{S∋e} x(S)/f(S)`` (not a water level in general)."""
    x = np.asarray(x, dtype=float)
    table = f.table()
    best = 0.0
    for mask in range(1 << f.n):
        if mask >> e & 1 and table[mask] > 0:
            best = max(best, float(sum(x[i] for i in set_of(mask))) / table[mask])
    return best


# ---------------------------------------------------------------------------
# Cached block-level computation used by the solvers


class LevelCache:
    """Memoises per-block water levels keyed by the block's load bytes."""

    def __init__(self, f: SubmodularOracle, maxsize: int = 200_000, tol: float | None = None):
        self.f = f
        self.tol = get_tol() * 1e-2 if tol is None else tol
        self.blocks = [np.asarray(b, dtype=int) for b in f.blocks()]
        self._store: dict = {}
        self._lock = threading.Lock()
        self.maxsize = maxsize
        self.hits = 0
        self.misses = 0

    def block_levels(self, k: int, load: np.ndarray) -> np.ndarray:
        key = (k, load.tobytes())
        with self._lock:
            hit = self._store.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        self.misses += 1
        sub = self.f.block_oracle(k)
        lv = _block_levels_alg1(sub, load, self.tol)
        lv.setflags(write=False)
        with self._lock:
            if len(self._store) >= self.maxsize:
                self._store.clear()
            self._store[key] = lv
        return lv

    def levels(self, load) -> np.ndarray:
        load = np.ascontiguousarray(load, dtype=float)
        w = np.zeros(self.f.n)
        for k, idx in enumerate(self.blocks):
            w[idx] = self.block_levels(k, np.ascontiguousarray(load[idx]))
        return w


# ---------------------------------------------------------------------------
# Thresholded water levels


@dataclass(frozen=True)
class ThresholdedLevels:
    """Water levels of the load restricted to bang-per-buck at least ``t``.

    ``thresholds`` holds the distinct ratios in decreasing order followed by
    ``0``; ``levels[k]`` is the level vector valid on ``(thresholds[k+1],
    thresholds[k]]`` and the last entry (for ``t = 0``) equals the plain
    levels of the whole load.
    """

    thresholds: np.ndarray
    levels: np.ndarray
    decompositions: tuple = field(default=(), compare=False)

    @property
    def widths(self) -> np.ndarray:
        """Interval lengths ``r_k - r_{k+1}`` for each ratio class."""
        return self.thresholds[:-1] - self.thresholds[1:]


def _ratios(b, v) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(b <= 0):
        raise InputError("costs must be positive")
    if np.any(v < 0):
        raise InputError("values must be nonnegative")
    return v / b


def thresholded_levels(f: SubmodularOracle, x, b, v, cache: LevelCache | None = None,
                       with_decompositions: bool = False) -> ThresholdedLevels:
    """One level vector per distinct bang-per-buck ratio, plus the ``t = 0`` entry."""
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    ratio = _ratios(b, v)
    load = b * x
    distinct = np.unique(ratio)[::-1]
    thresholds = np.concatenate([distinct, [0.0]])
    cache = cache or LevelCache(f)
    rows = []
    decs = []
    for t in thresholds:
        filt = np.where(ratio >= t, load, 0.0)
        rows.append(cache.levels(filt))
        if with_decompositions:
            decs.append(decomposition_from_levels(f, filt, rows[-1], "alg1"))
    return ThresholdedLevels(thresholds, np.array(rows), tuple(decs))


# ---------------------------------------------------------------------------
# Tight sets and optimality checks


class TightSet(NamedTuple):
    members: frozenset | None
    slack: float


def min_slack_containing(f: SubmodularOracle, load, e: int, which: str = "min",
                         exclude=()) -> tuple[frozenset, float]:
    """``min_{S∋e} f(S) - load(S)`` and its minimal (or maximal) minimiser.

    Only the block of ``e`` is searched; other blocks cannot lower the value
    of a feasible load.
    """
    load = np.asarray(load, dtype=float)
    owner, local = f.block_index()
    k = int(owner[e])
    block = f.blocks()[k]
    sub = f.block_oracle(k)
    if sub is f:
        res = sfm_min(f, load, include=e, exclude=exclude, which=which)
        return res.minimizer, res.value
    loc = {g: i for i, g in enumerate(block)}
    res = sfm_min(sub, load[list(block)], include=int(local[e]),
                  exclude=[loc[g] for g in exclude if g in loc], which=which)
    return frozenset(block[i] for i in res.minimizer), res.value


def minimal_tight_set(f: SubmodularOracle, load, e: int, tol: float | None = None) -> TightSet:
    """Inclusion-minimal tight set containing ``e``; ``members`` is ``None`` if none exists."""
    tol = get_tol() if tol is None else tol
    S, slack = min_slack_containing(f, load, e, which="min")
    if slack <= tol * max(1.0, f(S)):
        return TightSet(S, slack)
    return TightSet(None, slack)


@dataclass
class KktReport:
    passed: bool
    checks: dict
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": dict(self.checks),
                "witness": {k: (sorted(v) if isinstance(v, frozenset) else v) for k, v in self.witness.items()}}


def verify_sua_kkt(f: SubmodularOracle, x, dec: WaterLevelDecomposition, tol: float = 1e-7,
                   exhaustive_limit: int = 14) -> KktReport:
    """Optimality conditions of the utility allocation program for ``dec``.

    Primal feasibility of ``u`` is checked on every subset when ``n`` is at
    most ``exhaustive_limit`` and by exact minimisation of ``f - u``
    otherwise.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(dec.u, dtype=float)
    scale = max(1.0, float(f(range(f.n))))
    checks = {}
    witness: dict = {}
    if f.n <= exhaustive_limit:
        table = f.table()
        masks = np.arange(1 << f.n, dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(f.n)) & 1).astype(float)
        slack = table - bits @ u
        worst = int(np.argmin(slack))
        ok = bool(slack[worst] >= -tol * scale) and bool(np.all(u >= -tol))
        if not ok:
            witness["primal"] = set_of(worst)
    else:
        res = sfm_min(f, u, which="any")
        ok = res.value >= -tol * scale and bool(np.all(u >= -tol))
        if not ok:
            witness["primal"] = res.minimizer
    checks["primal_feasible"] = ok
    checks["dual_nonnegative"] = all(a >= -tol for a in dec.alpha)
    if not checks["dual_nonnegative"]:
        witness["dual"] = int(np.argmin(dec.alpha))
    stat_ok = True
    for e in np.nonzero(x > 0)[0]:
        mult = sum(a for S, a in zip(dec.chain, dec.alpha) if e in S)
        if u[e] <= 0 or abs(x[e] / u[e] - mult) > tol * max(1.0, mult):
            stat_ok = False
            witness["stationarity"] = int(e)
            break
    checks["stationarity"] = stat_ok
    cs_ok = True
    for ell, S in enumerate(dec.chain):
        if abs(float(u[list(S)].sum()) - f(S)) > tol * scale:
            cs_ok = False
            witness["slackness"] = ell
            break
    checks["complementary_slackness"] = cs_ok
    return KktReport(all(checks.values()), checks, witness)
