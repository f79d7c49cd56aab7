"""Minimisation of modular-shifted submodular functions.

The objective is ``g(S) = scale * f_T(S) - m(S)`` over ``S ⊆ E \\ T``, with
optional forced inclusions and exclusions.  Minimisers form a lattice, so
the maximal and the minimal minimiser are both well defined.

Backends
--------
``exhaustive``
    Enumerates all subsets of the free elements (ground truth).
``minnorm``
    Fujishige–Wolfe minimum-norm base, followed by a scan of the level
    sets of the min-norm point and an exact lattice refinement.
``auto``
    Splits over direct-sum blocks, uses the closed form for functions of
    cardinality only, then picks one of the two above by size.
"""
from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np

from ..exceptions import CapabilityError, InputError
from .oracles import SubmodularOracle

EXHAUSTIVE_LIMIT = 20
AUTO_EXHAUSTIVE = 14
TABLE_BLOCK = 14


class SfmResult(NamedTuple):
    minimizer: frozenset
    value: float
    backend: str


def sfm_min(oracle: SubmodularOracle, weights, scale: float = 1.0, contracted: Iterable[int] = (),
            include: Iterable[int] | int | None = None, exclude: Iterable[int] = (),
            which: str = "max", backend: str = "auto", tol: float | None = None) -> SfmResult:
    """Minimise ``scale * f_T(S) - weights(S)`` over ``S ⊆ E \\ T``.

    ``which`` selects the maximal (``"max"``), minimal (``"min"``) or an
    arbitrary (``"any"``) minimiser.
    """
    if scale < 0:
        raise InputError("scale must be nonnegative")
    if which not in ("max", "min", "any"):
        raise InputError(f"unknown minimiser selector {which!r}")
    if backend not in ("auto", "exhaustive", "minnorm"):
        raise InputError(f"unknown sfm backend {backend!r}")
    m = np.asarray(weights, dtype=float)
    if m.shape != (oracle.n,):
        raise InputError(f"weights must have length {oracle.n}")
    T = frozenset(int(e) for e in contracted)
    if include is None:
        inc = frozenset()
    elif isinstance(include, (int, np.integer)):
        inc = frozenset([int(include)])
    else:
        inc = frozenset(int(e) for e in include)
    exc = frozenset(int(e) for e in exclude)
    if inc & T:
        raise InputError(f"constraint element(s) {sorted(inc & T)} lie in the contracted set")
    if inc & exc:
        raise InputError("an element cannot be both included and excluded")
    if tol is None:
        tol = 1e-9 * max(1.0, scale * oracle(range(oracle.n)) + float(np.abs(m).sum()))

    blocks = oracle.blocks()
    if backend == "auto" and len(blocks) > 1:
        chosen: set[int] = set()
        value = 0.0
        used = set()
        for k, block in enumerate(blocks):
            sub = oracle.block_oracle(k)
            local = {e: i for i, e in enumerate(block)}
            res = _solve_single(
                sub, m[list(block)], scale,
                frozenset(local[e] for e in T if e in local),
                frozenset(local[e] for e in inc if e in local),
                frozenset(local[e] for e in exc if e in local),
                which, backend, tol,
            )
            chosen.update(block[i] for i in res.minimizer)
            value += res.value
            used.add(res.backend)
        return SfmResult(frozenset(chosen), float(value), "+".join(sorted(used)))
    return _solve_single(oracle, m, scale, T, inc, exc, which, backend, tol)


def _solve_single(oracle, m, scale, T, inc, exc, which, backend, tol) -> SfmResult:
    n = oracle.n
    free = [e for e in range(n) if e not in T and e not in exc and e not in inc]
    base = T | inc
    f_base = oracle(base)
    f_T = oracle(T) if inc else f_base
    offset = scale * (f_base - f_T) - float(m[list(inc)].sum())

    if not free:
        return SfmResult(inc, float(offset), "trivial")

    if backend == "auto":
        prof = oracle.cardinality_profile()
        if prof is not None:
            S, val = _cardinality(prof, m, scale, len(base), free, which, tol)
            return SfmResult(inc | S, float(offset + val), "cardinality")
        backend = "exhaustive" if len(free) <= AUTO_EXHAUSTIVE else "minnorm"

    if backend == "exhaustive":
        if len(free) > EXHAUSTIVE_LIMIT:
            raise CapabilityError(f"exhaustive minimisation limited to {EXHAUSTIVE_LIMIT} free elements")
        S, val = _exhaustive(oracle, m, scale, base, f_base, free, which, tol)
        return SfmResult(inc | S, float(offset + val), "exhaustive")

    S, val = _minnorm(oracle, m, scale, base, f_base, free, which, tol)
    return SfmResult(inc | S, float(offset + val), "minnorm")


# ---------------------------------------------------------------------------


def _cardinality(prof, m, scale, base_size, free, which, tol):
    order = sorted(free, key=lambda e: (-m[e], e))
    gains = np.concatenate([[0.0], np.cumsum(m[order])])
    sizes = np.arange(len(order) + 1)
    vals = scale * (prof[base_size + sizes] - prof[base_size]) - gains
    best = vals.min()
    ok = np.nonzero(vals <= best + tol)[0]
    if which == "max":
        k = int(ok[-1])
    elif which == "min":
        k = int(ok[0])
    else:
        k = int(np.argmin(vals))
    return frozenset(order[:k]), float(vals[k])


def _subset_masks(free: list[int]) -> tuple[np.ndarray, np.ndarray]:
    k = len(free)
    idx = np.arange(1 << k, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(k, dtype=np.int64)) & 1).astype(bool)
    masks = (bits * (np.int64(1) << np.asarray(free, dtype=np.int64))).sum(axis=1)
    return bits, masks


def _exhaustive(oracle, m, scale, base, f_base, free, which, tol):
    bits, masks = _subset_masks(free)
    if oracle.n <= TABLE_BLOCK:
        table = oracle.table()
        base_mask = sum(1 << e for e in base)
        fvals = table[masks | base_mask]
    else:
        fvals = np.empty(len(masks))
        for i, row in enumerate(bits):
            fvals[i] = oracle(base | frozenset(np.asarray(free)[row].tolist()))
    vals = scale * (fvals - f_base) - bits.astype(float) @ m[free]
    best = float(vals.min())
    if which == "any":
        pick = bits[int(np.argmin(vals))]
    else:
        near = bits[vals <= best + tol]
        pick = near.any(axis=0) if which == "max" else near.all(axis=0)
    S = frozenset(e for e, keep in zip(free, pick) if keep)
    value = scale * (oracle(base | S) - f_base) - float(m[list(S)].sum())
    return S, value


# ---------------------------------------------------------------------------
# Fujishige–Wolfe


def _reduced(oracle, m, scale, base, f_base, free):
    """``h(S) = scale*(f(base ∪ S) − f(base)) − m(S)`` on local ids of ``free``."""
    free = list(free)
    fm = m[free]

    def h(local: Iterable[int]) -> float:
        local = list(local)
        S = frozenset(free[i] for i in local)
        return scale * (oracle(base | S) - f_base) - float(fm[local].sum())

    return h


def _greedy_vertex(h, k: int, direction: np.ndarray) -> np.ndarray:
    order = np.lexsort((np.arange(k), direction))
    q = np.empty(k)
    prev = 0.0
    prefix: list[int] = []
    for e in order:
        prefix.append(int(e))
        cur = h(prefix)
        q[e] = cur - prev
        prev = cur
    return q


def _affine_min(P: np.ndarray) -> np.ndarray:
    """Coefficients (summing to one) of the min-norm point in the affine hull of rows of ``P``."""
    r = P.shape[0]
    M = np.zeros((r + 1, r + 1))
    M[:r, :r] = P @ P.T
    M[:r, r] = 1.0
    M[r, :r] = 1.0
    rhs = np.zeros(r + 1)
    rhs[r] = 1.0
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:r]


def min_norm_point(h, k: int, max_iter: int = 2000, eps: float = 1e-12) -> np.ndarray:
    """Minimum-norm point of the base polytope of ``h`` (``h(∅) = 0``)."""
    x = _greedy_vertex(h, k, np.zeros(k))
    P = x[None, :].copy()
    lam = np.array([1.0])
    for _ in range(max_iter):
        q = _greedy_vertex(h, k, x)
        scale = max(1.0, float(np.max(np.sum(P * P, axis=1))))
        if x @ x - x @ q <= eps * scale:
            break
        if any(np.allclose(q, p, atol=1e-15, rtol=0) for p in P):
            break
        P = np.vstack([P, q])
        lam = np.append(lam, 0.0)
        while True:
            mu = _affine_min(P)
            if np.all(mu > eps):
                lam = mu
                break
            neg = mu <= eps
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, lam / (lam - mu), np.inf)
            theta = float(np.clip(np.min(ratios), 0.0, 1.0))
            lam = (1 - theta) * lam + theta * mu
            keep = lam > eps
            if not keep.any():
                keep[np.argmax(lam)] = True
            P = P[keep]
            lam = lam[keep] / lam[keep].sum()
        x = lam @ P
    return x


def _minnorm(oracle, m, scale, base, f_base, free, which, tol):
    k = len(free)
    h = _reduced(oracle, m, scale, base, f_base, free)
    x = min_norm_point(h, k)
    order = np.lexsort((np.arange(k), x))
    best_val, best_len = 0.0, 0
    prefix_val = []
    for j in range(1, k + 1):
        val = h(order[:j])
        prefix_val.append(val)
        if val < best_val - tol:
            best_val, best_len = val, j
    local = set(int(e) for e in order[:best_len])
    # Candidate sets from the sign pattern of x; accept any that is at least as good.
    for cand in ({i for i in range(k) if x[i] < -tol}, {i for i in range(k) if x[i] <= tol}):
        val = h(cand)
        if val < best_val - tol:
            best_val, local = val, set(cand)
    local, best_val = _refine(h, k, local, best_val, which, tol)
    S = frozenset(free[i] for i in local)
    return S, best_val


def _refine(h, k, local, value, which, tol):
    """Lattice-exact refinement to the maximal or minimal minimiser.

    Element ``e`` belongs to the maximal minimiser iff the best set that
    contains both the current minimiser and ``e`` still attains the minimum.
    Single-element growth is not enough: the next minimiser may differ by
    several elements at once.
    """
    if which == "any":
        return local, value
    if which == "max":
        for e in range(k):
            if e in local:
                continue
            sub = _subsolve(h, k, forced=local | {e}, banned=set())
            if sub[1] <= value + tol:
                local = local | sub[0]
        return local, h(local)
    for e in sorted(local):
        if e not in local:
            continue
        sub = _subsolve(h, k, forced=set(), banned={e})
        if sub[1] <= value + tol:
            local = local & sub[0]
    return local, h(local)


def _subsolve(h, k, forced, banned):
    rest = [i for i in range(k) if i not in forced and i not in banned]
    base_val = h(forced)
    if not rest:
        return set(forced), base_val

    def h2(sub):
        return h(list(forced) + [rest[i] for i in sub]) - base_val

    kk = len(rest)
    if kk <= 10:
        best, arg = 0.0, 0
        for mask in range(1, 1 << kk):
            val = h2([i for i in range(kk) if mask >> i & 1])
            if val < best:
                best, arg = val, mask
        chosen = {rest[i] for i in range(kk) if arg >> i & 1}
        return set(forced) | chosen, base_val + best
    x = min_norm_point(h2, kk)
    order = np.lexsort((np.arange(kk), x))
    best, best_len = 0.0, 0
    for j in range(1, kk + 1):
        val = h2(order[:j])
        if val < best:
            best, best_len = val, j
    chosen = {rest[int(i)] for i in order[:best_len]}
    return set(forced) | chosen, base_val + best
