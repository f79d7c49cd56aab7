"""Dense two-phase tableau simplex with Bland's rule.

Solves ``min c^T z`` subject to ``A z = b`` and ``z >= 0``.  Bland's rule
(lowest eligible index for both the entering and the leaving variable)
rules out cycling, and makes the returned vertex a deterministic function of
the input.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..exceptions import InvariantError

PIVOT_TOL = 1e-11
COST_TOL = 1e-10


class SimplexResult(NamedTuple):
    z: np.ndarray
    objective: float
    y: np.ndarray
    basis: list
    status: str
    pivots: int


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T: np.ndarray, basis: list, allowed: int, max_pivots: int) -> tuple[str, int]:
    """Optimise the tableau whose last row holds reduced costs (objective in the last column)."""
    pivots = 0
    while True:
        cost = T[-1, :allowed]
        neg = np.nonzero(cost < -COST_TOL)[0]
        if neg.size == 0:
            return "optimal", pivots
        c = int(neg[0])
        col = T[:-1, c]
        pos = np.nonzero(col > PIVOT_TOL)[0]
        if pos.size == 0:
            return "unbounded", pivots
        ratios = T[pos, -1] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, r, c)
        basis[r] = c
        pivots += 1
        if pivots > max_pivots:
            raise InvariantError("simplex exceeded its pivot budget")


def simplex(c, A, b, basis: list | None = None, max_pivots: int = 200_000) -> SimplexResult:
    """Minimise ``c^T z`` over ``A z = b, z >= 0``.

    If ``basis`` lists columns forming an identity with ``b >= 0`` the first
    phase is skipped.  ``y`` holds the multipliers of the equality rows.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    m, n = A.shape
    if basis is None:
        A = A.copy()
        flip = b < 0
        A[flip] *= -1
        b[flip] *= -1
        T = np.zeros((m + 1, n + m + 1))
        T[:m, :n] = A
        T[:m, n:n + m] = np.eye(m)
        T[:m, -1] = b
        T[-1, :n] = -A.sum(axis=0)
        T[-1, -1] = -b.sum()
        basis = list(range(n, n + m))
        status, p1 = _run(T, basis, n, max_pivots)
        if -T[-1, -1] > 1e-8 * max(1.0, float(np.abs(b).max(initial=0.0))):
            return SimplexResult(np.zeros(n), np.inf, np.zeros(m), basis, "infeasible", p1)
        # Drive leftover artificials out of the basis, dropping redundant rows.
        keep = []
        for r in range(m):
            if basis[r] >= n:
                cand = np.nonzero(np.abs(T[r, :n]) > PIVOT_TOL)[0]
                if cand.size:
                    _pivot(T, r, int(cand[0]))
                    basis[r] = int(cand[0])
                    keep.append(r)
            else:
                keep.append(r)
        rows = keep + [m]
        T = T[rows]
        basis = [basis[r] for r in keep]
        T = np.delete(T, np.s_[n:n + m], axis=1)
        A_used = A[keep]
        sign = np.where(flip[keep], -1.0, 1.0)
    else:
        p1 = 0
        T = np.zeros((m + 1, n + 1))
        T[:m, :n] = A
        T[:m, -1] = b
        basis = list(basis)
        A_used = A
        sign = np.ones(m)
        keep = list(range(m))
    T[-1, :] = 0.0
    T[-1, :n] = c
    for r, j in enumerate(basis):
        T[-1] -= c[j] * T[r]
    status, p2 = _run(T, basis, n, max_pivots)
    z = np.zeros(n)
    for r, j in enumerate(basis):
        z[j] = T[r, -1]
    obj = float(c @ z)
    B = A_used[:, basis]
    y_used = np.linalg.lstsq(B.T, c[basis], rcond=None)[0] if basis else np.zeros(0)
    y = np.zeros(m)
    y[keep] = y_used * sign
    return SimplexResult(z, obj, y, basis, status, p1 + p2)


def maximize_leq(c, A, b, max_pivots: int = 200_000):
    """``max c^T x`` over ``A x <= b, x >= 0`` with ``b >= 0``; returns ``(x, value, row duals)``.

    Tall systems are solved through their dual, which has one row per
    variable; the primal point is then read off the dual's multipliers.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise ValueError("right-hand sides must be nonnegative")
    if m > 4 * n:
        # min b^T y  s.t.  A^T y - s = c,  y, s >= 0
        M = np.hstack([A.T, -np.eye(n)])
        cost = np.concatenate([b, np.zeros(n)])
        res = simplex(cost, M, c, max_pivots=max_pivots)
        if res.status != "optimal":
            raise InvariantError(f"dual LP ended with status {res.status}")
        x = np.maximum(res.y, 0.0)
        duals = res.z[:m]
        return x, float(c @ x), duals
    M = np.hstack([A, np.eye(m)])
    cost = np.concatenate([-c, np.zeros(m)])
    res = simplex(cost, M, b, basis=list(range(n, n + m)), max_pivots=max_pivots)
    if res.status != "optimal":
        raise InvariantError(f"LP ended with status {res.status}")
    x = res.z[:n]
    return x, float(c @ x), np.maximum(-res.y, 0.0)
