"""Offline optimum of the fractional assignment LP.

``max v·x`` subject to ``x(Q_j) <= 1`` for every part and
``b·x(S) <= f(S)`` for every subset ``S``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import CapabilityError, InputError
from ..online.instance import SapInstance
from ..submodular.oracles import set_of
from ..submodular.sfm import sfm_min
from .simplex import maximize_leq

EXHAUSTIVE_MAX = 16
AUTO_EXHAUSTIVE = 14
SEPARATION_TOL = 1e-8


@dataclass
class LpSolution:
    x: np.ndarray
    objective: float
    backend: str
    active: list = field(default_factory=list)
    validity: float = 0.0
    rounds: int = 1

    def to_dict(self) -> dict:
        return {
            "opt": self.objective,
            "x": [float(v) for v in self.x],
            "backend": self.backend,
            "validity": self.validity,
            "active": [
                {"kind": kind, "set": sorted(int(e) for e in members), "multiplier": float(mult)}
                for kind, members, mult in self.active
            ],
        }


def _part_rows(inst: SapInstance):
    rows = np.zeros((inst.m, inst.n))
    for j, p in enumerate(inst.parts):
        rows[j, list(p)] = 1.0
    return rows


def _active(kinds, sets, duals, tol=1e-9):
    return [(k, s, d) for k, s, d in zip(kinds, sets, duals) if d > tol]


def _exhaustive(inst: SapInstance) -> LpSolution:
    n = inst.n
    if n > EXHAUSTIVE_MAX:
        raise CapabilityError(f"exhaustive LP limited to n <= {EXHAUSTIVE_MAX}")
    table = inst.oracle.table()
    masks = np.arange(1, 1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    A = np.vstack([_part_rows(inst), bits * inst.costs[None, :]])
    rhs = np.concatenate([np.ones(inst.m), table[masks]])
    x, val, duals = maximize_leq(inst.values, A, rhs)
    kinds = ["part"] * inst.m + ["subset"] * len(masks)
    sets = [frozenset(p) for p in inst.parts] + [set_of(int(mk)) for mk in masks]
    return LpSolution(x, val, "exhaustive", _active(kinds, sets, duals), 0.0, 1)


def _separate(inst: SapInstance, x: np.ndarray):
    """Most violated set per block (value < -tol), and the overall min slack."""
    f = inst.oracle
    load = inst.costs * x
    cuts = []
    total = 0.0
    for k, block in enumerate(f.blocks()):
        sub = f.block_oracle(k)
        local = load[list(block)] if sub is not f else load
        res = sfm_min(sub, local, which="min", tol=1e-12)
        members = frozenset(block[i] for i in res.minimizer) if sub is not f else res.minimizer
        scale = max(1.0, sub(range(sub.n)))
        if res.value < -SEPARATION_TOL * scale and members:
            cuts.append(members)
        total = min(total, res.value)
    return cuts, total


def _cutting_plane(inst: SapInstance, max_rounds: int = 500) -> LpSolution:
    f = inst.oracle
    sets: list[frozenset] = [frozenset([e]) for e in range(inst.n)]
    seen = set(sets)
    part_rows = _part_rows(inst)
    rounds = 0
    while True:
        rounds += 1
        sub_rows = np.zeros((len(sets), inst.n))
        for r, S in enumerate(sets):
            sub_rows[r, list(S)] = inst.costs[list(S)]
        A = np.vstack([part_rows, sub_rows])
        rhs = np.concatenate([np.ones(inst.m), [f(S) for S in sets]])
        x, val, duals = maximize_leq(inst.values, A, rhs)
        cuts, slack = _separate(inst, x)
        new = [S for S in cuts if S not in seen]
        if not new or rounds >= max_rounds:
            break
        for S in new:
            seen.add(S)
            sets.append(S)
    kinds = ["part"] * inst.m + ["subset"] * len(sets)
    all_sets = [frozenset(p) for p in inst.parts] + sets
    return LpSolution(x, val, "cutting-plane", _active(kinds, all_sets, duals), float(min(0.0, slack)), rounds)


def lp_opt_fractional(inst: SapInstance, backend: str = "auto") -> LpSolution:
    """Optimal value of the offline LP by full enumeration or constraint generation."""
    if backend == "auto":
        backend = "exhaustive" if inst.n <= AUTO_EXHAUSTIVE else "cutting-plane"
    if backend == "exhaustive":
        return _exhaustive(inst)
    if backend == "cutting-plane":
        return _cutting_plane(inst)
    raise InputError(f"unknown LP backend {backend!r}")
