"""Fractional water-filling for online submodular assignment.

Two dispatch rules share one discretised driver:

``frac``
    Buy the element with the largest utility ``v_e - p_e``; when it sits in
    a tight set, shift mass away from the lowest bang-per-buck element of
    its minimal tight set.
``mi``
    Unit values and costs; fill the element with the lowest water level.

Each micro-step moves at most ``step`` units and is capped exactly at the
next tightness event, so every intermediate allocation stays feasible.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InputError, InvariantError
from ..submodular.lovasz import _lovasz_single
from ..waterlevels.core import LevelCache, ThresholdedLevels, min_slack_containing
from .certificate import DualCertificate, certify, coverage
from .instance import Allocation, G, SapInstance, g

UTILITY_FLOOR = 1e-9
LEVEL_CAP = 1e-7
# candidates this close to the best count as tied; lowest id wins
TIE_TOL = 1e-12
TRACE_FIELDS = ("step", "part", "element", "delta", "primal", "dual", "min_kappa")


@dataclass
class SolveReport:
    mode: str
    primal: float
    dual: float
    lovasz_dual: float
    kappa: float
    certified_ratio: float
    step: float
    steps: int
    wall_time: float
    trace: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "primal": self.primal,
            "dual": self.dual,
            "lovasz_dual": self.lovasz_dual,
            "kappa": self.kappa,
            "certified_ratio": self.certified_ratio,
            "step": self.step,
            "steps": self.steps,
            "wall_time": self.wall_time,
        }
        out.update(self.extra)
        return out


def price(tl: ThresholdedLevels, costs, values, e: int | None = None):
    """Per-unit prices ``b_e * sum_k width_k * g(w^{r_k}_e)`` over classes with ``r_k <= v_e/b_e``."""
    costs = np.asarray(costs, dtype=float)
    values = np.asarray(values, dtype=float)
    ratio = values / costs
    widths = tl.widths
    active = tl.thresholds[:-1, None] <= ratio[None, :] * (1 + 1e-15)
    p = costs * (widths[:, None] * active * g(tl.levels[:-1])).sum(axis=0)
    return p if e is None else float(p[e])


class _Pricer:
    """Thresholded levels, prices and dual quantities for a fixed instance."""

    def __init__(self, inst: SapInstance):
        self.inst = inst
        self.f = inst.oracle
        self.cache = LevelCache(self.f)
        ratio = inst.ratios
        self.thresholds = np.concatenate([np.unique(ratio)[::-1], [0.0]])
        self.widths = self.thresholds[:-1] - self.thresholds[1:]
        self.filters = [ratio >= t for t in self.thresholds[:-1]]
        self.active = (self.thresholds[:-1, None] <= ratio[None, :]).astype(float) * self.widths[:, None]
        self.blocks = self.cache.blocks
        self._lov: dict = {}

    def levels(self, x: np.ndarray) -> np.ndarray:
        load = self.inst.costs * x
        return np.array([self.cache.levels(np.where(mask, load, 0.0)) for mask in self.filters])

    def prices(self, rows: np.ndarray) -> np.ndarray:
        return self.inst.costs * (self.active * g(rows)).sum(axis=0)

    def gamma(self, rows: np.ndarray) -> np.ndarray:
        return (self.widths[:, None] * G(rows)).sum(axis=0)

    def lovasz(self, vec: np.ndarray) -> float:
        total = 0.0
        for k, idx in enumerate(self.blocks):
            sub = np.ascontiguousarray(vec[idx])
            key = (k, sub.tobytes())
            val = self._lov.get(key)
            if val is None:
                val = _lovasz_single(self.f.block_oracle(k), sub)
                if len(self._lov) > 200_000:
                    self._lov.clear()
                self._lov[key] = val
            total += val
        return total

    def surrogate(self, rows: np.ndarray) -> float:
        return float(sum(w * self.lovasz(G(r)) for w, r in zip(self.widths, rows)))

    def min_slack(self, x: np.ndarray, e: int, exclude=()):
        return min_slack_containing(self.f, self.inst.costs * x, e, which="min", exclude=exclude)


def _check_step(step: float):
    if not step > 0:
        raise InputError("step must be positive")


def solve_fractional(inst: SapInstance, step: float = 1e-3, mode: str = "frac", trace: bool = False,
                     utility_floor: float = UTILITY_FLOOR):
    """Run the online water-filling solver; returns ``(Allocation, DualCertificate, SolveReport)``."""
    _check_step(step)
    if mode not in ("frac", "mi"):
        raise InputError(f"unknown mode {mode!r}")
    if mode == "mi" and not inst.uniform:
        raise InputError("matroid-intersection mode needs unit values and costs")
    start = time.perf_counter()
    n, b, v = inst.n, inst.costs, inst.values
    ratio = inst.ratios
    f = inst.oracle
    pr = _Pricer(inst)
    x = np.zeros(n)
    beta = np.zeros(inst.m)
    gamma = np.zeros(n)
    rows = pr.levels(x)
    rows_trace: list = []
    steps = 0
    primal = 0.0
    dual_prev = 0.0
    max_pd_gap = 0.0
    for j, part in enumerate(inst.parts):
        budget = 0.0
        saturated: set[int] = set()
        while budget < 1.0 - 1e-12:
            cand = [e for e in part if e not in saturated]
            if not cand:
                break
            plain = rows[-1]
            if mode == "mi":
                cand = [e for e in cand if plain[e] < 1.0 - 1e-9]
                if not cand:
                    break
                low = min(plain[a] for a in cand)
                e = min(a for a in cand if plain[a] <= low + TIE_TOL)
                util = 1.0 - float(g(plain[e]))
            else:
                p = pr.prices(rows)
                best = max(v[a] - p[a] for a in cand)
                e = min(a for a in cand if v[a] - p[a] >= best - TIE_TOL * max(1.0, abs(best)))
                util = float(v[e] - p[e])
                if util <= utility_floor:
                    break
            S, slack = pr.min_slack(x, e)
            tight_tol = 1e-9 * max(1.0, f(S))
            alt = None
            factor = 0.0
            if slack > tight_tol:
                d = min(step, 1.0 - budget, slack / b[e])
            else:
                if mode == "mi":
                    saturated.add(e)
                    continue
                alt = min(S, key=lambda a: (ratio[a], a))
                if alt == e or ratio[alt] >= ratio[e] or x[alt] <= 0:
                    saturated.add(e)
                    continue
                factor = b[e] / b[alt]
                net = 1.0 - factor if inst.part_of[alt] == j else 1.0
                d = min(step, x[alt] / factor)
                if net > 0:
                    d = min(d, (1.0 - budget) / net)
                _, slack2 = pr.min_slack(x, e, exclude=[alt])
                d = min(d, max(slack2, 0.0) / b[e])
                if d <= 1e-14:
                    saturated.add(e)
                    continue
            primal_before = primal
            x[e] += d
            budget += d
            if alt is not None:
                x[alt] = max(0.0, x[alt] - factor * d)
                if inst.part_of[alt] == j:
                    budget -= factor * d
            beta[j] += util * d
            rows = pr.levels(x)
            if mode == "mi":
                new_gamma = G(rows[-1])
            else:
                new_gamma = pr.gamma(rows)
            drop = gamma - new_gamma
            if drop.max(initial=0.0) > 1e-7:
                bad = int(np.argmax(drop))
                raise InvariantError(f"dual entry gamma[{bad}] decreased by {drop[bad]:.3g} at step {steps}")
            gamma = np.maximum(gamma, new_gamma)
            top = float(rows[-1].max(initial=0.0))
            if top > 1.0 + LEVEL_CAP:
                raise InvariantError(f"water level {top:.12g} exceeds 1 at step {steps}")
            steps += 1
            primal = float(v @ x)
            if trace:
                dual = (pr.surrogate(rows) if mode == "frac" else pr.lovasz(gamma)) + float(beta.sum())
                revealed = np.concatenate([np.asarray(q) for q in inst.parts[: j + 1]])
                cov = coverage(DualCertificate(gamma, beta), inst)[revealed]
                rows_trace.append({
                    "step": steps, "part": j, "element": e, "delta": d, "primal": primal,
                    "dual": dual, "min_kappa": float(cov.min()),
                    "alt": -1 if alt is None else int(alt),
                })
                max_pd_gap = max(max_pd_gap, abs((dual - dual_prev) - (primal - primal_before)))
                dual_prev = dual
    if mode == "mi":
        gamma_term = pr.lovasz(gamma)
    else:
        gamma_term = pr.surrogate(rows)
    cert = DualCertificate(gamma.copy(), beta.copy(), gamma_term)
    primal = float(v @ x)
    c = certify(cert, inst, primal)
    lov = cert.lovasz_objective(f)
    report = SolveReport(mode, primal, c.dual, lov, c.kappa, c.bound, step, steps,
                         time.perf_counter() - start, rows_trace,
                         {"max_level": float(rows[-1].max(initial=0.0)),
                          "max_step_gap": max_pd_gap if trace else None})
    return Allocation(x, inst.parts, inst.m), cert, report


def solve_matroid_intersection(inst: SapInstance, step: float = 1e-3, trace: bool = False):
    """Minimum-water-level dispatch for unit values and costs."""
    return solve_fractional(inst, step, mode="mi", trace=trace)
