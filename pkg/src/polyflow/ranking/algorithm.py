"""Randomised ranking for welfare maximisation with matroid-rank utilities.

Agent ``i`` draws ``r_i`` in ``[0, 1]`` and gets priority
``a_i * (1 - g(r_i))``.  Each arriving item goes to the highest-priority
agent whose rank it raises; ties go to the lower agent id.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..exceptions import InputError
from ..submodular.oracles import SubmodularOracle, from_spec


@dataclass
class OswmInstance:
    oracles: list
    weights: np.ndarray
    items: int

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.oracles) != len(self.weights):
            raise InputError("one weight per agent required")
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise InputError("agent weights must be finite and nonnegative")
        for i, o in enumerate(self.oracles):
            if o.n != self.items:
                raise InputError(f"agent {i} oracle has {o.n} items, expected {self.items}")

    @property
    def agents(self) -> int:
        return len(self.oracles)

    def to_dict(self) -> dict:
        return {
            "items": self.items,
            "agents": [{"oracle": o.to_spec(), "weight": float(a)} for o, a in zip(self.oracles, self.weights)],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> OswmInstance:
        try:
            agents = doc["agents"]
            items = int(doc["items"])
            oracles = [from_spec(a["oracle"]) for a in agents]
            weights = [float(a.get("weight", 1.0)) for a in agents]
        except KeyError as exc:
            raise InputError(f"OSWM instance misses field {exc}") from None
        return cls(oracles, weights, items)


def g(z: float) -> float:
    return math.exp(z - 1.0)


def priority_order(inst: OswmInstance, seeds) -> list[int]:
    pri = [inst.weights[i] * (1.0 - g(seeds[i])) for i in range(inst.agents)]
    return sorted(range(inst.agents), key=lambda i: (-pri[i], i))


def span(oracle: SubmodularOracle, U) -> frozenset:
    U = frozenset(U)
    r = oracle(U)
    return frozenset(j for j in range(oracle.n) if j in U or oracle(U | {j}) <= r)


@dataclass
class RankingRun:
    seeds: np.ndarray
    assignment: list
    bundles: list
    welfare: float
    beta: np.ndarray
    alpha: list
    history: list = field(default_factory=list)

    @property
    def dual_objective(self) -> float:
        return float(sum(val * rank for _, _, val, rank in self.alpha) + self.beta.sum())

    def to_dict(self) -> dict:
        return {
            "seeds": [float(s) for s in self.seeds],
            "assignment": list(self.assignment),
            "bundles": [sorted(u) for u in self.bundles],
            "welfare": self.welfare,
            "dual": self.dual_objective,
        }


def _check_seeds(inst: OswmInstance, seeds) -> np.ndarray:
    seeds = np.asarray(seeds, dtype=float)
    if seeds.shape != (inst.agents,):
        raise InputError(f"need one seed per agent ({inst.agents})")
    if np.any(seeds < 0) or np.any(seeds > 1):
        raise InputError("seeds must lie in [0, 1]")
    return seeds


def _finish(inst: OswmInstance, seeds, assignment, bundles, beta, history) -> RankingRun:
    alpha = []
    for i, U in enumerate(bundles):
        rank = inst.oracles[i](U)
        alpha.append((i, span(inst.oracles[i], U), inst.weights[i] * g(seeds[i]), rank))
    welfare = float(sum(inst.weights[i] * inst.oracles[i](U) for i, U in enumerate(bundles)))
    return RankingRun(seeds, assignment, [frozenset(U) for U in bundles], welfare, beta, alpha, history)


def ranking_run(inst: OswmInstance, seeds, record: bool = False) -> RankingRun:
    """One run of the online ranking rule with fixed seeds."""
    seeds = _check_seeds(inst, seeds)
    order = priority_order(inst, seeds)
    bundles: list[set] = [set() for _ in range(inst.agents)]
    ranks = [0.0] * inst.agents
    assignment = [-1] * inst.items
    beta = np.zeros(inst.items)
    history = []
    for j in range(inst.items):
        for i in order:
            new = inst.oracles[i](bundles[i] | {j})
            if new > ranks[i]:
                bundles[i].add(j)
                ranks[i] = new
                assignment[j] = i
                beta[j] = inst.weights[i] * (1.0 - g(seeds[i]))
                break
        if record:
            history.append(tuple(frozenset(U) for U in bundles))
    return _finish(inst, seeds, assignment, bundles, beta, history)


def perusal_run(inst: OswmInstance, seeds) -> RankingRun:
    """Same allocation computed agent by agent in decreasing priority."""
    seeds = _check_seeds(inst, seeds)
    claimed = [-1] * inst.items
    bundles: list[set] = [set() for _ in range(inst.agents)]
    beta = np.zeros(inst.items)
    for i in priority_order(inst, seeds):
        rank = 0.0
        for j in range(inst.items):
            if claimed[j] >= 0:
                continue
            new = inst.oracles[i](bundles[i] | {j})
            if new > rank:
                bundles[i].add(j)
                rank = new
                claimed[j] = i
                beta[j] = inst.weights[i] * (1.0 - g(seeds[i]))
    return _finish(inst, seeds, claimed, bundles, beta, [])


class MonteCarloResult(NamedTuple):
    mean: float
    stderr: float
    opt: float
    rows: list


def trial_seeds(master_seed: int, trials: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(master_seed).spawn(trials)


def seed_hash(ss: np.random.SeedSequence) -> str:
    key = f"{ss.entropy}:{','.join(map(str, ss.spawn_key))}"
    return hashlib.sha256(key.encode()).hexdigest()[:16]


def monte_carlo_ratio(inst: OswmInstance, trials: int, seed: int = 0, opt: float | None = None) -> MonteCarloResult:
    """Mean and standard error of welfare/OPT over independent seed draws."""
    if trials <= 0:
        raise InputError("trials must be positive")
    if opt is None:
        from ..offline.oswm import oswm_opt

        opt = oswm_opt(inst).welfare
    rows = []
    ratios = np.empty(trials)
    for t, ss in enumerate(trial_seeds(seed, trials)):
        rng = np.random.default_rng(ss)
        run = ranking_run(inst, rng.random(inst.agents))
        ratio = run.welfare / opt if opt > 0 else 1.0
        ratios[t] = ratio
        rows.append({"trial": t, "seed_hash": seed_hash(ss), "welfare": run.welfare, "opt": opt, "ratio": ratio})
    stderr = float(ratios.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return MonteCarloResult(float(ratios.mean()), stderr, float(opt), rows)


def critical_threshold(inst: OswmInstance, seeds, agent: int, item: int, resolution: float = 1e-6) -> float:
    """Largest seed of ``agent`` for which ``item`` ends in the span of its bundle (0 if none)."""
    seeds = _check_seeds(inst, seeds).copy()

    def spanned(r: float) -> bool:
        seeds[agent] = r
        run = ranking_run(inst, seeds)
        U = run.bundles[agent]
        o = inst.oracles[agent]
        return item in U or o(U | {item}) <= o(U)

    if spanned(1.0):
        return 1.0
    if not spanned(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if spanned(mid):
            lo = mid
        else:
            hi = mid
    return lo
