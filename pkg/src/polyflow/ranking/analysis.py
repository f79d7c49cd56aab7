"""Checks of the structural invariants behind the ranking analysis."""
from __future__ import annotations

import math

import numpy as np

from .algorithm import OswmInstance, critical_threshold, g, priority_order, ranking_run, span


def span_history(inst: OswmInstance, seeds) -> list[list[frozenset]]:
    """Spans of every agent's bundle after each item."""
    run = ranking_run(inst, seeds, record=True)
    return [[span(inst.oracles[i], U) for i, U in enumerate(step)] for step in run.history]


def check_span_invariants(inst: OswmInstance, seeds, agent: int, r_a: float, r_b: float) -> dict:
    """Compare two runs that differ only in ``agent``'s seed (``r_a < r_b``).

    Returns a flag per invariant: the agent's span shrinks as its seed grows;
    agents ahead of it in run A's priority order (seed at most ``r_a`` when
    weights are equal) are unaffected; with ``r_b = 1`` every other agent's
    span only grows.
    """
    seeds = np.asarray(seeds, dtype=float)
    sa, sb = seeds.copy(), seeds.copy()
    sa[agent], sb[agent] = r_a, r_b
    ha, hb = span_history(inst, sa), span_history(inst, sb)
    order_a = priority_order(inst, sa)
    low = order_a[: order_a.index(agent)]
    point1 = all(a[agent] >= b[agent] for a, b in zip(ha, hb))
    point2 = all(a[i] == b[i] for a, b in zip(ha, hb) for i in low)
    point3 = True
    if r_b == 1.0:
        point3 = all(a[i] <= b[i] for a, b in zip(ha, hb) for i in range(inst.agents) if i != agent)
    return {"span_shrinks": point1, "low_agents_fixed": point2, "others_grow": point3}


def check_threshold_corollaries(inst: OswmInstance, seeds, agent: int, item: int, probes: int = 20,
                                rng: np.random.Generator | None = None) -> dict:
    """Below the critical threshold the item is spanned; above it the item goes to a low-seed agent."""
    rng = rng or np.random.default_rng(0)
    seeds = np.asarray(seeds, dtype=float).copy()
    r_star = critical_threshold(inst, seeds, agent, item)
    below_ok, above_ok = True, True
    for _ in range(probes):
        r = float(rng.random())
        seeds[agent] = r
        run = ranking_run(inst, seeds)
        U = run.bundles[agent]
        o = inst.oracles[agent]
        if r < r_star - 1e-6 and not (item in U or o(U | {item}) <= o(U)):
            below_ok = False
        if r_star < 1.0:
            owner = run.assignment[item]
            floor = inst.weights[agent] * (1.0 - g(min(1.0, r_star + 1e-6)))
            if owner < 0 or inst.weights[owner] * (1.0 - g(seeds[owner])) < floor - 1e-12:
                above_ok = False
    return {"r_star": r_star, "spanned_below": below_ok, "assigned_low": above_ok}


def dual_coverage(inst: OswmInstance, seeds, agent: int, item: int, samples: int = 400,
                  rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Monte Carlo mean and standard error of the dual coverage of ``(agent, item)`` over the agent's seed."""
    rng = rng or np.random.default_rng(0)
    seeds = np.asarray(seeds, dtype=float).copy()
    vals = np.empty(samples)
    for s in range(samples):
        r = float(rng.random())
        seeds[agent] = r
        run = ranking_run(inst, seeds)
        U = run.bundles[agent]
        o = inst.oracles[agent]
        covered = item in U or o(U | {item}) <= o(U)
        vals[s] = (inst.weights[agent] * g(r) if covered else 0.0) + run.beta[item]
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


def independent(inst: OswmInstance, run) -> bool:
    return all(inst.oracles[i](U) == len(U) for i, U in enumerate(run.bundles))
