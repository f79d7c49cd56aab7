"""Randomized audit of the library's guarantees.

Each ``check_*`` function builds its own seeded instances, runs the
relevant routines and returns a :class:`CriterionResult`.  The ``verify``
subcommand and the acceptance tests both call into this module.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cli.generators import (
    adwords_laminar,
    matroid_coloring,
    random_laminar_spec,
    random_oracle,
    random_oswm,
    random_parts,
    upper_triangular,
)
from .offline import brute_force_feasibility, lp_opt_fractional, oswm_opt
from .online import SapInstance, check_small_bids, solve_fractional, solve_small_bids
from .online.instance import G, g
from .ranking import monte_carlo_ratio, perusal_run, ranking_run
from .submodular import LaminarOracle, eval_lovasz, laminar_budget_enumerate, laminar_budget_eval, verify_submodular
from .submodular.oracles import all_subsets
from .waterlevels import verify_sua_kkt, water_level_brute, water_levels_alg1, water_levels_alg2

E_RATIO = 1.0 - math.exp(-1.0)


@dataclass
class CriterionResult:
    name: str
    passed: bool
    summary: str
    seconds: float = 0.0
    details: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        return f"{self.name} {'PASS' if self.passed else 'FAIL'}: {self.summary} [{self.seconds:.1f}s]"


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - start
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _random_load(rng, n: int) -> np.ndarray:
    x = rng.random(n) * float(rng.choice([0.3, 1.0, 3.0]))
    x[rng.random(n) < 0.2] = 0.0
    return x


@_timed
def check_a1(sizes=(5, 10, 20), step: float = 1e-3, time_limit: float = 60.0) -> CriterionResult:
    """Fractional solver on the upper-triangular family."""
    rows, ok = [], True
    for n in sizes:
        inst = upper_triangular(n)
        t0 = time.perf_counter()
        _, _, rep = solve_fractional(inst, step=step)
        elapsed = time.perf_counter() - t0
        opt = lp_opt_fractional(inst).objective
        ratio = rep.primal / opt
        good = 0.6221 <= ratio <= 1.0 + 1e-12 and elapsed < time_limit
        if n == 20:
            good = good and ratio <= 0.69
        ok &= good
        rows.append({"n": n, "ratio": ratio, "kappa": rep.kappa, "seconds": elapsed})
    summary = ", ".join(f"n={r['n']} ratio={r['ratio']:.4f}" for r in rows)
    return CriterionResult("A1", ok, summary, details={"rows": rows})


def a2_instances(count: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, 11))
        f = random_oracle(rng, n, integer=bool(rng.random() < 0.7))
        yield f, _random_load(rng, n)


@_timed
def check_a2(instances: int = 200, seed: int = 2, tol: float = 1e-7) -> CriterionResult:
    """Three routes to the water levels agree; max-min equals min-max."""
    worst_route, worst_saddle, failures = 0.0, 0.0, []
    decs = []
    for k, (f, x) in enumerate(a2_instances(instances, seed)):
        d1 = water_levels_alg1(f, x)
        d2 = water_levels_alg2(f, x)
        brute = [water_level_brute(f, x, e) for e in range(f.n)]
        wb = np.array([b.maxmin for b in brute])
        gap = max(np.max(np.abs(d1.w - d2.w)), np.max(np.abs(d1.w - wb)))
        saddle = max(abs(b.maxmin - b.minmax) for b in brute)
        worst_route = max(worst_route, float(gap))
        worst_saddle = max(worst_saddle, float(saddle))
        if gap > tol or saddle > tol:
            failures.append(k)
        decs.append((f, x, d1, d2))
    ok = not failures
    summary = f"{instances} instances, max route gap {worst_route:.2e}, max saddle gap {worst_saddle:.2e}"
    return CriterionResult("A2", ok, summary, details={"failures": failures, "decompositions": decs})


@_timed
def check_a3(instances: int = 200, seed: int = 3, increases: int = 50) -> CriterionResult:
    """Duality, monotonicity, feasibility indication, locality and the chain rule."""
    rng = np.random.default_rng(seed)
    counts = dict.fromkeys(("duality", "monotone", "feasibility", "locality", "chain_rule"), 0)
    checked = dict(counts)
    worst = {"duality": 0.0, "chain_rule": 0.0, "locality": 0.0}
    delta_loc, delta_fd = 1e-4, 1e-6
    for _ in range(instances):
        n = int(rng.integers(1, 11))
        f = random_oracle(rng, n, integer=True)
        x = _random_load(rng, n)
        w = water_levels_alg1(f, x).w

        gap = abs(eval_lovasz(f, w) - x.sum())
        worst["duality"] = max(worst["duality"], gap)
        checked["duality"] += 1
        counts["duality"] += gap > 1e-8

        y, wy = x.copy(), w
        for _ in range(increases):
            e = int(rng.integers(n))
            y[e] += float(rng.random()) * 0.5
            wn = water_levels_alg1(f, y).w
            checked["monotone"] += 1
            counts["monotone"] += bool(np.any(wn < wy - 1e-9))
            wy = wn

        top = float(w.max(initial=0.0))
        for s in (0.99, 1.01, float(rng.random() * 2)):
            if top <= 0:
                break
            xs = x * (s / top)
            ws = water_levels_alg1(f, xs).w
            indicated = ws.max(initial=0.0) <= 1.0 + 1e-9
            checked["feasibility"] += 1
            counts["feasibility"] += indicated != brute_force_feasibility(f, xs).feasible

        for _ in range(3):
            e1, e2 = (int(v) for v in rng.integers(n, size=2))
            if e1 == e2 or abs(w[e1] - w[e2]) <= 10 * delta_loc:
                continue
            xp = x.copy()
            xp[e2] += delta_loc
            change = abs(water_levels_alg1(f, xp).w[e1] - w[e1])
            worst["locality"] = max(worst["locality"], change)
            checked["locality"] += 1
            counts["locality"] += change > 1e-9

        for e in range(n):
            others = np.delete(w, e)
            if x[e] <= 0 or (others.size and np.min(np.abs(others - w[e])) < 1e-3):
                continue
            xp = x.copy()
            xp[e] += delta_fd
            base = eval_lovasz(f, G(w))
            fd = (eval_lovasz(f, G(water_levels_alg1(f, xp).w)) - base) / delta_fd
            err = abs(fd - float(g(w[e])))
            worst["chain_rule"] = max(worst["chain_rule"], err)
            checked["chain_rule"] += 1
            counts["chain_rule"] += err > 1e-4
            break
    ok = all(v == 0 for v in counts.values())
    summary = ", ".join(f"{k} {checked[k] - counts[k]}/{checked[k]}" for k in counts)
    return CriterionResult("A3", ok, summary, details={"violations": counts, "checked": checked, "worst": worst})


@_timed
def check_a4(a2: CriterionResult | None = None, instances: int = 200, seed: int = 2) -> CriterionResult:
    """Optimality conditions hold for every decomposition produced in A2."""
    if a2 is None:
        a2 = check_a2(instances, seed)
    total, failures = 0, []
    for k, (f, x, d1, d2) in enumerate(a2.details["decompositions"]):
        for d in (d1, d2):
            total += 1
            rep = verify_sua_kkt(f, x, d)
            if not rep.passed:
                failures.append((k, d.method, rep.checks))
    return CriterionResult("A4", not failures, f"{total - len(failures)}/{total} decompositions pass",
                           details={"failures": failures})


def a5_instances(count: int, seed: int):
    rng = np.random.default_rng(seed)
    for k in range(count):
        agents = 1 if k % 5 == 0 else int(rng.integers(2, 7))
        items = int(rng.integers(1, 9))
        yield random_oswm(rng, agents, items, weighted=bool(k % 2))


@_timed
def check_a5(instances: int = 20, trials: int = 2000, seed: int = 5, time_limit: float = 300.0) -> CriterionResult:
    """Monte Carlo ratio of matroidal ranking against the exhaustive optimum."""
    rows, ok = [], True
    start = time.perf_counter()
    for k, inst in enumerate(a5_instances(instances, seed)):
        opt = oswm_opt(inst).welfare
        mc = monte_carlo_ratio(inst, trials, seed=seed * 1000 + k, opt=opt)
        need = max(0.62, E_RATIO - 3 * mc.stderr)
        good = mc.mean >= need
        if inst.agents == 1:
            good = good and all(r["ratio"] == 1.0 for r in mc.rows)
        ok &= good
        rows.append({"instance": k, "agents": inst.agents, "items": inst.items, "mean": mc.mean,
                     "stderr": mc.stderr, "opt": opt, "passed": good})
    elapsed = time.perf_counter() - start
    ok &= elapsed < time_limit
    low = min(rows, key=lambda r: r["mean"]) if rows else None
    summary = f"{instances} instances x {trials} trials, lowest mean {low['mean']:.4f}" if low else "no instances"
    return CriterionResult("A5", ok, summary, details={"rows": rows})


@_timed
def check_a6(pairs: int = 500, seed: int = 6) -> CriterionResult:
    """Ranking and perusal orders give the same assignment."""
    rng = np.random.default_rng(seed)
    same = 0
    for _ in range(pairs):
        inst = random_oswm(rng, int(rng.integers(1, 6)), int(rng.integers(1, 9)), weighted=bool(rng.random() < 0.5))
        seeds = rng.random(inst.agents)
        same += ranking_run(inst, seeds).assignment == perusal_run(inst, seeds).assignment
    return CriterionResult("A6", same == pairs, f"{same}/{pairs} identical")


def a7_instances(count: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield adwords_laminar(int(rng.integers(3, 8)), depth=int(rng.integers(1, 3)),
                              bidders=int(rng.integers(2, 5)), seed=int(rng.integers(2**31)), budget_unit=20.0)


@_timed
def check_a7(instances: int = 20, seed: int = 7, eps: float = 0.05) -> CriterionResult:
    """Integral small-bids solver: feasibility, ratio and certificate."""
    rows, ok = [], True
    for k, inst in enumerate(a7_instances(instances, seed)):
        chk = check_small_bids(inst, eps)
        alloc, _, rep = solve_small_bids(inst, eps)
        feasible = brute_force_feasibility(inst.oracle, inst.costs * alloc.x).feasible
        opt = lp_opt_fractional(inst).objective
        ratio = rep.primal / opt
        good = (chk.holds and feasible and ratio >= (1 - 2 * eps) * E_RATIO
                and rep.kappa >= E_RATIO - 2 * eps)
        ok &= good
        rows.append({"instance": k, "n": inst.n, "eps": chk.worst_ratio, "ratio": ratio,
                     "kappa": rep.kappa, "feasible": feasible, "passed": good})
    low = min(r["ratio"] for r in rows) if rows else float("nan")
    kap = min(r["kappa"] for r in rows) if rows else float("nan")
    return CriterionResult("A7", ok, f"{instances} instances, min ratio {low:.4f}, min kappa {kap:.4f}",
                           details={"rows": rows})


@_timed
def check_a8(increases: int = 100, seed: int = 8) -> CriterionResult:
    """Water levels move by at most ``eps * t`` when one allocation grows by ``t``."""
    rng = np.random.default_rng(seed)
    insts = list(a7_instances(5, seed))
    bad, worst = 0, 0.0
    for k in range(increases):
        inst = insts[k % len(insts)]
        eps = check_small_bids(inst, 0.05).worst_ratio
        x = rng.random(inst.n) * float(rng.choice([0.5, 3.0, 12.0]))
        e = int(rng.integers(inst.n))
        t = float(rng.random())
        y = x.copy()
        y[e] += t
        dw = np.max(np.abs(water_levels_alg1(inst.oracle, inst.costs * y).w
                           - water_levels_alg1(inst.oracle, inst.costs * x).w))
        worst = max(worst, dw - eps * t)
        bad += dw > eps * t + 1e-9
    return CriterionResult("A8", bad == 0, f"{increases - bad}/{increases} within bound, worst excess {worst:.2e}")


@_timed
def check_a9(families: int = 100, seed: int = 9) -> CriterionResult:
    """Tree evaluation of laminar budgets matches subfamily enumeration; result is submodular."""
    rng = np.random.default_rng(seed)
    mismatch, nonsub = 0, 0
    for _ in range(families):
        n = int(rng.integers(1, 9))
        spec = random_laminar_spec(rng, n, max_sets=10, integer=bool(rng.random() < 0.5))
        for S in all_subsets(range(n)):
            if abs(laminar_budget_eval(spec, S) - laminar_budget_enumerate(spec, S)) > 1e-12:
                mismatch += 1
                break
        nonsub += not verify_submodular(LaminarOracle(spec), "exhaustive").passed
    ok = mismatch == 0 and nonsub == 0
    return CriterionResult("A9", ok, f"{families} families, {mismatch} value mismatches, {nonsub} submodularity failures")


def a10_instances(count: int, seed: int):
    rng = np.random.default_rng(seed)
    yield upper_triangular(3)
    yield upper_triangular(6)
    yield matroid_coloring(3, [(0, 1), (1, 2), (0, 2)], 2)
    for _ in range(max(0, count - 3)):
        n = int(rng.integers(2, 9))
        f = random_oracle(rng, n, integer=True)
        yield SapInstance(f, np.ones(n), np.ones(n), random_parts(rng, n))


@_timed
def check_a10(instances: int = 8, seed: int = 10, step: float = 1e-3) -> CriterionResult:
    """Primal and dual objectives track each other on unit-value instances."""
    worst, ok = 0.0, True
    for inst in a10_instances(instances, seed):
        _, _, rep = solve_fractional(inst, step=step)
        gap = abs(rep.primal - rep.dual)
        rel = gap / rep.primal if rep.primal > 0 else gap
        worst = max(worst, rel)
        ok &= gap <= 0.05 * rep.primal + 1e-12
    return CriterionResult("A10", ok, f"{instances} instances, worst |P-D|/P {worst:.2e}")


FULL = {
    "A1": lambda: check_a1(),
    "A2": lambda: check_a2(),
    "A3": lambda: check_a3(),
    "A5": lambda: check_a5(),
    "A6": lambda: check_a6(),
    "A7": lambda: check_a7(),
    "A8": lambda: check_a8(),
    "A9": lambda: check_a9(),
    "A10": lambda: check_a10(),
}

QUICK = {
    "A1": lambda: check_a1(sizes=(5, 10)),
    "A2": lambda: check_a2(instances=30),
    "A3": lambda: check_a3(instances=20, increases=10),
    "A5": lambda: check_a5(instances=5, trials=300),
    "A6": lambda: check_a6(pairs=100),
    "A7": lambda: check_a7(instances=5),
    "A8": lambda: check_a8(increases=30),
    "A9": lambda: check_a9(families=20),
    "A10": lambda: check_a10(instances=4),
}


def run_audit(profile: str = "quick", only=None, progress=None) -> list[CriterionResult]:
    """Run the criteria of a profile in order; A4 reuses A2's decompositions."""
    table = FULL if profile == "full" else QUICK
    names = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10"]
    if only:
        wanted = set(only)
        if "A4" in wanted:
            wanted.add("A2")
        names = [n for n in names if n in wanted]
    results, a2 = [], None
    for name in names:
        if name == "A4":
            res = check_a4(a2)
        else:
            res = table[name]()
            if name == "A2":
                a2 = res
        if name != "A2" or only is None or "A2" in only:
            results.append(res)
            if progress:
                progress(res)
    return results
