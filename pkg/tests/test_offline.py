import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from polyflow.cli.generators import random_oracle, random_oswm, random_parts, upper_triangular
from polyflow.exceptions import CapabilityError, InputError
from polyflow.offline import brute_force_feasibility, lp_opt_fractional, maximize_leq, oswm_opt, simplex
from polyflow.online import SapInstance
from polyflow.ranking import OswmInstance, ranking_run
from polyflow.submodular import UniformOracle
from polyflow.submodular.oracles import all_subsets


def test_simplex_standard_form():
    # min -x - y  s.t. x + y + s = 1
    res = simplex([-1, -1, 0], [[1, 1, 1]], [1])
    assert res.status == "optimal"
    assert res.objective == pytest.approx(-1.0)


def test_simplex_infeasible_and_unbounded():
    assert simplex([1, 1], [[1, 1]], [-1]).status == "infeasible"
    assert simplex([-1, 0], [[1, -1]], [0]).status == "unbounded"


@pytest.mark.parametrize("seed", range(10))
def test_maximize_leq_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 30)), int(rng.integers(1, 6))
    A = rng.random((m, n))
    b = rng.random(m) + 0.1
    c = rng.random(n)
    x, val, _ = maximize_leq(c, A, b)
    ref = linprog(-c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    assert val == pytest.approx(-ref.fun, abs=1e-9)
    assert np.all(A @ x <= b + 1e-9)


def test_lp_small_examples():
    assert lp_opt_fractional(upper_triangular(2)).objective == pytest.approx(2.0)
    inst = SapInstance(UniformOracle(2, 1), [1, 1], [1, 1], [[0], [1]])
    assert lp_opt_fractional(inst).objective == pytest.approx(1.0)


def test_unknown_backend():
    with pytest.raises(InputError):
        lp_opt_fractional(upper_triangular(2), backend="magic")


def _scipy_lp(inst):
    rows, rhs = [], []
    for S in all_subsets(range(inst.n)):
        if S:
            rows.append([inst.costs[e] if e in S else 0.0 for e in range(inst.n)])
            rhs.append(inst.oracle(S))
    for part in inst.parts:
        rows.append([1.0 if e in part else 0.0 for e in range(inst.n)])
        rhs.append(1.0)
    return -linprog(-inst.values, A_ub=rows, b_ub=rhs, bounds=(0, None), method="highs").fun


@pytest.mark.parametrize("seed", range(12))
def test_lp_backends_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    f = random_oracle(rng, n, integer=bool(seed % 2))
    inst = SapInstance(f, rng.uniform(0.5, 2, n), rng.uniform(0.5, 2, n), random_parts(rng, n))
    ex = lp_opt_fractional(inst, backend="exhaustive")
    cp = lp_opt_fractional(inst, backend="cutting-plane")
    ref = _scipy_lp(inst)
    assert ex.objective == pytest.approx(ref, abs=1e-7)
    assert cp.objective == pytest.approx(ref, abs=1e-6)
    assert brute_force_feasibility(f, inst.costs * ex.x, tol=1e-7).feasible


def test_feasibility_examples():
    f = UniformOracle(2, 1)
    assert brute_force_feasibility(f, [0.0, 0.0]).feasible
    res = brute_force_feasibility(f, [0.6, 0.6])
    assert not res.feasible
    assert res.witness == frozenset({0, 1})
    assert res.violation == pytest.approx(0.2)


def _brute_oswm(inst):
    best = 0.0
    for choice in itertools.product(range(-1, inst.agents), repeat=inst.items):
        total = 0.0
        for i in range(inst.agents):
            total += inst.weights[i] * inst.oracles[i]([j for j, c in enumerate(choice) if c == i])
        best = max(best, total)
    return best


@pytest.mark.parametrize("seed", range(10))
def test_oswm_opt_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    inst = random_oswm(rng, int(rng.integers(1, 4)), int(rng.integers(1, 6)), weighted=bool(seed % 2))
    opt = oswm_opt(inst)
    assert opt.welfare == pytest.approx(_brute_oswm(inst))
    # the returned assignment realises the value
    got = sum(inst.weights[i] * inst.oracles[i]([j for j, c in enumerate(opt.assignment) if c == i])
              for i in range(inst.agents))
    assert got == pytest.approx(opt.welfare)


def test_oswm_opt_relabel_invariant(rng):
    inst = random_oswm(rng, 3, 5, weighted=True)
    perm = rng.permutation(3)
    relabeled = OswmInstance([inst.oracles[i] for i in perm], inst.weights[perm], inst.items)
    assert oswm_opt(relabeled).welfare == pytest.approx(oswm_opt(inst).welfare)


def test_oswm_opt_examples():
    one = OswmInstance([UniformOracle(3, 2)], [2.0], 3)
    assert oswm_opt(one).welfare == 4.0
    two = OswmInstance([UniformOracle(2, 1), UniformOracle(2, 1)], [1.0, 3.0], 2)
    assert oswm_opt(two).welfare == 4.0


def test_oswm_opt_bounds_ranking(rng):
    inst = random_oswm(rng, 3, 6, weighted=True)
    best = oswm_opt(inst).welfare
    assert all(ranking_run(inst, rng.random(3)).welfare <= best + 1e-12 for _ in range(100))


def test_oswm_opt_capability_limit():
    inst = OswmInstance([UniformOracle(12, 1)] * 8, np.ones(8), 12)
    with pytest.raises(CapabilityError):
        oswm_opt(inst)
