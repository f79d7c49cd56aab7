import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyflow.exceptions import CapabilityError, InputError
from polyflow.submodular import (
    CoverageOracle,
    DirectSumOracle,
    GraphicOracle,
    LaminarBudgetSpec,
    LaminarOracle,
    PartitionOracle,
    ScaledOracle,
    TableOracle,
    TransversalOracle,
    UniformOracle,
    eval_lovasz,
    from_spec,
    laminar_budget_enumerate,
    laminar_budget_eval,
    min_norm_point,
    sfm_min,
    verify_submodular,
)
from polyflow.submodular.oracles import all_subsets

from strategies import laminar_oracles, oracles


def subsets(n):
    return [frozenset(c) for k in range(n + 1) for c in itertools.combinations(range(n), k)]


# -- oracle families against direct definitions --------------------------------------


def _forest_rank(edges, S):
    best = 0
    for k in range(len(S) + 1):
        for F in itertools.combinations(S, k):
            parent = {}

            def find(v):
                while parent.get(v, v) != v:
                    v = parent[v]
                return v

            ok = True
            for e in F:
                a, b = find(edges[e][0]), find(edges[e][1])
                if a == b:
                    ok = False
                    break
                parent[a] = b
            if ok:
                best = max(best, k)
    return best


def _matching_rank(neighbors, S):
    S = list(S)
    for k in range(len(S), 0, -1):
        for chosen in itertools.combinations(S, k):
            for pick in itertools.product(*(neighbors[e] for e in chosen)):
                if len(set(pick)) == k:
                    return k
    return 0


def test_graphic_rank_matches_forest_enumeration():
    edges = [(0, 1), (1, 2), (0, 2), (2, 3), (3, 3 - 3)]
    f = GraphicOracle(4, edges)
    for S in subsets(len(edges)):
        assert f(S) == _forest_rank(edges, sorted(S))


def test_graphic_self_loop_has_rank_zero():
    f = GraphicOracle(2, [(0, 0), (0, 1)])
    assert f([0]) == 0 and f([0, 1]) == 1


def test_transversal_rank_matches_matching_enumeration(rng):
    nb = [[0, 1], [1], [1, 2], [2], [0]]
    f = TransversalOracle(nb)
    for S in subsets(len(nb)):
        assert f(S) == _matching_rank(nb, S)


def test_partition_and_uniform_values():
    f = PartitionOracle([[0, 1], [2]], [1, 1])
    assert [f(S) for S in ([], [0], [0, 1], [0, 2], [0, 1, 2])] == [0, 1, 1, 2, 2]
    u = UniformOracle(4, 2)
    assert [u(range(k)) for k in range(5)] == [0, 1, 2, 2, 2]
    assert np.array_equal(u.cardinality_profile(), [0, 1, 2, 2, 2])


def test_fractional_partition_capacity_kept():
    f = PartitionOracle([[0, 1, 2]], [1.5])
    assert f([0, 1]) == 1.5


def test_coverage_values():
    f = CoverageOracle([[0, 1], [1, 2], [3]], [1.0, 2.0, 3.0, 4.0])
    assert f([0]) == 3.0
    assert f([0, 1]) == 6.0
    assert f([0, 1, 2]) == 10.0


def test_table_oracle_exact_rationals():
    t = TableOracle(2, {"": 0, "0": Fraction(1, 3), "1": Fraction(1, 3), "0,1": Fraction(1, 2)}, exact=True)
    assert t([0, 1]) == Fraction(1, 2)


def test_table_oracle_rejects_nonzero_empty():
    with pytest.raises(InputError):
        TableOracle(1, {"": 1, "0": 1})


def test_direct_sum_blocks_and_offsets():
    a, b = UniformOracle(2, 1), GraphicOracle(3, [(0, 1), (1, 2), (0, 2)])
    f = DirectSumOracle([a, b])
    assert f.n == 5
    assert f([0, 1, 2, 3, 4]) == 1 + 2
    assert [tuple(bl) for bl in f.blocks()] == [(0, 1), (2, 3, 4)]


def test_graphic_blocks_are_components():
    f = GraphicOracle(5, [(0, 1), (3, 4), (1, 2)])
    assert sorted(tuple(b) for b in f.blocks()) == [(0, 2), (1,)]


def test_contraction_and_restriction_views():
    f = UniformOracle(3, 2)
    c = f.contract([0])
    assert c([1]) == 1 and c([1, 2]) == 1
    r = f.restrict([1, 2])
    assert r.n == 2 and r([0, 1]) == 2


@pytest.mark.parametrize("spec", [
    {"kind": "partition", "parts": [[0, 1], [2]], "capacities": [1, 1]},
    {"kind": "graphic", "vertices": 4, "edges": [[0, 1], [1, 2], [2, 3]]},
    {"kind": "laminar", "sets": [{"members": [0], "budget": 1.0}, {"members": [0, 1], "budget": 1.5}]},
    {"kind": "table", "n": 2, "values": {"0": 1.0, "1": 1.0, "0,1": 1.5}},
    {"kind": "uniform", "n": 3, "rank": 2},
    {"kind": "coverage", "covers": [[0], [0, 1]], "weights": [1.0, 2.0]},
    {"kind": "transversal", "neighbors": [[0], [0, 1]]},
])
def test_spec_round_trip(spec):
    f = from_spec(spec)
    g = from_spec(f.to_spec())
    assert all(f(S) == g(S) for S in subsets(f.n))


def test_wrapper_specs_round_trip():
    base = {"kind": "uniform", "n": 3, "rank": 2}
    for spec in ({"kind": "scale", "factor": 2.0, "base": base},
                 {"kind": "direct-sum", "parts": [base, base]},
                 {"kind": "contract", "contracted": [0], "base": base}):
        f = from_spec(spec)
        g = from_spec(f.to_spec())
        assert all(f(S) == g(S) for S in subsets(f.n))


def test_unknown_spec_kind():
    with pytest.raises(InputError):
        from_spec({"kind": "gammoid"})


def test_table_limit():
    with pytest.raises(CapabilityError):
        UniformOracle(21, 3).table()


# -- Lovász extension ---------------------------------------------------------------


def test_lovasz_examples():
    assert eval_lovasz(UniformOracle(2, 1), [0.5, 0.9]) == pytest.approx(0.9)
    assert eval_lovasz(UniformOracle(2, 2), [0.3, 0.7]) == pytest.approx(1.0)
    assert eval_lovasz(PartitionOracle([[0, 1], [2]], [1, 1]), [0.5, 0.5, 0.9]) == pytest.approx(1.4)


def test_lovasz_rejects_negative():
    with pytest.raises(InputError):
        eval_lovasz(UniformOracle(2, 1), [-0.1, 0.2])


def _lovasz_by_sorting(f, w):
    order = sorted(range(f.n), key=lambda e: -w[e])
    total, prev = 0.0, frozenset()
    for e in order:
        cur = prev | {e}
        total += w[e] * (f(cur) - f(prev))
        prev = cur
    return total


@given(oracles(), st.data())
def test_lovasz_matches_greedy_formula(f, data):
    w = np.array(data.draw(st.lists(st.floats(0, 5), min_size=f.n, max_size=f.n)))
    assert eval_lovasz(f, w) == pytest.approx(_lovasz_by_sorting(f, w), abs=1e-9)


@given(oracles(), st.data())
def test_lovasz_homogeneous_and_convex(f, data):
    u = np.array(data.draw(st.lists(st.floats(0, 5), min_size=f.n, max_size=f.n)))
    v = np.array(data.draw(st.lists(st.floats(0, 5), min_size=f.n, max_size=f.n)))
    lam = data.draw(st.floats(0, 10))
    assert eval_lovasz(f, lam * u) == pytest.approx(lam * eval_lovasz(f, u), rel=1e-9, abs=1e-12)
    assert eval_lovasz(f, 0.5 * u + 0.5 * v) <= 0.5 * eval_lovasz(f, u) + 0.5 * eval_lovasz(f, v) + 1e-9


@given(oracles(max_n=7))
def test_lovasz_of_indicator_is_f(f):
    for S in subsets(f.n):
        w = np.zeros(f.n)
        w[list(S)] = 1.0
        assert eval_lovasz(f, w) == pytest.approx(f(S), abs=1e-12)


# -- laminar budgets ----------------------------------------------------------------


def test_laminar_examples():
    spec = LaminarBudgetSpec([[0], [1], [0, 1]], [1, 1, 1.5])
    assert laminar_budget_eval(spec, [0]) == 1.0
    assert laminar_budget_eval(spec, [0, 1]) == 1.5
    assert laminar_budget_eval(spec, []) == 0.0


def test_laminar_uncovered_and_crossing():
    with pytest.raises(InputError):
        LaminarBudgetSpec([[0, 1], [1, 2]], [1, 1])
    with pytest.raises(InputError):
        LaminarBudgetSpec([[0]], [1], n=2)
    spec = LaminarBudgetSpec([[0]], [1])
    with pytest.raises(InputError):
        laminar_budget_eval(spec, [3])


def test_laminar_spec_round_trip():
    spec = LaminarBudgetSpec([[0], [1], [0, 1]], [1, 1, 1.5])
    assert LaminarBudgetSpec.from_dict(spec.to_dict()) == spec


@given(laminar_oracles())
def test_laminar_matches_subfamily_enumeration(f):
    for S in subsets(f.n):
        assert laminar_budget_eval(f.spec, S) == pytest.approx(laminar_budget_enumerate(f.spec, S), abs=1e-12)


def test_laminar_cardinality_profile_consistent():
    for sets, budgets in [([[0, 1, 2]], [5]), ([[0, 1, 2], [0], [1], [2]], [2.5, 1, 1, 1])]:
        f = LaminarOracle(LaminarBudgetSpec(sets, budgets))
        h = f.cardinality_profile()
        assert all(h[len(S)] == f(S) for S in subsets(f.n))


# -- verification -------------------------------------------------------------------


def test_verify_triangle_passes():
    rep = verify_submodular(GraphicOracle(3, [(0, 1), (1, 2), (0, 2)]), "exhaustive")
    assert rep.passed


def test_verify_counterexample_witness():
    t = TableOracle(2, {"0": 1, "1": 1, "0,1": 3})
    rep = verify_submodular(t, "exhaustive")
    assert not rep.passed
    assert {frozenset(rep.witness["A"]), frozenset(rep.witness["B"])} == {frozenset([0]), frozenset([1])}


def test_verify_laminar_example_passes():
    spec = LaminarBudgetSpec([[0], [1], [0, 1]], [1, 1, 1.5])
    assert verify_submodular(LaminarOracle(spec), "exhaustive").passed


def test_verify_flags_nonmonotone():
    t = TableOracle(2, {"0": 2, "1": 1, "0,1": 1})
    rep = verify_submodular(t)
    assert not rep.passed and rep.failure == "not monotone"


def test_verify_sampled_mode():
    rep = verify_submodular(UniformOracle(30, 4), ("sampled", 300))
    assert rep.passed and rep.mode == "sampled" and rep.checked == 300


@given(oracles(max_n=9, integer=False))
def test_every_family_is_submodular(f):
    assert verify_submodular(f, "exhaustive").passed


# -- minimisation -------------------------------------------------------------------


def _brute_min(f, m, c, T=frozenset(), include=frozenset(), exclude=frozenset()):
    fT = f(T)
    vals = {}
    free = [e for e in range(f.n) if e not in T]
    for k in range(len(free) + 1):
        for S in itertools.combinations(free, k):
            S = frozenset(S)
            if include <= S and not (S & exclude):
                vals[S] = c * (f(S | T) - fT) - float(sum(m[e] for e in S))
    best = min(vals.values())
    argmins = [S for S, v in vals.items() if v <= best + 1e-9]
    return best, frozenset().union(*argmins), frozenset.intersection(*argmins)


def _separated(f, m, c, T=frozenset(), include=frozenset(), exclude=frozenset(), gap=1e-6):
    """No set value sits just above the minimum, so the extreme minimizers are well defined."""
    fT = f(T)
    free = [e for e in range(f.n) if e not in T]
    vals = [c * (f(frozenset(S) | T) - fT) - float(sum(m[e] for e in S))
            for k in range(len(free) + 1) for S in itertools.combinations(free, k)
            if include <= frozenset(S) and not (frozenset(S) & exclude)]
    best = min(vals)
    return not any(best + 1e-9 < v <= best + gap for v in vals)


def test_sfm_examples():
    f = UniformOracle(2, 2)
    res = sfm_min(f, [0.3, 0.7], scale=1.0)
    assert res.minimizer == frozenset() and res.value == pytest.approx(0.0)
    res = sfm_min(f, [0.3, 0.7], scale=0.0)
    assert res.minimizer == frozenset({0, 1}) and res.value == pytest.approx(-1.0)


def test_sfm_rank_one_half_scale():
    # 0.5*min(|S|,1) - x(S): {b} gives -0.2 but {a,b} gives -0.5
    res = sfm_min(UniformOracle(2, 1), [0.3, 0.7], scale=0.5, which="min")
    assert res.value == pytest.approx(-0.5)
    assert res.minimizer == frozenset({0, 1})


def test_sfm_include_in_contracted_rejected():
    with pytest.raises(InputError):
        sfm_min(UniformOracle(3, 1), [0, 0, 0], contracted=[0], include=0)


@pytest.mark.parametrize("backend", ["exhaustive", "minnorm"])
@given(f=oracles(max_n=8, integer=False), data=st.data())
def test_sfm_backends_against_enumeration(backend, f, data):
    m = np.array(data.draw(st.lists(st.floats(0, 3), min_size=f.n, max_size=f.n)))
    c = data.draw(st.sampled_from([0.0, 0.5, 1.0, 2.0]))
    T = frozenset(data.draw(st.sets(st.integers(0, f.n - 1), max_size=2)))
    best, biggest, smallest = _brute_min(f, m, c, T)
    hi = sfm_min(f, m, scale=c, contracted=T, which="max", backend=backend)
    lo = sfm_min(f, m, scale=c, contracted=T, which="min", backend=backend)
    assert hi.value == pytest.approx(best, abs=1e-7)
    assert lo.value == pytest.approx(best, abs=1e-7)
    fT = f(T)
    for res in (hi, lo):
        S = res.minimizer
        assert c * (f(S | T) - fT) - m[list(S)].sum() == pytest.approx(best, abs=1e-7)
    assert lo.minimizer <= hi.minimizer
    if _separated(f, m, c, T):
        assert hi.minimizer == biggest
        assert lo.minimizer == smallest


@given(f=oracles(max_n=7), data=st.data())
def test_sfm_with_constraints(f, data):
    m = np.array(data.draw(st.lists(st.floats(0, 3), min_size=f.n, max_size=f.n)))
    e = data.draw(st.integers(0, f.n - 1))
    ex = frozenset(data.draw(st.sets(st.integers(0, f.n - 1), max_size=2))) - {e}
    best, _, smallest = _brute_min(f, m, 1.0, include=frozenset([e]), exclude=ex)
    res = sfm_min(f, m, include=e, exclude=ex, which="min")
    assert res.value == pytest.approx(best, abs=1e-7)
    assert e in res.minimizer and not (res.minimizer & ex)
    assert f(res.minimizer) - m[list(res.minimizer)].sum() == pytest.approx(best, abs=1e-7)
    if _separated(f, m, 1.0, include=frozenset([e]), exclude=ex):
        assert res.minimizer == smallest


def test_min_norm_point_on_base_polytope():
    f = UniformOracle(3, 2)
    x = min_norm_point(lambda S: f(S), 3)
    assert np.allclose(x, [2 / 3] * 3, atol=1e-9)


def test_exhaustive_backend_limit():
    with pytest.raises(CapabilityError):
        sfm_min(UniformOracle(25, 3), np.ones(25), backend="exhaustive")


def test_all_subsets_count():
    assert len(list(all_subsets(range(4)))) == 16
    assert math.comb(4, 2) == sum(1 for S in all_subsets(range(4)) if len(S) == 2)


def test_scaled_oracle():
    f = ScaledOracle(UniformOracle(2, 1), 0.5)
    assert f([0, 1]) == 0.5


@pytest.mark.parametrize("backend", ["exhaustive", "minnorm"])
def test_sfm_near_tie_returns_near_minimizers(backend):
    # adding element 1 changes the value by 1e-8, below the solver tolerance
    f = UniformOracle(2, 1)
    m = np.array([1.0, 1e-8])
    for which in ("min", "max"):
        res = sfm_min(f, m, scale=1.0, which=which, backend=backend)
        assert res.value == pytest.approx(-1e-8, abs=1e-7)
        assert 0 in res.minimizer
