import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyflow.exceptions import CapabilityError, InputError
from polyflow.offline import brute_force_feasibility
from polyflow.submodular import GraphicOracle, PartitionOracle, UniformOracle, eval_lovasz
from polyflow.waterlevels import (
    LevelCache,
    minimal_tight_set,
    naive_level,
    thresholded_levels,
    verify_sua_kkt,
    water_level_brute,
    water_levels_alg1,
    water_levels_alg2,
    water_levels_brute,
)

from strategies import oracle_and_load

ALGS = [water_levels_alg1, water_levels_alg2]


@pytest.mark.parametrize("alg", ALGS)
def test_modular_levels_equal_loads(alg):
    dec = alg(UniformOracle(2, 2), [0.3, 0.7])
    assert np.allclose(dec.w, [0.3, 0.7])
    assert [set(S) for S in dec.chain] == [{1}, {0, 1}]
    assert np.allclose(dec.densities, [0.7, 0.3])


@pytest.mark.parametrize("alg", ALGS)
def test_rank_one_levels(alg):
    dec = alg(UniformOracle(2, 1), [0.3, 0.7])
    assert np.allclose(dec.w, [1.0, 1.0])
    assert [set(S) for S in dec.chain] == [{0, 1}]
    assert np.allclose(dec.densities, [1.0])


@pytest.mark.parametrize("alg", ALGS)
def test_partition_levels(alg):
    f = PartitionOracle([[0, 1], [2]], [1, 1])
    assert np.allclose(alg(f, [0.2, 0.3, 0.9]).w, [0.5, 0.5, 0.9])


@pytest.mark.parametrize("alg", ALGS)
def test_zero_load_element_inherits_spanning_level(alg):
    # c is spanned once a and b sit at level 1, so its level is 1 as well
    f = UniformOracle(3, 2)
    x = [1.0, 1.0, 0.0]
    assert np.allclose(alg(f, x).w, [1.0, 1.0, 1.0])
    assert np.allclose(water_levels_brute(f, x), [1.0, 1.0, 1.0])


@pytest.mark.parametrize("alg", ALGS)
def test_zero_load_gives_zero_levels(alg):
    assert np.array_equal(alg(GraphicOracle(3, [(0, 1), (1, 2)]), [0.0, 0.0]).w, [0.0, 0.0])


def test_brute_level_and_naive_variant():
    f = UniformOracle(2, 2)
    res = water_level_brute(f, [0.3, 0.7], 0)
    assert res.maxmin == pytest.approx(0.3) and res.minmax == pytest.approx(0.3)
    assert naive_level(f, [0.3, 0.7], 0) == pytest.approx(0.5)
    assert water_level_brute(UniformOracle(3, 1), [0, 0, 0], 2).maxmin == 0.0


def test_brute_capability_limit():
    with pytest.raises(CapabilityError):
        water_level_brute(UniformOracle(17, 3), np.zeros(17), 0)


def test_loaded_loop_rejected():
    with pytest.raises(InputError):
        water_levels_alg1(GraphicOracle(2, [(0, 0), (0, 1)]), [0.5, 0.1])


def test_negative_load_rejected():
    with pytest.raises(InputError):
        water_levels_alg1(UniformOracle(2, 1), [-0.1, 0.1])


def test_thresholded_examples():
    f = UniformOracle(2, 1)
    tl = thresholded_levels(f, [0.5, 0.5], b=[1, 1], v=[2, 1])
    assert np.allclose(tl.thresholds, [2, 1, 0])
    # at t=2 only a carries load; b is still spanned by a's set
    assert np.allclose(tl.levels[0], [0.5, 0.5])
    assert np.allclose(tl.levels[1], [1.0, 1.0])
    assert np.allclose(tl.levels[-1], water_levels_alg1(f, [0.5, 0.5]).w)


def test_thresholded_single_class_matches_plain():
    f = PartitionOracle([[0, 1], [2]], [1, 1])
    x = np.array([0.2, 0.3, 0.9])
    tl = thresholded_levels(f, x, b=[2, 2, 2], v=[3, 3, 3])
    assert len(tl.thresholds) == 2
    assert np.allclose(tl.levels[0], water_levels_alg1(f, 2 * x).w)


def test_thresholded_rejects_nonpositive_cost():
    with pytest.raises(InputError):
        thresholded_levels(UniformOracle(2, 1), [0, 0], b=[0, 1], v=[1, 1])


def test_minimal_tight_set_examples():
    f = UniformOracle(2, 1)
    assert minimal_tight_set(f, [1.0, 0.0], 0).members == frozenset({0})
    assert minimal_tight_set(f, [0.5, 0.5], 0).members == frozenset({0, 1})
    assert minimal_tight_set(f, [0.2, 0.2], 0).members is None


def test_kkt_pass_fault_and_vacuous():
    f = PartitionOracle([[0, 1], [2]], [1, 1])
    x = [0.2, 0.3, 0.9]
    dec = water_levels_alg1(f, x)
    assert verify_sua_kkt(f, x, dec).passed
    alpha = list(dec.alpha)
    alpha[0] += 0.1
    bad = verify_sua_kkt(f, x, dataclasses.replace(dec, alpha=tuple(alpha)))
    assert not bad.passed and not bad.checks["stationarity"]
    assert "stationarity" in bad.witness
    z = np.zeros(3)
    assert verify_sua_kkt(f, z, water_levels_alg1(f, z)).passed


def test_level_cache_matches_alg1(rng):
    f = GraphicOracle(5, [(0, 1), (1, 2), (0, 2), (3, 4), (2, 3)])
    cache = LevelCache(f)
    for _ in range(20):
        x = rng.random(5)
        assert np.allclose(cache.levels(x), water_levels_alg1(f, x).w, atol=1e-12)
    cache.levels(x)
    assert cache.hits > 0


# -- properties ---------------------------------------------------------------------


@given(oracle_and_load(max_n=7, integer=False))
def test_three_routes_agree(case):
    f, x = case
    w1 = water_levels_alg1(f, x).w
    assert np.allclose(w1, water_levels_alg2(f, x).w, atol=1e-7)
    for e in range(f.n):
        res = water_level_brute(f, x, e)
        assert res.maxmin == pytest.approx(w1[e], abs=1e-7)
        assert res.minmax == pytest.approx(res.maxmin, abs=1e-7)


@given(oracle_and_load(max_n=8))
def test_decomposition_structure(case):
    f, x = case
    dec = water_levels_alg1(f, x)
    assert all(a > b for a, b in zip(dec.densities, dec.densities[1:]))
    assert all(a < b for a, b in zip(dec.chain, dec.chain[1:]))
    assert dec.chain[-1] == frozenset(range(f.n))
    prev = frozenset()
    for S, t in zip(dec.chain, dec.densities):
        assert np.allclose(dec.w[list(S - prev)], t)
        prev = S
    assert all(a >= -1e-12 for a in dec.alpha)
    for e in range(f.n):
        assert sum(a for S, a in zip(dec.chain, dec.alpha) if e in S) == pytest.approx(dec.w[e], abs=1e-9)
        if x[e] > 0:
            assert dec.u[e] == pytest.approx(x[e] / dec.w[e])
    assert verify_sua_kkt(f, x, dec).passed


@given(oracle_and_load(max_n=8))
def test_duality_with_lovasz(case):
    f, x = case
    assert eval_lovasz(f, water_levels_alg1(f, x).w) == pytest.approx(x.sum(), abs=1e-8)


@given(oracle_and_load(max_n=8), st.data())
def test_levels_monotone_in_load(case, data):
    f, x = case
    bump = np.array(data.draw(st.lists(st.floats(0, 2), min_size=f.n, max_size=f.n)))
    assert np.all(water_levels_alg1(f, x + bump).w >= water_levels_alg1(f, x).w - 1e-9)


@given(oracle_and_load(max_n=8), st.floats(0.1, 3.0))
def test_feasibility_indicator(case, s):
    f, x = case
    top = water_levels_alg1(f, x).w.max(initial=0.0)
    if top == 0:
        return
    y = x * (s / top)
    if abs(s - 1.0) < 1e-6:
        return
    indicated = water_levels_alg1(f, y).w.max() <= 1 + 1e-9
    assert indicated == brute_force_feasibility(f, y).feasible


@given(oracle_and_load(max_n=6))
def test_levels_scale_linearly(case):
    f, x = case
    assert np.allclose(water_levels_alg1(f, 2.5 * x).w, 2.5 * water_levels_alg1(f, x).w, atol=1e-9)
