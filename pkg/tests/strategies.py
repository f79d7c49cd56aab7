"""Hypothesis strategies for oracles and loads."""
import numpy as np
from hypothesis import strategies as st

from polyflow.cli.generators import random_laminar_spec, random_oracle
from polyflow.submodular import LaminarOracle


@st.composite
def oracles(draw, max_n=8, integer=True):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_oracle(np.random.default_rng(seed), n, integer=integer)


@st.composite
def oracle_and_load(draw, max_n=8, integer=True):
    f = draw(oracles(max_n=max_n, integer=integer))
    x = draw(st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 3.0)), min_size=f.n, max_size=f.n))
    return f, np.array(x)


@st.composite
def laminar_oracles(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return LaminarOracle(random_laminar_spec(np.random.default_rng(seed), n, integer=draw(st.booleans())))
