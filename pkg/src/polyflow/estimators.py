"""scikit-learn style wrappers around the solvers.

The "data" here are combinatorial instances rather than feature matrices,
so only :class:`WaterLevelTransformer` takes an ordinary 2-D array.  The
others accept a :class:`~polyflow.online.SapInstance` or
:class:`~polyflow.ranking.OswmInstance` (or their JSON dicts) in ``fit``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_loads, check_oracle, check_oswm_instance, check_sap_instance, check_seeds
from .exceptions import InputError
from .offline import lp_opt_fractional
from .online import solve_fractional, solve_small_bids
from .ranking import monte_carlo_ratio, ranking_run
from .waterlevels import water_levels_alg1, water_levels_alg2, water_levels_brute

_METHODS = {"alg1": lambda f, x: water_levels_alg1(f, x).w,
            "alg2": lambda f, x: water_levels_alg2(f, x).w,
            "brute": water_levels_brute}


class WaterLevelTransformer(TransformerMixin, BaseEstimator):
    """Map each row of loads to its water-level vector under ``oracle``."""

    def __init__(self, oracle=None, method: str = "alg1"):
        self.oracle = oracle
        self.method = method

    def fit(self, X=None, y=None):
        if self.oracle is None:
            raise InputError("WaterLevelTransformer needs an oracle")
        if self.method not in _METHODS:
            raise InputError(f"unknown method {self.method!r}")
        self.oracle_ = check_oracle(self.oracle)
        self.n_features_in_ = self.oracle_.n
        if X is not None:
            check_loads(X, self.n_features_in_)
        return self

    def transform(self, X):
        check_is_fitted(self, "oracle_")
        X = check_loads(X, self.n_features_in_)
        fn = _METHODS[self.method]
        return np.vstack([fn(self.oracle_, row) for row in X]) if len(X) else np.zeros((0, self.n_features_in_))


class FractionalAssignment(BaseEstimator):
    """Online fractional water-filling on one instance."""

    def __init__(self, step: float = 1e-3, mode: str = "frac"):
        self.step = step
        self.mode = mode

    def fit(self, instance, y=None):
        inst = check_sap_instance(instance)
        self.allocation_, self.certificate_, self.report_ = solve_fractional(inst, step=self.step, mode=self.mode)
        self.instance_ = inst
        return self

    def predict(self, instance=None):
        """Allocation vector (refits when a new instance is given)."""
        if instance is not None:
            self.fit(instance)
        check_is_fitted(self, "allocation_")
        return self.allocation_.x.copy()

    def score(self, instance=None, y=None):
        """Primal value over the offline LP optimum."""
        if instance is not None:
            self.fit(instance)
        check_is_fitted(self, "report_")
        opt = lp_opt_fractional(self.instance_).objective
        return self.report_.primal / opt if opt > 0 else 1.0


class SmallBidsAssignment(FractionalAssignment):
    """Integral allocation under the small-bids condition."""

    def __init__(self, eps: float = 0.05, validate: bool = True):
        self.eps = eps
        self.validate = validate

    def fit(self, instance, y=None):
        inst = check_sap_instance(instance)
        self.allocation_, self.certificate_, self.report_ = solve_small_bids(inst, self.eps, self.validate)
        self.instance_ = inst
        return self


class MatroidalRanking(BaseEstimator):
    """Matroidal ranking; ``fit`` estimates the mean ratio, ``predict`` runs given seeds."""

    def __init__(self, n_trials: int = 2000, random_state: int = 0):
        self.n_trials = n_trials
        self.random_state = random_state

    def fit(self, instance, y=None):
        inst = check_oswm_instance(instance)
        mc = monte_carlo_ratio(inst, self.n_trials, seed=self.random_state)
        self.instance_ = inst
        self.mean_ratio_, self.stderr_, self.opt_ = mc.mean, mc.stderr, mc.opt
        return self

    def predict(self, seeds):
        """Assignment (agent per item, -1 if unassigned) for each row of seeds."""
        check_is_fitted(self, "instance_")
        S = check_seeds(seeds, self.instance_.agents)
        return np.array([ranking_run(self.instance_, row).assignment for row in S], dtype=int)
