"""Input validation shared by the estimator wrappers."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import InputError
from .online.instance import SapInstance
from .ranking.algorithm import OswmInstance
from .submodular.oracles import SubmodularOracle, from_spec


def check_oracle(oracle) -> SubmodularOracle:
    """Accept an oracle object or its JSON spec."""
    if isinstance(oracle, SubmodularOracle):
        return oracle
    if isinstance(oracle, dict):
        return from_spec(oracle)
    raise InputError(f"expected a submodular oracle or spec, got {type(oracle).__name__}")


def check_loads(X, n_features: int) -> np.ndarray:
    """2-D array of nonnegative finite loads with ``n_features`` columns."""
    try:
        X = check_array(X, dtype=float, ensure_all_finite=True)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if X.shape[1] != n_features:
        raise InputError(f"expected {n_features} columns, got {X.shape[1]}")
    if np.any(X < 0):
        raise InputError("loads must be nonnegative")
    return X


def check_sap_instance(inst) -> SapInstance:
    if isinstance(inst, SapInstance):
        return inst
    if isinstance(inst, dict):
        return SapInstance.from_dict(inst)
    raise InputError(f"expected a SAP instance, got {type(inst).__name__}")


def check_oswm_instance(inst) -> OswmInstance:
    if isinstance(inst, OswmInstance):
        return inst
    if isinstance(inst, dict):
        return OswmInstance.from_dict(inst)
    raise InputError(f"expected an OSWM instance, got {type(inst).__name__}")


def check_seeds(S, agents: int) -> np.ndarray:
    """2-D array of seed vectors in ``[0, 1]``, one row per run."""
    try:
        S = check_array(S, dtype=float, ensure_all_finite=True)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if S.shape[1] != agents:
        raise InputError(f"expected {agents} seeds per row, got {S.shape[1]}")
    if np.any(S < 0) or np.any(S > 1):
        raise InputError("seeds must lie in [0, 1]")
    return S
