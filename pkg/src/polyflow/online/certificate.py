"""Dual certificates and the a-posteriori ratio bound derived from them.

Scaling a dual point ``(γ, β)`` by ``1/κ``, where ``κ`` is the worst
coverage ratio ``(b_e γ_e + β_{j(e)}) / v_e``, yields a feasible dual whose
objective bounds the offline optimum from above.  The ratio of the primal
value to that bound is therefore a rigorous lower bound on the true ratio.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..submodular.lovasz import eval_lovasz
from .instance import SapInstance


@dataclass
class DualCertificate:
    gamma: np.ndarray
    beta: np.ndarray
    gamma_term: float | None = None

    def lovasz_objective(self, f) -> float:
        return eval_lovasz(f, self.gamma) + float(self.beta.sum())

    def objective(self, f) -> float:
        """Dual value used for certification (the surrogate when one was recorded)."""
        if self.gamma_term is not None:
            return self.gamma_term + float(self.beta.sum())
        return self.lovasz_objective(f)

    def to_dict(self) -> dict:
        return {"gamma": [float(v) for v in self.gamma], "beta": [float(v) for v in self.beta],
                "gamma_term": self.gamma_term}


class Certification(NamedTuple):
    kappa: float
    dual: float
    bound: float


def coverage(cert: DualCertificate, inst: SapInstance) -> np.ndarray:
    """Per-element ``(b_e γ_e + β_{j(e)}) / v_e``."""
    return (inst.costs * cert.gamma + cert.beta[inst.part_of]) / inst.values


def certify(cert: DualCertificate, inst: SapInstance, primal: float, f=None) -> Certification:
    """``κ``, the dual objective and the bound ``κ · primal / dual``."""
    f = inst.oracle if f is None else f
    kappa = float(coverage(cert, inst).min()) if inst.n else 1.0
    dual = cert.objective(f)
    if dual <= 0:
        bound = 1.0 if primal <= 0 else 0.0
    else:
        bound = max(0.0, kappa) * primal / dual
    return Certification(kappa, dual, bound)
