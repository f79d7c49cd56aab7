from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InputError
from ..submodular.oracles import SubmodularOracle, from_spec


@dataclass
class SapInstance:
    """Online assignment instance: oracle, values, costs and arrival parts."""

    oracle: SubmodularOracle
    values: np.ndarray
    costs: np.ndarray
    parts: list
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.oracle.n
        self.values = np.asarray(self.values, dtype=float)
        self.costs = np.asarray(self.costs, dtype=float)
        self.parts = [tuple(int(e) for e in p) for p in self.parts]
        if self.values.shape != (n,) or self.costs.shape != (n,):
            raise InputError(f"values and costs must have length {n}")
        if not (np.all(np.isfinite(self.values)) and np.all(np.isfinite(self.costs))):
            raise InputError("values and costs must be finite")
        if np.any(self.values <= 0) or np.any(self.costs <= 0):
            raise InputError("values and costs must be positive")
        flat = [e for p in self.parts for e in p]
        if sorted(flat) != list(range(n)):
            raise InputError("parts must partition the ground set")
        if any(len(p) == 0 for p in self.parts):
            raise InputError("parts must be nonempty")
        for e in range(n):
            if self.oracle([e]) <= 0:
                raise InputError(f"element {e} has f({{e}}) = 0; remove it from the instance")
        self.part_of = np.empty(n, dtype=int)
        for j, p in enumerate(self.parts):
            self.part_of[list(p)] = j

    @property
    def n(self) -> int:
        return self.oracle.n

    @property
    def m(self) -> int:
        return len(self.parts)

    @property
    def ratios(self) -> np.ndarray:
        return self.values / self.costs

    @property
    def uniform(self) -> bool:
        return bool(np.all(self.values == 1.0) and np.all(self.costs == 1.0))

    def to_dict(self) -> dict:
        out = {
            "ground": self.n,
            "oracle": self.oracle.to_spec(),
            "values": [float(v) for v in self.values],
            "costs": [float(b) for b in self.costs],
            "parts": [list(p) for p in self.parts],
        }
        if self.labels:
            out["labels"] = {str(k): v for k, v in sorted(self.labels.items())}
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> SapInstance:
        try:
            oracle = from_spec(doc["oracle"])
            n = int(doc.get("ground", oracle.n))
            if n != oracle.n:
                raise InputError(f"ground size {n} does not match oracle size {oracle.n}")
            values = doc.get("values", [1.0] * n)
            costs = doc.get("costs", [1.0] * n)
            parts = doc["parts"]
        except KeyError as exc:
            raise InputError(f"instance misses field {exc}") from None
        labels = {int(k): str(v) for k, v in doc.get("labels", {}).items()}
        return cls(oracle, values, costs, parts, labels)


@dataclass
class Allocation:
    x: np.ndarray
    parts: list
    revealed: int = 0

    @property
    def part_totals(self) -> np.ndarray:
        return np.array([float(self.x[list(p)].sum()) for p in self.parts])

    def to_dict(self) -> dict:
        return {"x": [float(v) for v in self.x], "revealed": self.revealed,
                "part_totals": [float(v) for v in self.part_totals]}


def g(z):
    return np.exp(np.asarray(z, dtype=float) - 1.0)


def G(z):
    return np.exp(np.asarray(z, dtype=float) - 1.0) - math.exp(-1.0)
