from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._config import get_tol
from ..exceptions import CapabilityError
from .oracles import TABLE_LIMIT, SubmodularOracle, set_of


@dataclass
class SubmodularityReport:
    passed: bool
    mode: str
    checked: int
    failure: str | None = None
    witness: dict = field(default_factory=dict)
    loops: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "mode": self.mode,
            "checked": self.checked,
            "failure": self.failure,
            "witness": {k: sorted(v) if isinstance(v, frozenset) else v for k, v in self.witness.items()},
            "loops": list(self.loops),
        }


def verify_submodular(oracle: SubmodularOracle, mode="exhaustive", samples: int = 1000,
                      seed: int = 0, tol: float | None = None) -> SubmodularityReport:
    """Check normalisation, monotonicity and submodularity of ``oracle``.

    ``mode="exhaustive"`` tabulates ``f`` and tests the diminishing-returns
    form ``f(S+a) + f(S+b) >= f(S+a+b) + f(S)`` for every ``S, a, b``,
    which is equivalent to the pairwise inequality; the witness is reported
    as the pair ``A = S+a``, ``B = S+b``.  ``mode="sampled"`` draws random
    pairs ``(A, B)`` instead.
    """
    if isinstance(mode, tuple):
        mode, samples = mode
    n = oracle.n
    if mode == "exhaustive":
        if n > TABLE_LIMIT:
            raise CapabilityError(f"exhaustive verification needs n <= {TABLE_LIMIT}")
        return _exhaustive(oracle, tol)
    if mode == "sampled":
        return _sampled(oracle, int(samples), seed, tol)
    raise ValueError(f"unknown verification mode {mode!r}")


def _exhaustive(oracle, tol):
    n = oracle.n
    table = np.asarray(oracle.table(), dtype=float)
    tol = (get_tol() if tol is None else tol) * max(1.0, float(np.abs(table).max(initial=0.0)))
    loops = [e for e in range(n) if table[1 << e] <= tol]
    if abs(table[0]) > tol:
        return SubmodularityReport(False, "exhaustive", 1, "f(empty) != 0", {"value": float(table[0])}, loops)
    masks = np.arange(1 << n, dtype=np.int64)
    checked = 1
    for a in range(n):
        bit_a = np.int64(1) << a
        without = masks[(masks & bit_a) == 0]
        drop = table[without | bit_a] - table[without] < -tol
        checked += len(without)
        if drop.any():
            S = int(without[np.argmax(drop)])
            return SubmodularityReport(False, "exhaustive", checked, "not monotone",
                                       {"S": set_of(S), "e": a}, loops)
    for a in range(n):
        for b in range(a + 1, n):
            bits = (np.int64(1) << a) | (np.int64(1) << b)
            S = masks[(masks & bits) == 0]
            lhs = table[S | (np.int64(1) << a)] + table[S | (np.int64(1) << b)]
            rhs = table[S | bits] + table[S]
            bad = lhs < rhs - tol
            checked += len(S)
            if bad.any():
                s = int(S[np.argmax(bad)])
                return SubmodularityReport(
                    False, "exhaustive", checked, "not submodular",
                    {"A": set_of(s | 1 << a), "B": set_of(s | 1 << b)}, loops)
    return SubmodularityReport(True, "exhaustive", checked, None, {}, loops)


def _sampled(oracle, samples, seed, tol):
    n = oracle.n
    rng = np.random.default_rng(seed)
    scale = max(1.0, abs(oracle(range(n))))
    tol = (get_tol() if tol is None else tol) * scale
    loops = [e for e in range(n) if oracle([e]) <= tol]
    if abs(oracle(())) > tol:
        return SubmodularityReport(False, "sampled", 1, "f(empty) != 0", {}, loops)
    for i in range(samples):
        A = frozenset(np.nonzero(rng.random(n) < 0.5)[0].tolist())
        B = frozenset(np.nonzero(rng.random(n) < 0.5)[0].tolist())
        fa, fb, fu, fi = oracle(A), oracle(B), oracle(A | B), oracle(A & B)
        if fu < fa - tol or fu < fb - tol or fi > min(fa, fb) + tol:
            return SubmodularityReport(False, "sampled", i + 1, "not monotone", {"A": A, "B": B}, loops)
        if fu + fi > fa + fb + tol:
            return SubmodularityReport(False, "sampled", i + 1, "not submodular", {"A": A, "B": B}, loops)
    return SubmodularityReport(True, "sampled", samples, None, {}, loops)
