"""Shared domain types: weight vectors on the simplex, solutions with cached
performance vectors, and the weighted-sum aggregation they are scored with.

Everything here is immutable after construction and safe to share between
threads or sessions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

SIMPLEX_TOL = 1e-9

# per-criterion performance values; plain float vectors throughout
UtilityVector = np.ndarray


class OptimizationSense(enum.Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class WeightVector:
    """A point on the (n-1)-simplex: componentwise non-negative, summing to 1."""

    components: np.ndarray

    def __post_init__(self):
        comps = _frozen(np.asarray(self.components, dtype=float))
        object.__setattr__(self, "components", comps)
        if comps.ndim != 1 or comps.size == 0:
            raise ValueError("weight vector must be a non-empty 1-d array")
        if np.any(comps < -SIMPLEX_TOL):
            raise ValueError(f"negative weight component: {comps}")
        total = float(comps.sum())
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"weights sum to {total}, expected 1")

    @property
    def n(self) -> int:
        return self.components.size

    @staticmethod
    def from_raw(raw: np.ndarray) -> "WeightVector":
        """Project an arbitrary vector onto the simplex: clamp negatives to 0,
        renormalize by the sum. Raises if the clamped sum is ~0."""
        clamped = np.maximum(np.asarray(raw, dtype=float), 0.0)
        total = clamped.sum()
        if total <= 1e-12:
            raise ValueError("cannot normalize: non-positive mass after clamping")
        return WeightVector(clamped / total)

    @staticmethod
    def uniform(n: int) -> "WeightVector":
        return WeightVector(np.full(n, 1.0 / n))

    @staticmethod
    def basis(n: int, k: int) -> "WeightVector":
        e = np.zeros(n)
        e[k] = 1.0
        return WeightVector(e)


@dataclass(frozen=True)
class Solution:
    """A feasible decision vector together with its cached performance vector.

    ``instance`` is the problem the decision belongs to; construction goes
    through ``ProblemInstance.solution`` which checks feasibility and computes
    the performance, so a Solution in hand is always consistent.
    """

    instance: object
    decision: np.ndarray
    performance: np.ndarray = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "decision", _frozen(np.asarray(self.decision, dtype=np.int8)))
        object.__setattr__(self, "performance", _frozen(np.asarray(self.performance, dtype=float)))

    @property
    def sense(self) -> OptimizationSense:
        return self.instance.sense

    def decision_key(self) -> bytes:
        """Exact-equality key for challenger-set membership tests."""
        return self.decision.tobytes()

    def __eq__(self, other):
        if not isinstance(other, Solution):
            return NotImplemented
        return self.instance is other.instance and np.array_equal(self.decision, other.decision)

    def __hash__(self):
        return hash((id(self.instance), self.decision.tobytes()))


def aggregate(w: WeightVector, x: Solution) -> float:
    """Weighted-sum value of a solution: the dot product of the criterion
    weights with the solution's performance vector."""
    if w.n != x.performance.size:
        raise ValueError(
            f"dimension mismatch: {w.n} weights vs {x.performance.size} criteria"
        )
    return float(w.components @ x.performance)


def utility_difference(x: Solution, y: Solution) -> np.ndarray:
    """Per-criterion performance difference u(x) - u(y).

    For every weight vector w, ``w . utility_difference(x, y)`` equals
    ``aggregate(w, x) - aggregate(w, y)``; this is the explanatory variable
    of the latent-variable answer model.
    """
    if x.instance is not y.instance:
        raise ValueError("solutions come from different instances")
    if x.performance.size != y.performance.size:
        raise ValueError("performance dimension mismatch")
    return x.performance - y.performance
