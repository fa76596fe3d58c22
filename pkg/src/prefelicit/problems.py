"""The two benchmark problem families: the multiobjective knapsack (MKP,
maximized) and the multiobjective assignment of agents to shareable
resources (MAP, minimized).

Both expose the same surface: binary decision vectors, a performance matrix
mapping decisions to per-criterion values, feasibility constraints that can
be evaluated directly or emitted into a MILP builder, and a lossless JSON
file format. Generated data is normalized so every feasible solution's
weighted-sum value lands in [0, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .milp import MilpBackend, ModelBuilder
from .model import OptimizationSense, Solution, WeightVector

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class KnapsackInstance:
    """n-criterion, p-item knapsack: max U x subject to sum(alpha_i x_i) <= capacity."""

    n: int
    p: int
    utilities: np.ndarray      # (n, p), entries in [0, 1/p]
    item_weights: np.ndarray   # (p,), positive integers
    capacity: int
    seed: int | None = None
    criteria_names: tuple[str, ...] | None = None

    sense = OptimizationSense.MAXIMIZE
    kind = "mkp"

    def __post_init__(self):
        object.__setattr__(self, "utilities", np.asarray(self.utilities, dtype=float))
        object.__setattr__(self, "item_weights", np.asarray(self.item_weights, dtype=np.int64))
        if self.utilities.shape != (self.n, self.p):
            raise ValueError("utilities must have shape (n, p)")
        if self.item_weights.shape != (self.p,):
            raise ValueError("item_weights must have shape (p,)")
        if np.any(self.item_weights < 1):
            raise ValueError("item weights must be >= 1")
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")

    @property
    def num_decision_vars(self) -> int:
        return self.p

    @property
    def performance_matrix(self) -> np.ndarray:
        return self.utilities

    def validate_normalized(self):
        if np.any(self.utilities < -NORMALIZATION_TOL) or np.any(
            self.utilities > 1.0 / self.p + NORMALIZATION_TOL
        ):
            raise ValueError("utilities outside [0, 1/p]: f_w range not guaranteed")

    def is_feasible(self, decision: np.ndarray) -> bool:
        decision = _check_binary(decision, self.p)
        return int(self.item_weights @ decision) <= self.capacity

    def solution(self, decision: np.ndarray) -> Solution:
        decision = _check_binary(decision, self.p)
        if not self.is_feasible(decision):
            raise ValueError("decision violates the knapsack capacity")
        return Solution(self, decision, self.utilities @ decision)

    def add_decision_constraints(self, builder: ModelBuilder, var_idx: list[int]):
        builder.add_le({j: float(w) for j, w in zip(var_idx, self.item_weights)}, float(self.capacity))

    def to_json_dict(self) -> dict:
        d = {
            "kind": "mkp",
            "n": self.n,
            "p": self.p,
            "utilities": self.utilities.tolist(),
            "item_weights": self.item_weights.tolist(),
            "capacity": int(self.capacity),
            "seed": self.seed,
        }
        if self.criteria_names is not None:
            d["criteria_names"] = list(self.criteria_names)
        return d


@dataclass(frozen=True)
class AllocationInstance:
    """n-criterion allocation of m agents to r shareable resources: every agent
    gets exactly one resource, at most ``bound`` agents per resource, costs
    minimized. Decisions are the flattened (m, r) assignment matrix."""

    n: int
    m: int
    r: int
    bound: int
    costs: np.ndarray  # (n, m, r), normalized per criterion
    seed: int | None = None
    criteria_names: tuple[str, ...] | None = None

    sense = OptimizationSense.MINIMIZE
    kind = "map"
    _flat_costs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        costs = np.asarray(self.costs, dtype=float)
        object.__setattr__(self, "costs", costs)
        if costs.shape != (self.n, self.m, self.r):
            raise ValueError("costs must have shape (n, m, r)")
        if not self.r < self.m:
            raise ValueError("requires r < m")
        if self.m > self.bound * self.r:
            raise ValueError(f"infeasible shape: {self.m} agents > {self.bound}*{self.r} slots")
        object.__setattr__(self, "_flat_costs", costs.reshape(self.n, self.m * self.r))

    @property
    def num_decision_vars(self) -> int:
        return self.m * self.r

    @property
    def performance_matrix(self) -> np.ndarray:
        return self._flat_costs

    def validate_normalized(self):
        if np.any(self.costs < -NORMALIZATION_TOL):
            raise ValueError("negative costs")
        totals = self.costs.sum(axis=(1, 2))
        if np.any(totals > 1.0 + 1e-6):
            raise ValueError("per-criterion cost totals exceed 1: f_w range not guaranteed")

    def is_feasible(self, decision: np.ndarray) -> bool:
        decision = _check_binary(decision, self.m * self.r)
        x = decision.reshape(self.m, self.r)
        return bool(np.all(x.sum(axis=1) == 1) and np.all(x.sum(axis=0) <= self.bound))

    def solution(self, decision: np.ndarray) -> Solution:
        decision = _check_binary(decision, self.m * self.r)
        if not self.is_feasible(decision):
            raise ValueError("decision is not a capacity-respecting full assignment")
        return Solution(self, decision, self._flat_costs @ decision)

    def add_decision_constraints(self, builder: ModelBuilder, var_idx: list[int]):
        idx = np.asarray(var_idx).reshape(self.m, self.r)
        for i in range(self.m):
            builder.add_eq({int(j): 1.0 for j in idx[i]}, 1.0)
        for j in range(self.r):
            builder.add_le({int(k): 1.0 for k in idx[:, j]}, float(self.bound))

    def to_json_dict(self) -> dict:
        d = {
            "kind": "map",
            "n": self.n,
            "m": self.m,
            "r": self.r,
            "b": int(self.bound),
            "costs": self.costs.tolist(),
            "seed": self.seed,
        }
        if self.criteria_names is not None:
            d["criteria_names"] = list(self.criteria_names)
        return d


ProblemInstance = KnapsackInstance | AllocationInstance


def generate_knapsack(n: int, p: int, rng_seed: int) -> KnapsackInstance:
    """Random MKP: item weights uniform in {1,...,20}, capacity = floor of half
    the total weight, utilities uniform in [0, 1/p]."""
    if n < 2 or p < 1:
        raise ValueError("need n >= 2 and p >= 1")
    rng = np.random.default_rng(rng_seed)
    weights = rng.integers(1, 21, size=p)
    capacity = int(weights.sum() // 2)
    utilities = rng.uniform(0.0, 1.0 / p, size=(n, p))
    return KnapsackInstance(n, p, utilities, weights, max(capacity, 1), seed=rng_seed)


def generate_allocation(n: int, m: int, r: int, b: int, rng_seed: int) -> AllocationInstance:
    """Random MAP: raw costs uniform in [0, 20], divided by the per-criterion
    grand total so any assignment's weighted cost stays in [0, 1]."""
    if not r < m:
        raise ValueError("need r < m")
    if m > b * r:
        raise ValueError(f"infeasible shape: {m} agents cannot fit in {b}*{r} slots")
    rng = np.random.default_rng(rng_seed)
    raw = rng.uniform(0.0, 20.0, size=(n, m, r))
    costs = raw / raw.sum(axis=(1, 2), keepdims=True)
    return AllocationInstance(n, m, r, b, costs, seed=rng_seed)


def is_feasible(instance: ProblemInstance, decision: np.ndarray) -> bool:
    return instance.is_feasible(decision)


def optimize_scalarized(
    instance: ProblemInstance, w: WeightVector, backend: MilpBackend
) -> Solution:
    """Best feasible solution for the fixed weights w (max for MKP, min for
    MAP), solved as a single-objective MILP."""
    if w.n != instance.n:
        raise ValueError(f"weight dimension {w.n} != criterion count {instance.n}")
    builder = ModelBuilder(maximize=instance.sense is OptimizationSense.MAXIMIZE)
    var_idx = [builder.add_binary(f"x{j}") for j in range(instance.num_decision_vars)]
    instance.add_decision_constraints(builder, var_idx)
    coeffs = w.components @ instance.performance_matrix
    builder.set_objective({j: float(cj) for j, cj in zip(var_idx, coeffs)})
    result = backend.solve(builder.build())
    decision = np.round(result.x[: instance.num_decision_vars]).astype(np.int8)
    return instance.solution(decision)


def instance_to_json(instance: ProblemInstance) -> str:
    return json.dumps(instance.to_json_dict())


def instance_from_json_dict(data: dict) -> ProblemInstance:
    kind = data.get("kind")
    names = tuple(data["criteria_names"]) if "criteria_names" in data else None
    if kind == "mkp":
        return KnapsackInstance(
            n=data["n"],
            p=data["p"],
            utilities=np.array(data["utilities"], dtype=float),
            item_weights=np.array(data["item_weights"], dtype=np.int64),
            capacity=data["capacity"],
            seed=data.get("seed"),
            criteria_names=names,
        )
    if kind == "map":
        return AllocationInstance(
            n=data["n"],
            m=data["m"],
            r=data["r"],
            bound=data["b"],
            costs=np.array(data["costs"], dtype=float),
            seed=data.get("seed"),
            criteria_names=names,
        )
    raise ValueError(f"unknown instance kind {kind!r}")


def instance_from_json(text: str) -> ProblemInstance:
    return instance_from_json_dict(json.loads(text))


def save_instance(instance: ProblemInstance, path: str):
    with open(path, "w") as fh:
        fh.write(instance_to_json(instance))
        fh.write("\n")


def load_instance(path: str) -> ProblemInstance:
    with open(path) as fh:
        return instance_from_json(fh.read())


def _check_binary(decision: np.ndarray, expected_len: int) -> np.ndarray:
    decision = np.asarray(decision)
    if decision.shape != (expected_len,):
        raise ValueError(f"decision must have shape ({expected_len},), got {decision.shape}")
    if not np.isin(decision, (0, 1)).all():
        raise ValueError("decision entries must be 0 or 1")
    return decision.astype(np.int8)


INSTANCE_JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Problem instance file",
    "type": "object",
    "oneOf": [
        {
            "properties": {
                "kind": {"const": "mkp"},
                "n": {"type": "integer", "minimum": 2},
                "p": {"type": "integer", "minimum": 1},
                "utilities": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}},
                },
                "item_weights": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "capacity": {"type": "integer", "minimum": 1},
                "seed": {"type": ["integer", "null"]},
                "criteria_names": {"type": "array", "items": {"type": "string"}},
            },
            "required": ["kind", "n", "p", "utilities", "item_weights", "capacity"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "kind": {"const": "map"},
                "n": {"type": "integer", "minimum": 2},
                "m": {"type": "integer", "minimum": 2},
                "r": {"type": "integer", "minimum": 1},
                "b": {"type": "integer", "minimum": 1},
                "costs": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "number"}},
                    },
                },
                "seed": {"type": ["integer", "null"]},
                "criteria_names": {"type": "array", "items": {"type": "string"}},
            },
            "required": ["kind", "n", "m", "r", "b", "costs"],
            "additionalProperties": False,
        },
    ],
}
