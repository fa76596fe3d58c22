"""Brute-force ground truth for small instances.

Everything here trades speed for being obviously correct: feasible sets are
enumerated outright, minimax expected regret is a double loop over the
enumeration, and the single-weight knapsack optimum is a textbook dynamic
program. The MILP machinery is tested against this module, never the other
way around.
"""

from __future__ import annotations

import itertools

import numpy as np

from .clustering import ClusteredSample
from .model import Solution, WeightVector
from .problems import AllocationInstance, KnapsackInstance, ProblemInstance
from .regret import RegretReport, per_matrix

MAX_KNAPSACK_ITEMS = 20
MAX_ASSIGNMENTS = 10**6


class InstanceTooLargeError(ValueError):
    """The feasible set would be too big to enumerate; refusing outright
    beats silently burning CPU in a test run."""


def enumerate_feasible(instance: ProblemInstance) -> list[Solution]:
    """Every feasible decision vector, with cached performance."""
    if isinstance(instance, KnapsackInstance):
        if instance.p > MAX_KNAPSACK_ITEMS:
            raise InstanceTooLargeError(
                f"{instance.p} items > {MAX_KNAPSACK_ITEMS}: 2^p enumeration refused"
            )
        idx = np.arange(2**instance.p, dtype=np.int64)
        bits = ((idx[:, None] >> np.arange(instance.p)) & 1).astype(np.int8)
        feasible = bits @ instance.item_weights <= instance.capacity
        return [instance.solution(row) for row in bits[feasible]]
    if isinstance(instance, AllocationInstance):
        count = instance.r**instance.m
        if count > MAX_ASSIGNMENTS:
            raise InstanceTooLargeError(f"{count} assignments > {MAX_ASSIGNMENTS}")
        solutions = []
        for assignment in itertools.product(range(instance.r), repeat=instance.m):
            counts = np.bincount(assignment, minlength=instance.r)
            if counts.max() > instance.bound:
                continue
            x = np.zeros((instance.m, instance.r), dtype=np.int8)
            x[np.arange(instance.m), assignment] = 1
            solutions.append(instance.solution(x.ravel()))
        return solutions
    raise TypeError(f"unsupported instance type {type(instance)!r}")


def oracle_mmer(instance: ProblemInstance, weights: ClusteredSample) -> RegretReport:
    """Exact MMER by definition: min over x of max over y of PER(x, y),
    computed on the full enumeration. Ties break toward lower index."""
    candidates = enumerate_feasible(instance)
    perfs = np.array([s.performance for s in candidates])
    regret = per_matrix(perfs, weights, instance.sense)
    mer = regret.max(axis=1)
    i = int(mer.argmin())
    j = int(regret[i].argmax())
    return RegretReport(float(regret[i, j]), candidates[i], candidates[j])


def knapsack_optimum_dp(instance: KnapsackInstance, w: WeightVector) -> Solution:
    """Exact single-weight knapsack optimum via capacity-indexed dynamic
    programming; independent of the MILP path."""
    values = w.components @ instance.utilities  # (p,), all >= 0
    cap = instance.capacity
    best = np.zeros(cap + 1)
    take = np.zeros((instance.p, cap + 1), dtype=bool)
    for i in range(instance.p):
        wi = int(instance.item_weights[i])
        if wi <= cap:
            candidate = best[: cap + 1 - wi] + values[i]
            improved = candidate > best[wi:]
            take[i, wi:] = improved
            best[wi:] = np.where(improved, candidate, best[wi:])
    decision = np.zeros(instance.p, dtype=np.int8)
    c = int(np.argmax(best))
    for i in range(instance.p - 1, -1, -1):
        if take[i, c]:
            decision[i] = 1
            c -= int(instance.item_weights[i])
    return instance.solution(decision)


def best_scalarized(instance: ProblemInstance, w: WeightVector) -> Solution:
    """Independent optimum for fixed weights: DP for knapsacks, enumeration
    for allocations."""
    if isinstance(instance, KnapsackInstance):
        return knapsack_optimum_dp(instance, w)
    candidates = enumerate_feasible(instance)
    values = np.array([w.components @ s.performance for s in candidates])
    return candidates[int(values.argmin())]
