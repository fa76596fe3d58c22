"""Expected-regret computations over explicit solution sets.

This is the definitional layer: pairwise expected regret as a proportion-
weighted sum over cluster centers, and max / minimax expected regret by
enumeration. The MILP layer must agree with these on anything small enough
to enumerate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import ClusteredSample
from .model import OptimizationSense, Solution


@dataclass(frozen=True)
class RegretReport:
    """Outcome of a minimax-expected-regret computation: the incumbent, its
    best challenger, and their pairwise expected regret (= the MMER value)."""

    value: float
    argmin_solution: Solution
    best_challenger: Solution


def _center_values(x: Solution, weights: ClusteredSample) -> np.ndarray:
    return weights.centers_matrix @ x.performance


def per(x: Solution, y: Solution, weights: ClusteredSample) -> float:
    """Pairwise expected regret of recommending x instead of y: the expected
    value loss over the cluster centers, counting only centers where y beats x.

    For minimized instances the loss is excess cost, so the difference flips.
    """
    if x.instance is not y.instance:
        raise ValueError("solutions come from different instances")
    fx = _center_values(x, weights)
    fy = _center_values(y, weights)
    diff = fy - fx if x.sense is OptimizationSense.MAXIMIZE else fx - fy
    return float(weights.proportions @ np.maximum(0.0, diff))


def per_matrix(performances: np.ndarray, weights: ClusteredSample,
               sense: OptimizationSense) -> np.ndarray:
    """Dense PER matrix R[i, j] = PER(solution_i, solution_j) for stacked
    performance vectors (rows). Used by enumeration oracles."""
    f = performances @ weights.centers_matrix.T  # (N, k)
    n = f.shape[0]
    out = np.zeros((n, n))
    for c, rho in enumerate(weights.proportions):
        diff = f[None, :, c] - f[:, None, c]
        if sense is OptimizationSense.MINIMIZE:
            diff = -diff
        out += rho * np.maximum(0.0, diff)
    return out


def mer_explicit(
    x: Solution, candidates: list[Solution], weights: ClusteredSample
) -> tuple[float, Solution]:
    """Max expected regret of x against an explicit candidate set; ties on the
    value go to the earliest candidate."""
    if not candidates:
        raise ValueError("empty candidate list")
    best_val, best = -1.0, None
    for y in candidates:
        v = per(x, y, weights)
        if v > best_val + 1e-15:
            best_val, best = v, y
    return best_val, best


def mmer_explicit(candidates: list[Solution], weights: ClusteredSample) -> RegretReport:
    """Minimax expected regret over an explicit set; ties by first index."""
    if not candidates:
        raise ValueError("empty candidate list")
    best_report = None
    for x in candidates:
        val, challenger = mer_explicit(x, candidates, weights)
        if best_report is None or val < best_report.value - 1e-15:
            best_report = RegretReport(val, x, challenger)
    return best_report
