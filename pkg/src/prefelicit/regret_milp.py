"""MILP-based expected-regret computation over implicitly defined feasible
sets.

Two programs are built here. The separation program finds the challenger
maximizing the expected regret of a fixed incumbent; the multiplication of
the center indicator with the challenger's value is linearized with one
binary and one continuous variable per center. The restricted minimax
program optimizes the incumbent against a finite challenger set only.
Alternating the two, adding each new best challenger to the set until it
repeats, yields the exact minimax expected regret: the restricted value can
only grow as the set does, and on repetition it sandwiches the separation
value.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .clustering import ClusteredSample
from .milp import MilpBackend, MilpModel, ModelBuilder, write_lp
from .model import OptimizationSense, Solution
from .problems import ProblemInstance
from .regret import RegretReport, per

VALUE_RANGE_TOL = 1e-6


class ConvergenceError(RuntimeError):
    """Challenger generation exceeded its iteration cap; with exact solves
    this cannot happen, so it signals a numerically broken backend."""


@dataclass(frozen=True)
class ChallengerSet:
    """Ordered set of distinct solutions (distinct decision vectors)."""

    members: tuple[Solution, ...]

    def __post_init__(self):
        keys = [m.decision_key() for m in self.members]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate decision vectors in challenger set")

    @staticmethod
    def from_solutions(solutions) -> "ChallengerSet":
        seen, members = set(), []
        for s in solutions:
            k = s.decision_key()
            if k not in seen:
                seen.add(k)
                members.append(s)
        return ChallengerSet(tuple(members))

    def __contains__(self, solution: Solution) -> bool:
        key = solution.decision_key()
        return any(m.decision_key() == key for m in self.members)

    def add(self, solution: Solution) -> "ChallengerSet":
        return ChallengerSet(self.members + (solution,))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def _center_value_coeffs(instance: ProblemInstance, weights: ClusteredSample) -> np.ndarray:
    """Coefficients phi[c] such that f_c(solution) = phi[c] . decision."""
    return weights.centers_matrix @ instance.performance_matrix


def _check_unit_range(values: np.ndarray, what: str):
    if np.any(values < -VALUE_RANGE_TOL) or np.any(values > 1.0 + VALUE_RANGE_TOL):
        raise ValueError(f"{what} outside [0, 1]: the indicator linearization needs unit range")


def build_mer_model(
    x: Solution, instance: ProblemInstance, weights: ClusteredSample
) -> MilpModel:
    """Separation program: maximize the expected regret of the fixed solution
    x over all feasible challengers.

    Variables: the challenger's decision vector (first), then per center one
    indicator b_c (worth 1 exactly when the challenger beats x there) and one
    product variable p_c standing for b_c times the challenger's value.
    """
    instance.validate_normalized()
    k = len(weights)
    phi = _center_value_coeffs(instance, weights)
    fx = weights.centers_matrix @ x.performance
    _check_unit_range(fx, "f_c(x)")
    maximize_sense = instance.sense is OptimizationSense.MAXIMIZE

    builder = ModelBuilder(maximize=True)
    y_idx = [builder.add_binary(f"y{j}") for j in range(instance.num_decision_vars)]
    instance.add_decision_constraints(builder, y_idx)

    objective: dict[int, float] = {}
    for c in range(k):
        b = builder.add_binary(f"b{c}")
        p = builder.add_continuous(f"p{c}")
        mover = {j: float(v) for j, v in zip(y_idx, phi[c])}
        if maximize_sense:
            # b_c <= f_c(y) - f_c(x) + 1 and b_c >= f_c(y) - f_c(x)
            builder.add_le({b: 1.0, **_neg(mover)}, 1.0 - fx[c])
            builder.add_ge({b: 1.0, **_neg(mover)}, -fx[c])
        else:
            # b_c <= f_c(x) - f_c(y) + 1 and b_c >= f_c(x) - f_c(y)
            builder.add_le({b: 1.0, **mover}, 1.0 + fx[c])
            builder.add_ge({b: 1.0, **mover}, fx[c])
        # p_c = b_c * f_c(y): p <= b, p <= f_c(y), p >= b + f_c(y) - 1
        builder.add_le({p: 1.0, b: -1.0}, 0.0)
        builder.add_le({p: 1.0, **_neg(mover)}, 0.0)
        builder.add_ge({p: 1.0, b: -1.0, **_neg(mover)}, -1.0)
        rho = float(weights.proportions[c])
        if maximize_sense:
            objective[p] = rho
            objective[b] = -rho * float(fx[c])
        else:
            objective[b] = rho * float(fx[c])
            objective[p] = -rho
    builder.set_objective(objective)
    return builder.build()


def mer(
    x: Solution,
    instance: ProblemInstance,
    weights: ClusteredSample,
    backend: MilpBackend,
    time_limit: float | None = None,
) -> tuple[float, Solution]:
    """Max expected regret of x over the full feasible set, with the
    maximizing challenger extracted from the model's decision variables."""
    model = build_mer_model(x, instance, weights)
    result = backend.solve(model, time_limit)
    decision = np.round(result.x[: instance.num_decision_vars]).astype(np.int8)
    return result.objective, instance.solution(decision)


def build_restricted_mmer_model(
    A: ChallengerSet, instance: ProblemInstance, weights: ClusteredSample
) -> MilpModel:
    """Restricted minimax program: choose a feasible incumbent minimizing the
    worst expected regret against the finite challenger set A.

    The incumbent's decision vector comes first, then the epigraph variable t,
    then per (center, challenger) the indicator and product variables. Here
    the product variable stands for the indicator times the *incumbent's*
    value, since the challengers are fixed.
    """
    if len(A) == 0:
        raise ValueError("challenger set must be non-empty")
    instance.validate_normalized()
    k = len(weights)
    phi = _center_value_coeffs(instance, weights)
    maximize_sense = instance.sense is OptimizationSense.MAXIMIZE

    builder = ModelBuilder(maximize=False)
    x_idx = [builder.add_binary(f"x{j}") for j in range(instance.num_decision_vars)]
    instance.add_decision_constraints(builder, x_idx)
    t = builder.add_continuous("t", lb=-np.inf)

    for yi, y in enumerate(A):
        fy = weights.centers_matrix @ y.performance
        _check_unit_range(fy, "f_c(y)")
        t_row: dict[int, float] = {t: 1.0}
        for c in range(k):
            b = builder.add_binary(f"b{c}_y{yi}")
            p = builder.add_continuous(f"p{c}_y{yi}")
            mover = {j: float(v) for j, v in zip(x_idx, phi[c])}
            if maximize_sense:
                # b <= f_c(y) - f_c(x) + 1 and b >= f_c(y) - f_c(x)
                builder.add_le({b: 1.0, **mover}, 1.0 + fy[c])
                builder.add_ge({b: 1.0, **mover}, fy[c])
            else:
                # b <= f_c(x) - f_c(y) + 1 and b >= f_c(x) - f_c(y)
                builder.add_le({b: 1.0, **_neg(mover)}, 1.0 - fy[c])
                builder.add_ge({b: 1.0, **_neg(mover)}, -fy[c])
            # p = b * f_c(x)
            builder.add_le({p: 1.0, b: -1.0}, 0.0)
            builder.add_le({p: 1.0, **_neg(mover)}, 0.0)
            builder.add_ge({p: 1.0, b: -1.0, **_neg(mover)}, -1.0)
            rho = float(weights.proportions[c])
            if maximize_sense:
                # t >= sum_c rho_c (b f_c(y) - p)
                t_row[b] = -rho * float(fy[c])
                t_row[p] = rho
            else:
                # t >= sum_c rho_c (p - b f_c(y))
                t_row[p] = -rho
                t_row[b] = rho * float(fy[c])
        builder.add_ge(t_row, 0.0)
    builder.set_objective({t: 1.0})
    return builder.build()


def build_restricted_mmer_model_compact(
    A: ChallengerSet, instance: ProblemInstance, weights: ClusteredSample
) -> MilpModel:
    """Equivalent restricted minimax program without indicator variables.

    Because the restricted program *minimizes* the hinge terms
    max{0, f_c(y) - f_c(x)}, each one is exactly the epigraph of a convex
    piecewise-linear function of the incumbent: a continuous h >= 0 with
    h >= f_c(y) - f_c(x) suffices, and the optimizer pushes every h that
    matters down onto the hinge. Optimal value and optimal incumbents are
    identical to the indicator formulation, but the LP relaxation is tight
    in h, leaving only the incumbent's own binaries to branch on. This is
    what the alternation solves by default; the indicator formulation
    remains available and is tested to agree.
    """
    if len(A) == 0:
        raise ValueError("challenger set must be non-empty")
    instance.validate_normalized()
    k = len(weights)
    phi = _center_value_coeffs(instance, weights)
    maximize_sense = instance.sense is OptimizationSense.MAXIMIZE

    builder = ModelBuilder(maximize=False)
    x_idx = [builder.add_binary(f"x{j}") for j in range(instance.num_decision_vars)]
    instance.add_decision_constraints(builder, x_idx)
    t = builder.add_continuous("t", lb=-np.inf)

    for yi, y in enumerate(A):
        fy = weights.centers_matrix @ y.performance
        _check_unit_range(fy, "f_c(y)")
        t_row: dict[int, float] = {t: 1.0}
        for c in range(k):
            h = builder.add_continuous(f"h{c}_y{yi}")
            mover = {j: float(v) for j, v in zip(x_idx, phi[c])}
            if maximize_sense:
                # h >= f_c(y) - f_c(x)  (and h >= 0 from its bound)
                builder.add_ge({h: 1.0, **mover}, fy[c])
            else:
                # h >= f_c(x) - f_c(y)
                builder.add_ge({h: 1.0, **_neg(mover)}, -fy[c])
            t_row[h] = -float(weights.proportions[c])
        builder.add_ge(t_row, 0.0)
    builder.set_objective({t: 1.0})
    return builder.build()


_RESTRICTED_BUILDERS = {
    "compact": build_restricted_mmer_model_compact,
    "indicator": build_restricted_mmer_model,
}


def mmer(
    instance: ProblemInstance,
    A_init: ChallengerSet,
    weights: ClusteredSample,
    backend: MilpBackend,
    time_limit: float | None = None,
    max_iterations: int = 200,
    callback=None,
    dump_dir: str | None = None,
    formulation: str = "compact",
) -> RegretReport:
    """Minimax expected regret over the implicit feasible set by alternating
    the restricted program with challenger separation.

    Each round solves the restricted program for an incumbent, separates its
    best challenger, and stops when that challenger is already in the set
    (compared by exact decision vectors). ``callback(round, restricted_value,
    separation_value, challenger)`` exposes the per-round bounds; ``dump_dir``
    writes each program in LP format for debugging.
    """
    A = A_init if isinstance(A_init, ChallengerSet) else ChallengerSet.from_solutions(A_init)
    if len(A) == 0:
        raise ValueError("challenger set must be non-empty")
    build_restricted = _RESTRICTED_BUILDERS[formulation]
    for k in range(max_iterations):
        model_a = build_restricted(A, instance, weights)
        if dump_dir is not None:
            write_lp(model_a, os.path.join(dump_dir, f"restricted_mmer_{k:03d}.lp"))
        result = backend.solve(model_a, time_limit)
        decision = np.round(result.x[: instance.num_decision_vars]).astype(np.int8)
        x_a = instance.solution(decision)
        mmer_a = result.objective

        model_mer = build_mer_model(x_a, instance, weights)
        if dump_dir is not None:
            write_lp(model_mer, os.path.join(dump_dir, f"mer_{k:03d}.lp"))
        mer_result = backend.solve(model_mer, time_limit)
        y_hat = instance.solution(
            np.round(mer_result.x[: instance.num_decision_vars]).astype(np.int8)
        )
        if callback is not None:
            callback(k, mmer_a, mer_result.objective, y_hat)
        if y_hat in A:
            return RegretReport(mmer_a, x_a, y_hat)
        A = A.add(y_hat)
    raise ConvergenceError(
        f"challenger generation did not converge within {max_iterations} iterations"
    )


def _neg(coeffs: dict[int, float]) -> dict[int, float]:
    return {j: -v for j, v in coeffs.items()}
