"""The incremental decision loop: sample weights from the current belief,
cluster them, pick the minimax-expected-regret incumbent and its best
challenger, ask the decision maker, update the belief, repeat until the
regret drops below a fraction of its initial value or the query budget runs
out.

The loop is split into two primitives so an interactive caller (the HTTP
service) can pause at the question: ``advance`` computes the next query or
finishes, ``apply_answer`` feeds one answer back. ``step`` and ``run`` wire
them together with a DecisionMaker for programmatic use.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Protocol

import numpy as np

from .bayes import Answer, GaussianState, sample_weights, simulate_answer, update
from .clustering import cluster
from .milp import MilpBackend
from .model import OptimizationSense, Solution, WeightVector, aggregate, utility_difference
from .problems import ProblemInstance, optimize_scalarized
from .regret import RegretReport
from .regret_milp import ChallengerSet, mmer


class DegenerateScoreError(ValueError):
    """The score denominator vanished (optimal value at the reference
    weights makes the ratio undefined)."""


@dataclass(frozen=True)
class SessionConfig:
    """Tunables of one elicitation session."""

    sample_size: int = 100
    cluster_count: int = 20
    max_queries: int = 15
    stop_fraction: float = 0.1
    sigma_model: float = 0.05
    rng_seed: int = 0
    update_iterations: int = 10
    update_draws: int = 50
    prior_mean: float = 10.0
    prior_variance: float = 100.0

    def __post_init__(self):
        if not self.sample_size >= self.cluster_count >= 1:
            raise ValueError("need sample_size >= cluster_count >= 1")
        if self.max_queries < 0:
            raise ValueError("max_queries must be >= 0")
        if not 0.0 < self.stop_fraction <= 1.0:
            raise ValueError("stop_fraction must be in (0, 1]")
        if self.sigma_model <= 0.0:
            raise ValueError("sigma_model must be positive (0 breaks the latent draws)")


@dataclass(frozen=True)
class QueryRecord:
    query_index: int
    x: Solution
    y: Solution
    answer: int
    posterior_mean: np.ndarray  # belief mean right after this answer's update


@dataclass(frozen=True)
class SessionState:
    """Everything a session carries between queries. Immutable: every
    transition returns a fresh state, so a failed solve leaves the old one
    intact."""

    posterior: GaussianState
    history: tuple[QueryRecord, ...] = ()
    challenger_set: ChallengerSet | None = None
    current: RegretReport | None = None
    pending: tuple[Solution, Solution] | None = None
    initial_mmer: float | None = None
    finished: bool = False
    recommendation: Solution | None = None
    iteration: int = 0
    trace: tuple[RegretReport, ...] = ()

    @property
    def query_count(self) -> int:
        return len(self.history)


class DecisionMaker(Protocol):
    def answer(self, x: Solution, y: Solution) -> int:
        """1 if x is preferred over y, else 0."""
        ...


class SimulatedDecisionMaker:
    """Answers from a hidden weight vector through the noisy sign model;
    keeps count of how often noise flipped the true comparison."""

    def __init__(self, hidden: WeightVector, sigma: float, rng_seed: int = 0):
        self.hidden = hidden
        self.sigma = sigma
        self.rng = np.random.default_rng(rng_seed)
        self.asked = 0
        self.wrong = 0

    def answer(self, x: Solution, y: Solution) -> int:
        d = utility_difference(x, y)
        a = simulate_answer(self.hidden, d, self.sigma, self.rng)
        truth = 1 if float(self.hidden.components @ d) >= 0.0 else 0
        self.asked += 1
        self.wrong += int(a != truth)
        return a


def derive_seed(*parts: int) -> int:
    """Deterministic 64-bit child seed from integer parts (seed-sequence
    fan-out, so independent streams never overlap)."""
    entropy = [p & 0xFFFFFFFFFFFFFFFF for p in parts]
    state = np.random.SeedSequence(entropy).generate_state(2)
    return (int(state[0]) << 32) | int(state[1])


_SAMPLE, _CLUSTER, _UPDATE = 0, 1, 2


def new_session(instance: ProblemInstance, config: SessionConfig) -> SessionState:
    prior = GaussianState.flat_prior(
        instance.n, config.prior_mean, config.prior_variance
    )
    return SessionState(posterior=prior)


def advance(
    state: SessionState,
    instance: ProblemInstance,
    config: SessionConfig,
    backend: MilpBackend,
) -> SessionState:
    """Run one sample/cluster/minimax round: either finishes the session or
    leaves a pending query pair to be answered."""
    if state.finished:
        raise ValueError("session already finished")
    if state.pending is not None:
        raise ValueError("pending query must be answered before advancing")

    i = state.iteration
    sample = sample_weights(
        state.posterior, config.sample_size, derive_seed(config.rng_seed, i, _SAMPLE)
    )
    weights = cluster(sample, config.cluster_count, derive_seed(config.rng_seed, i, _CLUSTER))
    challengers = ChallengerSet.from_solutions(
        optimize_scalarized(instance, c, backend) for c in weights.centers
    )
    generated: list[Solution] = []
    report = mmer(
        instance,
        challengers,
        weights,
        backend,
        callback=lambda _k, _ma, _mx, y_hat: generated.append(y_hat),
    )
    final_set = ChallengerSet.from_solutions([*challengers, *generated])

    initial = state.initial_mmer if state.initial_mmer is not None else report.value
    done = report.value <= config.stop_fraction * initial or state.query_count >= config.max_queries
    return replace(
        state,
        challenger_set=final_set,
        current=report,
        pending=None if done else (report.argmin_solution, report.best_challenger),
        initial_mmer=initial,
        finished=done,
        recommendation=report.argmin_solution if done else None,
        iteration=i + 1,
        trace=state.trace + (report,),
    )


def apply_answer(
    state: SessionState,
    config: SessionConfig,
    a: int,
) -> SessionState:
    """Record the answer to the pending query and update the posterior."""
    if state.finished:
        raise ValueError("session already finished")
    if state.pending is None:
        raise ValueError("no pending query to answer")
    if a not in (0, 1):
        raise ValueError("answer must be 0 or 1")
    x, y = state.pending
    index = state.query_count
    answer = Answer(query_index=index, a=a, d=utility_difference(x, y))
    posterior = update(
        state.posterior,
        answer,
        config.sigma_model,
        iterations=config.update_iterations,
        m=config.update_draws,
        rng_seed=derive_seed(config.rng_seed, index, _UPDATE),
    )
    return replace(
        state,
        posterior=posterior,
        history=state.history + (QueryRecord(index, x, y, a, posterior.mean),),
        pending=None,
    )


def step(
    state: SessionState,
    instance: ProblemInstance,
    config: SessionConfig,
    backend: MilpBackend,
    dm: DecisionMaker,
) -> SessionState:
    """One full loop iteration: compute the query, ask, update. May finish
    the session instead of asking."""
    state = advance(state, instance, config, backend)
    if state.finished:
        return state
    x, y = state.pending
    return apply_answer(state, config, dm.answer(x, y))


def run(
    instance: ProblemInstance,
    config: SessionConfig,
    backend: MilpBackend,
    dm: DecisionMaker,
) -> tuple[Solution, list[RegretReport]]:
    """Full session against a decision maker; returns the recommendation and
    the per-round regret reports (one more report than answered queries)."""
    state = new_session(instance, config)
    while not state.finished:
        state = step(state, instance, config, backend, dm)
    return state.recommendation, list(state.trace)


def trace_records(state: SessionState) -> list[dict]:
    """JSON-serializable session trace: one record per round with the regret
    value and the compared pair, joined with the answer and the post-update
    belief mean once the round has been answered."""
    records = []
    for i, report in enumerate(state.trace):
        record: dict = {
            "round": i,
            "mmer": report.value,
            "incumbent_performance": report.argmin_solution.performance.tolist(),
            "challenger_performance": report.best_challenger.performance.tolist(),
        }
        if i < len(state.history):
            answered = state.history[i]
            record["answer"] = answered.answer
            record["posterior_mean"] = answered.posterior_mean.tolist()
        records.append(record)
    return records


def score(
    x_star: Solution,
    w_hidden: WeightVector,
    instance: ProblemInstance,
    backend: MilpBackend,
    x_best: Solution | None = None,
) -> float:
    """Recommendation quality under the hidden weights: value ratio against
    the true optimum for maximization, and the complementary-cost ratio
    (1 - f) / (1 - f_opt) for minimization. 1.0 means optimal.

    ``x_best`` short-circuits the reference optimum when the caller already
    solved it (scoring every query of a session needs it once, not per row).
    """
    if x_best is None:
        x_best = optimize_scalarized(instance, w_hidden, backend)
    f_star = aggregate(w_hidden, x_star)
    f_best = aggregate(w_hidden, x_best)
    if instance.sense is OptimizationSense.MAXIMIZE:
        if f_best == 0.0:
            raise DegenerateScoreError("optimum value is 0 under the hidden weights")
        return f_star / f_best
    if 1.0 - f_best == 0.0:
        raise DegenerateScoreError("optimum cost is 1 under the hidden weights")
    return (1.0 - f_star) / (1.0 - f_best)


def hidden_weight(n: int, rng_seed: int) -> WeightVector:
    """A hidden preference for the simulation protocol: a uniformly random
    canonical basis vector."""
    if n < 2:
        raise ValueError("need n >= 2")
    k = int(np.random.default_rng(rng_seed).integers(n))
    return WeightVector.basis(n, k)
