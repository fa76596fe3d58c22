"""Gaussian belief over criterion weights and its update from binary
comparison answers.

A yes/no answer only says which side of a hyperplane the weight vector lies
on, which has no Gaussian conjugate. Conjugacy is restored by a latent
utility-difference variable z = w.d + eps whose sign the answer fixes: the
belief is updated by mixing the conjugate linear-regression posteriors over
sign-consistent draws of z (data augmentation) and summarizing the mixture
as a single Gaussian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import truncnorm

from .model import WeightVector


@dataclass(frozen=True)
class GaussianState:
    """Mean and covariance of the current density over weight space."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ValueError("mean must be (n,), covariance (n, n)")
        if not np.allclose(cov, cov.T, atol=1e-9):
            raise ValueError("covariance must be symmetric")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance must be positive definite")

    @property
    def n(self) -> int:
        return self.mean.size

    @staticmethod
    def flat_prior(n: int, mean_value: float = 10.0, variance: float = 100.0) -> "GaussianState":
        """The rather-flat default prior N(mean_value * 1, variance * I)."""
        return GaussianState(np.full(n, mean_value), variance * np.eye(n))


@dataclass(frozen=True)
class Answer:
    """A recorded comparison answer: a = 1 means 'yes, x is at least as good
    as y', and d is the performance difference u(x) - u(y) of the pair."""

    query_index: int
    a: int
    d: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d", np.asarray(self.d, dtype=float))
        if self.a not in (0, 1):
            raise ValueError("a must be 0 or 1")


@dataclass(frozen=True)
class ResponseNoise:
    """Standard deviation of the Gaussian noise on the latent utility
    difference; 0 models a perfectly reliable decision maker."""

    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")


def sample_weights(state: GaussianState, count: int, rng_seed: int) -> list[WeightVector]:
    """Draw from the Gaussian and push each draw onto the simplex (negatives
    clamped to zero, then renormalized; all-nonpositive draws are redrawn)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    out: list[WeightVector] = []
    for _ in range(1000):
        draws = rng.multivariate_normal(state.mean, state.covariance, size=count - len(out))
        for row in draws:
            clamped = np.maximum(row, 0.0)
            total = clamped.sum()
            if total <= 1e-12:
                continue  # redraw
            out.append(WeightVector(clamped / total))
        if len(out) == count:
            return out
    raise ValueError("state places essentially no mass on the non-negative orthant")


def _truncated_normal_draws(
    loc: float, scale: float, a: int, rng: np.random.Generator, size: int | None = None
):
    """Inverse-CDF draws from N(loc, scale^2) restricted to the half-line the
    answer allows: [0, inf) for a = 1, (-inf, 0) for a = 0."""
    lo, hi = (0.0, np.inf) if a == 1 else (-np.inf, 0.0)
    u = rng.random(size)
    u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)  # ppf(0) is the open endpoint
    z = truncnorm.ppf(u, (lo - loc) / scale, (hi - loc) / scale, loc=loc, scale=scale)
    if a == 1:
        return np.maximum(z, 0.0)
    return np.minimum(z, -np.finfo(float).tiny)


def sample_truncated_latent(
    w: WeightVector | np.ndarray, d: np.ndarray, a: int, sigma: float,
    rng: np.random.Generator,
) -> float:
    """One draw of the latent utility difference: N(w.d, sigma) truncated to
    z >= 0 when the answer was yes, z < 0 otherwise (inverse-CDF sampling)."""
    w_arr = w.components if isinstance(w, WeightVector) else np.asarray(w, dtype=float)
    loc = float(w_arr @ d)
    if sigma == 0.0:
        consistent = loc >= 0.0 if a == 1 else loc < 0.0
        if not consistent:
            raise ValueError("deterministic evidence inconsistent with the answer")
        return loc
    return float(_truncated_normal_draws(loc, sigma, a, rng))


def posterior_given_latent(
    state: GaussianState, d: np.ndarray, z: float, sigma: float
) -> GaussianState:
    """Conjugate update for one observation z = w.d + eps, eps ~ N(0, sigma^2).

    Rank-one form of the Bayesian linear-regression update:
        S = sigma^2 + d' Sigma d
        mu'    = mu + Sigma d (z - d' mu) / S
        Sigma' = Sigma - (Sigma d)(Sigma d)' / S
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d = np.asarray(d, dtype=float)
    cov_d = state.covariance @ d
    s = sigma**2 + float(d @ cov_d)
    mean = state.mean + cov_d * (z - float(d @ state.mean)) / s
    cov = state.covariance - np.outer(cov_d, cov_d) / s
    cov = 0.5 * (cov + cov.T)
    return GaussianState(mean, cov)


def update(
    state: GaussianState,
    answer: Answer,
    sigma: float,
    iterations: int = 10,
    m: int = 50,
    rng_seed: int = 0,
) -> GaussianState:
    """Posterior after one answer, by latent data augmentation.

    Draws ``iterations`` batches of m latent utility differences consistent
    with the answer, forms the equal-weight mixture of the conjugate
    posteriors p(w|z_j), and moment-matches that mixture to one Gaussian.

    The answer-conditioned latent has a closed half-line-truncated normal
    distribution: conditioning on the answer restricts the sign of z, and the
    per-weight truncation normalizers cancel against the answer likelihood,
    leaving z | a ~ N(d'mu, sigma^2 + d'Sigma d) truncated to the answer's
    half-line. Sampling z there directly (instead of re-tilting weight draws
    sweep after sweep) keeps every batch exact, so error is pure Monte Carlo
    and shrinks with iterations * m.
    """
    if m < 1 or iterations < 1:
        raise ValueError("need m >= 1 and iterations >= 1")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(rng_seed)
    d = answer.d
    if not np.any(d):
        return state

    # Conjugate components share one covariance and have means affine in z,
    # so the mixture moments reduce to the moments of the z draws.
    cov_d = state.covariance @ d
    s = sigma**2 + float(d @ cov_d)
    gain = cov_d / s
    prior_loc = float(d @ state.mean)
    component_cov = state.covariance - np.outer(cov_d, cov_d) / s

    zs = _truncated_normal_draws(prior_loc, np.sqrt(s), answer.a, rng, size=iterations * m)
    mean = state.mean + gain * (zs.mean() - prior_loc)
    cov = component_cov + zs.var() * np.outer(gain, gain)
    return GaussianState(mean, 0.5 * (cov + cov.T))


def simulate_answer(
    w_hidden: WeightVector, d: np.ndarray, sigma: float, rng: np.random.Generator
) -> int:
    """Answer of a simulated decision maker with true weights w_hidden:
    1 iff w.d + eps >= 0, with eps ~ N(0, sigma^2); sigma = 0 is noiseless."""
    z = float(w_hidden.components @ np.asarray(d, dtype=float))
    if sigma > 0.0:
        z += sigma * rng.standard_normal()
    return 1 if z >= 0.0 else 0
