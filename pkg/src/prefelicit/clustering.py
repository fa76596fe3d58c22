"""Compression of a weight sample into k-means cluster centers with
occupancy proportions, keeping the downstream MILPs small."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from .model import WeightVector


@dataclass(frozen=True)
class ClusteredSample:
    """Cluster centers on the simplex with the fraction of the original
    sample each one represents."""

    centers: tuple[WeightVector, ...]
    proportions: np.ndarray
    centers_matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        props = np.asarray(self.proportions, dtype=float)
        object.__setattr__(self, "proportions", props)
        if len(self.centers) == 0:
            raise ValueError("need at least one center")
        if props.shape != (len(self.centers),):
            raise ValueError("one proportion per center required")
        if np.any(props <= 0):
            raise ValueError("proportions must be strictly positive")
        if abs(props.sum() - 1.0) > 1e-9:
            raise ValueError(f"proportions sum to {props.sum()}, expected 1")
        object.__setattr__(
            self, "centers_matrix", np.array([c.components for c in self.centers])
        )

    def __len__(self) -> int:
        return len(self.centers)

    @staticmethod
    def single(center: WeightVector) -> "ClusteredSample":
        return ClusteredSample((center,), np.array([1.0]))


def cluster(sample: list[WeightVector], k: int, rng_seed: int) -> ClusteredSample:
    """k-means(++) the sample into at most k centers.

    Centers are re-projected onto the simplex after averaging (floating-point
    drift would otherwise leak out of [0,1]); clusters that end up empty are
    dropped and the proportions renormalized.
    """
    if not sample:
        raise ValueError("empty sample")
    if not 1 <= k <= len(sample):
        raise ValueError(f"need 1 <= k <= {len(sample)}, got {k}")
    points = np.array([w.components for w in sample])
    with warnings.catch_warnings():
        # duplicate sample points can make fewer than k distinct clusters;
        # that case is handled below by dropping empty ones
        warnings.simplefilter("ignore", ConvergenceWarning)
        km = KMeans(n_clusters=k, init="k-means++", n_init=10, max_iter=300,
                    random_state=int(rng_seed) % 2**32)
        labels = km.fit_predict(points)
    counts = np.bincount(labels, minlength=k)
    keep = counts > 0
    centers = tuple(WeightVector.from_raw(c) for c in km.cluster_centers_[keep])
    proportions = counts[keep].astype(float)
    proportions /= proportions.sum()
    return ClusteredSample(centers, proportions)
