import numpy as np
import pytest

from prefelicit.clustering import ClusteredSample
from prefelicit.milp import BranchAndBoundBackend, HighsBackend
from prefelicit.model import WeightVector


@pytest.fixture(scope="session")
def highs():
    return HighsBackend()


@pytest.fixture(scope="session")
def bnb():
    return BranchAndBoundBackend()


@pytest.fixture(scope="session", params=["highs", "bnb"])
def any_backend(request, highs, bnb):
    return {"highs": highs, "bnb": bnb}[request.param]


def random_clustered_sample(n: int, k: int, rng: np.random.Generator) -> ClusteredSample:
    """k random simplex centers with strictly positive proportions summing to 1."""
    centers = tuple(WeightVector.from_raw(rng.uniform(0.05, 1.0, n)) for _ in range(k))
    props = rng.uniform(0.1, 1.0, k)
    props /= props.sum()
    props[-1] = 1.0 - props[:-1].sum()
    return ClusteredSample(centers, props)
