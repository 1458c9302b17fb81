import numpy as np
import pytest

from linfchernoff.constructions import build_counterexample
from linfchernoff.distributions import build_distribution


@pytest.fixture
def mu_tri():
    return build_distribution(3, [((0, 1), 1), ((0, 2), 1), ((1, 2), 1)])


@pytest.fixture
def mu_pair():
    return build_distribution(2, [((0,), 1), ((1,), 1)])


@pytest.fixture
def mu_cex42():
    return build_counterexample(4, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
