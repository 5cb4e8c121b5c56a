import math

import pytest

from slspectra import BoundaryVector, make_family


@pytest.fixture
def free():
    return make_family("free", omega=1.0)


@pytest.fixture
def example4():
    return make_family("example4", kappa=0.5, c=0.0)


@pytest.fixture
def example4_gap():
    return make_family("example4", kappa=0.5, c=1.0)


@pytest.fixture
def dirichlet():
    """u(0) = 0, (pu')(0) = 1 for the exactly periodic families."""
    return BoundaryVector(0.0, 1.0)


@pytest.fixture
def neumann():
    return BoundaryVector(1.0, 0.0)


def rel(a, b):
    return abs(a - b) / abs(b)


TWO_PI = 2 * math.pi
