import numpy as np
import pytest

from strategiq import make_source, make_theta_grid


@pytest.fixture(scope="session")
def unit_source():
    """Unit-variance independent (X, theta): the setting of all reported anchors."""
    return make_source(1.0, 1.0, 0.0)


@pytest.fixture(scope="session")
def grid17(unit_source):
    return make_theta_grid(unit_source, 17, "gauss-hermite")


@pytest.fixture(scope="session")
def grid3(unit_source):
    return make_theta_grid(unit_source, 3, "gauss-hermite")


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
