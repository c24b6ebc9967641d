import pytest
from hypothesis import HealthCheck, settings

from lancaster_lab import MarginalSpec, build_model

settings.register_profile(
    "lancaster",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lancaster")


@pytest.fixture(scope="session")
def uniform01():
    return MarginalSpec("uniform", (0.0, 1.0))


@pytest.fixture(scope="session")
def beta23():
    return MarginalSpec("beta", (0.0, 1.0), (2.0, 3.0))


@pytest.fixture(scope="session")
def triangle_table():
    return MarginalSpec("table", (0.0, 2.0), ((0.0, 1.0, 2.0), (0.0, 1.0, 0.0)))


@pytest.fixture(scope="session")
def ce_model(uniform01):
    """The headline model: uniform marginals, rho = (0.05, 0.15)."""
    return build_model(uniform01, uniform01, (0.05, 0.15))


@pytest.fixture(scope="session")
def swapped_model(uniform01):
    """Same coefficients with the maximum at degree 1: rho = (0.15, 0.05)."""
    return build_model(uniform01, uniform01, (0.15, 0.05))


@pytest.fixture(scope="session")
def trivial_regression_model(uniform01):
    """rho_1 = 0 kills both regression slopes while R stays 0.15."""
    return build_model(uniform01, uniform01, (0.0, 0.15))


@pytest.fixture(scope="session")
def independence_model(uniform01):
    return build_model(uniform01, uniform01, (0.0,))
