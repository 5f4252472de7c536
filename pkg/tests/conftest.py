import pytest
from hypothesis import HealthCheck, settings

from shuntdamp.scenario import load_scenario
from shuntdamp.simulator import TWO_PI, tune_optimal_oracle

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def narrow_scenario():
    return load_scenario("narrow_2khz")


@pytest.fixture(scope="session")
def broad_scenario():
    return load_scenario("broad_band")


@pytest.fixture(scope="session")
def narrow_optimum(narrow_scenario):
    return tune_optimal_oracle(narrow_scenario, TWO_PI * 2000.0)
