import os

import pytest
from hypothesis import HealthCheck, settings

from skillopt.experiment import build_pipeline
from skillopt.scenario import load_scenario

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def peg_config():
    return load_scenario("peg")


@pytest.fixture(scope="session")
def push_config():
    return load_scenario("push")


@pytest.fixture(scope="session")
def peg_pipeline(peg_config):
    return build_pipeline(peg_config)


@pytest.fixture(scope="session")
def push_pipeline(push_config):
    return build_pipeline(push_config)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
