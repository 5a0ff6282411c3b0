import numpy as np
import pytest

from epictrl import ModelParams, reference_scenario
from epictrl.objectives import default_seed
from helpers import EXAMPLE_PARAMS


@pytest.fixture
def example_params():
    return ModelParams(**EXAMPLE_PARAMS)


@pytest.fixture
def rng():
    return np.random.default_rng(default_seed())


@pytest.fixture(scope="session")
def reference():
    return reference_scenario()


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
