import numpy as np
import pytest

from rigidcrlb.intensity import Normal
from rigidcrlb.scenario import table3_scenario


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def cube_distance():
    """Reference cube scenario, complete range graph, sigma = 0.1 m."""
    return table3_scenario("distance", noise=Normal(0.1))


# -- acceptance report -----------------------------------------------------
# tests/test_acceptance.py appends one line per criterion; they are echoed
# in the terminal summary so they survive output capturing.

acceptance_lines = pytest.StashKey[list]()


@pytest.fixture
def acceptance_report(request):
    lines = request.config.stash.setdefault(acceptance_lines, [])

    def record(line):
        print(line)
        lines.append(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(acceptance_lines, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
