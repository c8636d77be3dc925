import numpy as np
import pytest

from nlsbeat.harness.scenarios import normal_form

# lines collected by test_acceptance, echoed in the terminal summary
CRITERIA = {}


@pytest.fixture(scope="session")
def nf20():
    """(P, chi, Z4) for p=1, sign=+1, a=2, b=0 at N=20."""
    return normal_form(1, 1, 2, 0, 20)


@pytest.fixture(scope="session")
def nf8():
    return normal_form(1, 1, 2, 0, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[k])
