import pytest

from mixed_platoon.models import CaccParams, OvmParams, equilibrium_from_velocity, linearize


@pytest.fixture(scope="session")
def ovm():
    return OvmParams()


@pytest.fixture(scope="session")
def cacc():
    return CaccParams()


@pytest.fixture(scope="session")
def eq(ovm):
    return equilibrium_from_velocity(ovm, 15.0)


@pytest.fixture(scope="session")
def coeffs(ovm, eq):
    return linearize(ovm, eq)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
