import pytest

from eolink import devices


@pytest.fixture(scope="session")
def felix():
    return devices.felix()


@pytest.fixture(scope="session")
def albert():
    return devices.albert()


def pytest_terminal_summary(terminalreporter):
    from tests.acceptance_report import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
