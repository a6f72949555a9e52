import pytest

from sphbif.oracle import SphereGrid
from sphbif.reduction import reduce


@pytest.fixture(scope="session")
def reduction():
    return reduce()


@pytest.fixture(scope="session")
def grid16():
    return SphereGrid(16)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
