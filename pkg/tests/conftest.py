import pytest

from seasurrogate import kernels
from seasurrogate.harness.dataset import build_dataset

ACCEPTANCE_LINES = []


@pytest.fixture(params=kernels.available())
def backend(request):
    """Run a test once per available kernel backend."""
    previous = kernels.backend()
    kernels.use(request.param)
    yield request.param
    kernels.use(previous.NAME)


@pytest.fixture(scope="session")
def small_catamaran():
    """Three short catamaran realisations, the last held out."""
    return build_dataset(None, "catamaran-2dof", 3, 600, seeds=[101, 102, 103], num_test=1)


@pytest.fixture
def report_line():
    """Record a criterion verdict; printed again in the terminal summary."""

    def record(line):
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
