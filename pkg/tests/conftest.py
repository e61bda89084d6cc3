import numpy as np
import pytest

from airlearn import _fallback

try:
    from airlearn import _kernels
except ImportError:  # extension not built
    _kernels = None

BACKENDS = [pytest.param(_fallback, id="python")]
BACKENDS.append(
    pytest.param(_kernels, id="cython", marks=pytest.mark.skipif(_kernels is None, reason="extension not built"))
)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


ACCEPTANCE_LOG = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LOG:
        terminalreporter.write_line(line)
