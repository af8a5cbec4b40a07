import numpy as np
import pytest

from chaindiff import _backend

try:
    _backend.get_kernels("cython")
    BACKENDS = ["python", "cython"]
except ImportError:
    BACKENDS = ["python"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
