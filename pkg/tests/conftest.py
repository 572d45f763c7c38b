import datetime as dt

import numpy as np
import pytest

from pitesg import _kernels_py, synthdata
from pitesg.marketdata import align_and_backfill

try:
    from pitesg import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BACKENDS = [pytest.param(_kernels_py, id="python")]
BACKENDS.append(pytest.param(_kernels_c, id="cython", marks=pytest.mark.skipif(_kernels_c is None,
                                                                                reason="extension not built")))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def market_series():
    return synthdata.synthetic_market(dt.date(2000, 1, 3), dt.date(2012, 12, 31), seed=0)


@pytest.fixture(scope="session")
def market_panel(market_series):
    return align_and_backfill(*market_series)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


KERNEL_NAMES = ("garch_filter", "garch_loglik", "ar1_loglik", "garch_simulate", "dense_forward",
                "dense_backward", "adam_update", "acf")


@pytest.fixture
def use_backend(backend, monkeypatch):
    """Route every dispatched kernel through ``backend`` for the duration of a test."""
    from pitesg import kernels

    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(backend, name))
    return backend


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion and fail the test on FAIL."""

    def record(label: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} [{label}] {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("[")[1].split("]")[0].rstrip("abc"))):
            terminalreporter.write_line(line)
