import os

import pytest

from potency import _kernels

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(num, summary): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    num, summary = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        prev = _RESULTS.get(num, (True, summary))
        _RESULTS[num] = (prev[0] and rep.passed, summary)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        ok, summary = _RESULTS[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {summary}")


@pytest.fixture(params=["numpy", "numba"])
def backend(request):
    if request.param == "numba" and not _kernels.HAS_NUMBA:
        pytest.skip("numba not importable")
    prev = _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(prev)


@pytest.fixture(scope="session", autouse=True)
def _warm_jit():
    # compile the jitted kernels once so timed tests measure steady state
    if _kernels.HAS_NUMBA and os.environ.get("POTENCY_DISABLE_NUMBA", "0") in ("", "0"):
        import numpy as np

        perm = np.array([1, 0, 2], dtype=np.int64)
        _kernels.orbit_labels(perm)
        _kernels.bfs_distances(np.array([0, 1, 2, 2]), np.array([1, 0]), np.array([0]), 2)
        _kernels.walk_tally(perm[None, :], np.array([0]), np.arange(3), np.arange(3))
