import numpy as np
import pytest

_RESULTS = pytest.StashKey[dict]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record(request):
    """``record(criterion, ok, detail)`` files one sub-check of an acceptance criterion."""
    store = request.config.stash.setdefault(_RESULTS, {})

    def _record(criterion: int, ok: bool, detail: str):
        store.setdefault(criterion, []).append((bool(ok), detail))

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_RESULTS, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(store):
        checks = store[criterion]
        ok = all(c[0] for c in checks)
        failed = [d for good, d in checks if not good]
        detail = "; ".join(failed) if failed else "; ".join(d for _, d in checks)
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
