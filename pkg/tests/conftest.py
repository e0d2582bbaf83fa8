import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("HYPOTHESIS_MAX_EXAMPLES", 25)),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, title, checks)``.

    ``checks`` is a list of ``(label, ok, detail)``.  The line is printed in
    the terminal summary; the test itself then fails on any failed check.
    """

    def record(number, title, checks):
        ok = all(c[1] for c in checks)
        failed = [f"{label}: {detail}" for label, good, detail in checks if not good]
        _CRITERIA[number] = (title, ok, len(checks), failed)
        assert ok, "; ".join(failed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, n, failed = _CRITERIA[number]
        status = "PASS" if ok else "FAIL"
        passed = n - len(failed)
        terminalreporter.write_line(f"criterion {number:2d} {status}  {title}  ({passed}/{n} checks)")
        for f in failed:
            terminalreporter.write_line(f"    failed {f}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
