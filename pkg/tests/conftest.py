import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CRITERIA: dict[int, str] = {}


@pytest.fixture
def report():
    """report(number, ok, detail) records one acceptance line; the summary prints them in order."""

    def rec(num: int, ok: bool, detail: str = "") -> None:
        _CRITERIA[num] = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_CRITERIA[num])

    return rec


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[k])
