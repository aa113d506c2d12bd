from __future__ import annotations

import pytest

from sl2ext.core import DimCache

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def fresh_cache() -> DimCache:
    return DimCache()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0].split("-")[1])):
        terminalreporter.write_line(line)
