from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from eskg.engine.auth import AuthTable
from eskg.engine.engine import SupportEngine
from eskg.fixtures import seed_abstract_kg, seed_corpus


class TickingClock:
    """Deterministic minute-granularity clock for engine tests."""

    def __init__(self, start: datetime | None = None):
        self.now = start or datetime(2024, 3, 1, 10, 0, tzinfo=timezone.utc)

    def __call__(self) -> datetime:
        current = self.now
        self.now = self.now + timedelta(minutes=1)
        return current


@pytest.fixture
def abstract():
    return seed_abstract_kg()


@pytest.fixture
def corpus():
    return seed_corpus()


@pytest.fixture
def clock():
    return TickingClock()


@pytest.fixture
def engine(abstract, corpus, clock):
    return SupportEngine(abstract, corpus, clock=clock)


@pytest.fixture
def engine_factory(clock):
    def build(auth: AuthTable | None = None, sink=None, clock_=None):
        return SupportEngine(
            seed_abstract_kg(), seed_corpus(), auth=auth, clock=clock_ or clock, sink=sink
        )

    return build


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {name}")
