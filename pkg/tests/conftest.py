from __future__ import annotations

from pathlib import Path

import pytest

from eel.pipeline import compile_source, execute
from eel.vm import VmConfig

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"

_criteria: dict[str, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    name = report.nodeid.split("::")[-1]
    if name.startswith("test_criterion_"):
        title = name[len("test_criterion_"):].split("[")[0]
        outcome, total = _criteria.get(title, ("PASS", 0.0))
        if not report.passed:
            outcome = "FAIL"
        _criteria[title] = (outcome, total + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for title, (outcome, duration) in sorted(_criteria.items()):
        number, _, name = title.partition("_")
        terminalreporter.write_line(f"{outcome}  criterion {number}: {name.replace('_', ' ')} ({duration:.2f}s)")


@pytest.fixture
def run_program():
    """Compile and run source text, returning (compilation, result)."""

    def go(source: str, w: int = 16, inputs: dict | None = None, **config):
        comp = compile_source(source, word_width=w)
        return comp, execute(comp.low, VmConfig(word_width=w, **config), inputs)

    return go
