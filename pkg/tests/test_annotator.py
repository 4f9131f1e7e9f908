from __future__ import annotations

import json
from dataclasses import replace

import pytest

from eel.annotator import attribute_costs, render_report
from eel.errors import EelError
from eel.pipeline import compile_source, execute
from eel.vm import VmConfig

from conftest import PROGRAMS


def report_for(source: str, w: int = 16, **config):
    comp = compile_source(source, w)
    result = execute(comp.low, VmConfig(word_width=w, **config))
    return comp, result, attribute_costs(result.ledger, comp.low)


def test_fig1_annotations():
    # [PAPER] Fig. 1: logged overwrite costs log space, unlogged overwrite costs energy
    _, _, logged = report_for("Log:\n    x = 1\nUnroll\n", 64)
    assert (logged.lines[2].energy, logged.lines[2].pushed) == (0, 64)
    _, _, unlogged = report_for("x = 1\n", 64)
    assert (unlogged.lines[1].energy, unlogged.lines[1].pushed) == (64, 0)


def test_rendered_text_has_one_annotation_per_costed_line():
    source = (PROGRAMS / "general_if.eel").read_text()
    _, result, report = report_for(source)
    text = render_report(report, source)
    lines = text.splitlines()
    assert lines[0] == "x = 3  // (E=16, L=0)"
    assert lines[2].endswith("// (E=0, L=1)")
    assert lines[3] == "        x -= 2"
    assert lines[-1] == "// totals: E=16 L=1 peak=1 final=0 steps=19 (paper, word)"


def test_json_report():
    source = (PROGRAMS / "while_countdown.eel").read_text()
    _, result, report = report_for(source, log_accounting="tight")
    data = json.loads(render_report(report, source, "json"))
    assert data["log_accounting"] == "tight"
    assert data["totals"]["L_pushed"] == result.ledger.total_pushed
    assert sum(row["L"] for row in data["lines"].values()) == result.ledger.total_pushed


def test_entropy_model_reports_fractions():
    source = "x = 1\n"
    _, _, report = report_for(source, cost_model="entropy")
    assert "(entropy, word)" in render_report(report, source)


@pytest.mark.parametrize("path", sorted(PROGRAMS.glob("*.eel")), ids=lambda p: p.stem)
@pytest.mark.parametrize("accounting", ["word", "tight"])
def test_totals_match_ledger(path, accounting):
    _, result, report = report_for(path.read_text(), log_accounting=accounting)
    assert report.total_energy == result.ledger.total_energy
    assert sum(c.energy for c in report.lines.values()) == result.ledger.total_energy
    assert sum(c.pushed for c in report.ir_lines.values()) == result.ledger.total_pushed
    assert report.dichotomy_exceptions() == []


def test_missing_provenance_is_an_error():
    comp = compile_source("x += 1\n", 16)
    comp.low.instructions[0] = replace(comp.low.instructions[0], line=None)
    result = execute(comp.low, VmConfig(word_width=16))
    with pytest.raises(EelError) as info:
        attribute_costs(result.ledger, comp.low)
    assert info.value.code == "E_MAP_GAP"
