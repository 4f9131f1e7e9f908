from __future__ import annotations

import random

import pytest

from eel import frontend as hl
from eel import midend as ir
from eel.errors import EelError

from conftest import PROGRAMS
from oracle import ProgramGenerator


def lower(source: str, implicit_unroll: bool = True) -> ir.IrProgram:
    return ir.lower_high_to_ir(hl.parse_source(source), implicit_unroll)[0]


def listing(source: str) -> list[str]:
    return ir.print_ir(lower(source)).splitlines()


def test_protected_for_shape():
    assert listing("Log:\n    PFor(i = 0, i != 3, i += 1):\n        s += i\nUnroll\n") == [
        "LogBegin(r1)",
        "i = 0",
        "PLabel(L1)",
        "PGotoIfN(i != 3, i != 3, L2)",
        "s += i",
        "i += 1",
        "PGotoIf(i != 0, i != 0, L1)",
        "PLabel(L2)",
        "LogEnd(r1)",
        "Unroll(r1)",
    ]


def test_general_if_else_shape():
    assert listing("Log:\n    If(c != 0):\n        c -= 1\n    Else:\n        c += 1\nUnroll\n") == [
        "LogBegin(r1)",
        "GotoIfN(c != 0, L1)",
        "c -= 1",
        "Goto(L2)",
        "Label(L1)",
        "c += 1",
        "Label(L2)",
        "LogEnd(r1)",
        "Unroll(r1)",
    ]


def test_protected_if_keeps_condition_for_both_directions():
    lines = listing("Log:\n    PIf(c == 2):\n        y += 1\nUnroll\n")
    assert "PGotoIfN(c == 2, c == 2, L1)" in lines
    assert "PLabel(L1)" in lines


def test_general_loop_counts_iterations_and_logs_the_count():
    lines = listing("Log:\n    While(k != 0):\n        k -= 1\nUnroll\n")
    assert "%l1 += 1" in lines
    assert "PGotoIf(%l1 != 0, %l1 != 0, L1)" in lines
    assert lines.index("LogPush(%l1)") == lines.index("PLabel(L2)") + 1


def test_implicit_unroll_and_strict_mode():
    src = "Log:\n    x = 1\n"
    assert listing(src)[-1] == "Unroll(r1)"
    with pytest.raises(EelError) as info:
        lower(src, implicit_unroll=False)
    assert info.value.code == "E_LOG_NOT_UNROLLED"


def test_unroll_reverses_pending_regions_last_first():
    lines = listing("Log:\n    x = 1\nLog:\n    y = 2\nUnroll\n")
    assert lines[-1] == "Unroll(r2, r1)"


@pytest.mark.parametrize("source, code", [
    ("Def f(a):\n    a += 1\nf(x, y)\n", "E_ARITY"),
    ("g(x)\n", "E_UNKNOWN_FXN"),
    ("PFor(i = 0, i != 3, j += 1):\n    s += 1\n", "E_PFOR_INIT_FORM"),
    ("PFor(i = i + 1, i != 3, i += 1):\n    s += 1\n", "E_PFOR_INIT_FORM"),
])
def test_lowering_errors(source, code):
    with pytest.raises(EelError) as info:
        lower(source)
    assert info.value.code == code


@pytest.mark.parametrize("text, code", [
    ("Goto(L9)\n", "E_UNPAIRED_LABEL"),
    ("Label(L1)\nLabel(L1)\n", "E_UNPAIRED_LABEL"),
    ("Unroll(r1)\n", "E_UNROLL_OUTSIDE"),
    ("LogBegin(r1)\nx = 1\nLogEnd(r1)\nLogBegin(r2)\ny = 1\nLogEnd(r2)\nUnroll(r1, r2)\n", "E_UNROLL_ORDER"),
])
def test_validation_errors(text, code):
    with pytest.raises(EelError) as info:
        ir.parse_ir(text)
    assert info.value.code == code


def test_ir_lines_skip_def_headers():
    program = lower("Def f(a):\n    a += 1\nf(x)\n")
    lines = ir.ir_lines(program)
    assert lines[("f", -1)] == 1 and lines[("f", 0)] == 2 and lines[(None, 0)] == 3


@pytest.mark.parametrize("path", sorted(PROGRAMS.glob("*.eel")), ids=lambda p: p.stem)
def test_corpus_print_parse_round_trip(path):
    program = lower(path.read_text())
    assert ir.parse_ir(ir.print_ir(program)) == program


def test_generated_print_parse_round_trip():
    rng = random.Random(7)
    for _ in range(100):
        g = ProgramGenerator(rng, 16).program()
        program = lower(g.source)
        text = ir.print_ir(program)
        assert ir.parse_ir(text) == program
        assert ir.print_ir(ir.parse_ir(text)) == text
