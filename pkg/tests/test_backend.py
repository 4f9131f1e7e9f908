from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eel import frontend as hl
from eel.backend import (BackendConfig, compile_condition, compile_expression, format_low, line_map_json,
                         pairing_errors, parse_low)
from eel.errors import CompileError
from eel.isa import (ARITY, INVERSE, MIRROR, OPCODES, Cell, Imm, Instruction, Label, emit_reverse, ins, invert,
                     parse_instruction)
from eel.pipeline import compile_source, execute
from eel.vm import VmConfig

from conftest import PROGRAMS
from oracle import interpret


def ops(source: str, w: int = 16) -> list[str]:
    return [str(i) for i in compile_source(source, w).low.instructions]


# -- instruction set ------------------------------------------------------------


def test_every_opcode_has_an_arity():
    assert set(ARITY) == OPCODES


@pytest.mark.parametrize("op", sorted(INVERSE))
def test_inverse_is_an_involution(op):
    assert INVERSE[INVERSE[op]] == op


@pytest.mark.parametrize("op", sorted(MIRROR))
def test_jumps_mirror_landings(op):
    assert MIRROR[MIRROR[op]] == op
    assert op.startswith("GOTO") != MIRROR[op].startswith("GOTO")


@pytest.mark.parametrize("text", [
    "ADD(x, 3)", "SUB(%t0, ref[sp-2])", "MULT(x, -3)", "SWAP(a, b)", "NEG(x)",
    "LPUSH(x)", "LPOPBIT(%c1)", "PUSH(&x)", "PUSH(&ref[sp-3])", "POP(&call1)",
    "ACC(<=, %c1, a, 4)", "UNACC(*, t, a, b)", "GOTOIF(%c2, L1)", "CMFRM(mem[sp-1])",
    "MOVE(x, 0)", "HALT",
])
def test_instruction_text_round_trip(text):
    assert str(parse_instruction(text)) == text


def test_invert_renames_labels():
    jump = Instruction("GOTOIF", (Cell("%c1"), Label("L1.land")), name="L1.j")
    back = invert(jump, "~r1.")
    assert back.op == "CMFRMIF"
    assert back.args == (Cell("%c1"), Label("~r1.L1.land"))
    assert back.name == "~r1.L1.j"


@pytest.mark.parametrize("op", ["MOVE", "AND", "OR"])
def test_irreversible_ops_cannot_be_reversed(op):
    with pytest.raises(CompileError) as info:
        invert(ins(op, Cell("x"), Imm(0)), "~")
    assert info.value.code == "E_IRREVERSIBLE_IN_LOG"


def test_emit_reverse_is_reversed_inverse():
    code = [ins("ADD", Cell("x"), Imm(1)), ins("LPUSH", Cell("y")), ins("MULT", Cell("y"), Imm(3))]
    assert [str(i) for i in emit_reverse(code)] == ["MULTINV(y, 3)", "LPOP(y)", "SUB(x, 1)"]


# -- expressions ----------------------------------------------------------------


def expr(text: str):
    return hl.parse_source(f"t = {text}\n").body[0].expr


def test_expression_uses_add_sub_and_acc():
    code, undo = compile_expression(expr("a * b + c - 2"), Cell("t"))
    assert [str(i) for i in code] == ["ACC(*, t, a, b)", "ADD(t, c)", "SUB(t, 2)"]
    assert [str(i) for i in undo] == ["ADD(t, 2)", "SUB(t, c)", "UNACC(*, t, a, b)"]


def test_nested_operands_use_scratch_cells_and_clean_them():
    code, _ = compile_expression(expr("(a + 1) * (b - 2)"), Cell("t"))
    text = [str(i) for i in code]
    assert text[-2:] == ["SUB(%t0, 1)", "SUB(%t0, a)"]
    assert "ACC(*, t, %t0, %t1)" in text


def test_scratch_limit():
    with pytest.raises(CompileError) as info:
        compile_expression(expr("((a + 1) * 2) * 3"), Cell("t"), max_scratch=1)
    assert info.value.code == "E_SCRATCH_EXHAUSTED"


@pytest.mark.parametrize("text, negate, expected", [
    ("a <= 3", False, ["ACC(<=, c, a, 3)"]),
    ("a <= 3", True, ["ADD(c, 1)", "UNACC(<=, c, a, 3)"]),
    ("a + 1", False, ["ADD(%t0, a)", "ADD(%t0, 1)", "ACC(!=, c, %t0, 0)", "SUB(%t0, 1)", "SUB(%t0, a)"]),
    ("1", True, []),
])
def test_conditions(text, negate, expected):
    code, _ = compile_condition(expr(text), Cell("c"), negate)
    assert [str(i) for i in code] == expected


names = st.sampled_from(["a", "b", "c"])
leaves = st.one_of(names.map(hl.Var), st.integers(-20, 20).map(hl.Const))
arith = st.recursive(
    leaves,
    lambda sub: st.one_of(
        st.builds(hl.BinOp, st.sampled_from(["+", "-", "*", "<=", ">=", "!=", "=="]), sub, sub),
        st.builds(hl.BinOp, st.just("/"), sub, st.sampled_from([-3, -2, 2, 5]).map(hl.Const)),
    ),
    max_leaves=6,
)


@settings(max_examples=150, deadline=None)
@given(arith, st.integers(-128, 127), st.integers(-128, 127), st.integers(-128, 127))
def test_compiled_expressions_match_the_oracle(e, a, b, c):
    # [DERIVED] the direct interpreter is the reference
    source = f"t = {hl.format_expr(e)}\n"
    inputs = {"a": a, "b": b, "c": c}
    comp = compile_source(source, 8)
    result = execute(comp.low, VmConfig(word_width=8), inputs)
    got = result.state.variables(comp.low)
    assert got["t"] == interpret(source, 8, inputs)["t"]
    assert all(v == 0 for n, v in got.items() if n.startswith("%"))


# -- statements -----------------------------------------------------------------


def test_logged_assignment_listing():
    # [PAPER] Fig. 1: the overwritten value goes to the log and comes back
    assert ops("Log:\n    x = 1\nUnroll\n") == ["LPUSH(x)", "ADD(x, 1)", "SUB(x, 1)", "LPOP(x)", "HALT"]


def test_unlogged_assignment_erases():
    assert ops("x = 1\n") == ["MOVE(x, 0)", "ADD(x, 1)", "HALT"]


def test_self_referencing_assignment_swaps_through_a_temp():
    text = ops("Log:\n    x = x * 3 + 1\nUnroll\n")
    assert text[:4] == ["ACC(*, %t0, x, 3)", "ADD(%t0, 1)", "SWAP(x, %t0)", "LPUSH(%t0)"]


def test_multiply_in_place_uses_mult():
    assert ops("x *= 3\n")[0] == "MULT(x, 3)"


def test_logpush_outside_log_erases():
    assert ops("LogPush(x)\n") == ["MOVE(x, 0)", "HALT"]


def test_protected_if_has_no_log_traffic():
    text = ops("Log:\n    PIf(c):\n        y += 1\nUnroll\n")
    assert not any(t.startswith(("LPUSH", "LPOP")) for t in text)


def test_general_merge_logs_one_bit():
    text = ops("Log:\n    If(c):\n        y += 1\nUnroll\n")
    assert sum(t.startswith("LPUSHBIT") for t in text) == 1
    assert sum(t.startswith("LPOPBIT") for t in text) == 1


@pytest.mark.parametrize("path", sorted(PROGRAMS.glob("*.eel")), ids=lambda p: p.stem)
def test_corpus_jumps_pair_up(path):
    assert pairing_errors(compile_source(path.read_text(), 16).low) == []


def test_recursive_function_gets_both_bodies():
    low = compile_source((PROGRAMS / "recursive_countdown.eel").read_text(), 16).low
    assert set(low.functions) == {"down.log", "down.rev"}


def test_plain_body_only_when_called_outside_a_log():
    low = compile_source("Def f(a):\n    a += 1\nf(x)\n", 16).low
    assert set(low.functions) == {"f.plain"}


def test_layout_puts_user_variables_first():
    low = compile_source("Log:\n    b = a * a + 1\n    v2 += 0\nUnroll\n", 16).low
    assert low.user_variables() == ["b", "a", "v2"]
    assert list(low.layout)[:3] == ["b", "a", "v2"]


# -- .elo text ------------------------------------------------------------------


@pytest.mark.parametrize("path", sorted(PROGRAMS.glob("*.eel")), ids=lambda p: p.stem)
def test_low_text_round_trip(path):
    low = compile_source(path.read_text(), 16).low
    text = format_low(low)
    again = parse_low(text, line_map_json(low))
    assert format_low(again) == text
    assert again.line_map == low.line_map
    assert again.layout == low.layout
    a = execute(low, VmConfig(word_width=16))
    b = execute(again, VmConfig(word_width=16))
    assert a.state.mem == b.state.mem
    assert [v.code for v in a.violations] == [v.code for v in b.violations]


def test_segment_sizes_are_configurable():
    low = compile_source("x += 1\n", 16, backend=BackendConfig(stack_size=8, log_size=2)).low
    assert low.memory_size == low.data_size + 10
    assert ".stack 8" in format_low(low)
