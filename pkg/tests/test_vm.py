from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from eel.backend import parse_low
from eel.errors import VmError
from eel.pipeline import compile_source, execute
from eel.vm import (Machine, VmConfig, alu, enumerate_image, instruction_cost, pointer_invariants_hold, run,
                    trunc_div, unsigned, wrap)

words8 = st.integers(-128, 127)


def low(text: str):
    return parse_low(text)


def run_low(text: str, w: int = 8, inputs=None, **config):
    program = low(text)
    return program, run(program, VmConfig(word_width=w, **config), inputs)


# -- arithmetic -----------------------------------------------------------------


@pytest.mark.parametrize("value, w, expected", [(127, 8, 127), (128, 8, -128), (-129, 8, 127), (16, 4, 0)])
def test_wrap(value, w, expected):
    assert wrap(value, w) == expected


@pytest.mark.parametrize("a, b, q", [(7, 2, 3), (-7, 2, -3), (7, -2, -3), (-7, -2, 3)])
def test_division_truncates_toward_zero(a, b, q):
    assert trunc_div(a, b) == q


@given(words8, words8)
def test_add_sub_invert(a, b):
    assert alu("SUB", 8, alu("ADD", 8, (a, b))) == (a, b)


@given(words8, st.integers(-64, 63).map(lambda k: 2 * k + 1))
def test_mult_multinv_invert(a, k):
    assert alu("MULTINV", 8, alu("MULT", 8, (a, k))) == (a, k)


@given(words8, words8, words8, st.sampled_from(["*", "<=", ">=", "!=", "=="]))
def test_acc_unacc_invert(t, a, b, sel):
    assert alu("UNACC", 8, alu("ACC", 8, (t, a, b), sel), sel) == (t, a, b)


def test_even_multiplier_is_an_error():
    with pytest.raises(VmError) as info:
        alu("MULT", 8, (3, 2))
    assert info.value.code == "E_MULT_NONINVERTIBLE"


@given(words8)
def test_unsigned_round_trip(v):
    assert wrap(unsigned(v, 8), 8) == v


# -- costs ----------------------------------------------------------------------


@pytest.mark.parametrize("op, model, expected", [
    ("MOVE", "paper", 8.0), ("MOVE", "entropy", 8.0),
    ("AND", "paper", 8.0), ("OR", "entropy", 8 * math.log2(4 / 3)),
    ("ADD", "paper", 0.0), ("CMFRM", "paper", 0.0), ("LPUSH", "entropy", 0.0),
])
def test_instruction_cost(op, model, expected):
    assert instruction_cost(op, VmConfig(word_width=8, cost_model=model)) == pytest.approx(expected)


@pytest.mark.parametrize("op, injective", [("SWAP", True), ("NEG", True), ("ACC", True),
                                           ("MOVE", False), ("OR", False)])
def test_enumeration_at_small_width(op, injective):
    assert enumerate_image(op, 3).injective is injective


def test_or_at_one_bit():
    # [DERIVED] three of four input pairs give 1
    assert enumerate_image("OR", 1).cost == pytest.approx(math.log2(4 / 3))


def test_unlogged_overwrite_costs_w():
    _, result = run_low(".data x\n    MOVE(x, 5)\n    HALT\n", w=16)
    assert result.ledger.total_energy == 16
    assert result.state.variables(low(".data x\n    HALT\n")) == {"x": 5}


# -- stack and log --------------------------------------------------------------


def test_push_pop_move_and_swap():
    program, result = run_low(".data x y\n    PUSH(x)\n    POP(y)\n    HALT\n", inputs={"x": 9})
    assert result.state.variables(program) == {"x": 0, "y": 9}
    assert result.state.sp == program.stack_base


def test_log_round_trip_restores_everything():
    text = ".data x b\n    LPUSH(x)\n    LPUSHBIT(b)\n    LPOPBIT(b)\n    LPOP(x)\n    HALT\n"
    program, result = run_low(text, inputs={"x": -3, "b": 1})
    assert result.state.variables(program) == {"x": -3, "b": 1}
    assert result.state.lp == 0
    assert result.ledger.total_pushed == 9 and result.ledger.peak == 9 and result.ledger.occupancy == 0


@pytest.mark.parametrize("value, bits", [(0, 0), (1, 1), (7, 3), (10, 4), (-1, 8)])
def test_tight_accounting_counts_significant_bits(value, bits):
    _, result = run_low(".data x\n    LPUSH(x)\n    HALT\n", inputs={"x": value}, log_accounting="tight")
    assert result.ledger.total_pushed == bits


@pytest.mark.parametrize("text, code", [
    (".data x y\n    LPUSH(x)\n    ADD(x, 1)\n    LPOP(x)\n    HALT\n", "E_LPOP_NONZERO_DEST"),
    (".data x y\n    PUSH(x)\n    ADD(y, 1)\n    POP(y)\n    HALT\n", "E_POP_NONZERO_DEST"),
    (".data x\n    ADD(x, 3)\n    LPUSHBIT(x)\n    HALT\n", "E_BIT_RANGE"),
    (".data x\n    MULT(x, 4)\n    HALT\n", "E_MULT_NONINVERTIBLE"),
    (".data x y\n    ACC(/, x, y, 0)\n    HALT\n", "E_DIV_ZERO"),
    (".data x\n    POP(x)\n    HALT\n", "E_SEGMENT"),
])
def test_runtime_errors(text, code):
    with pytest.raises(VmError) as info:
        run_low(text, step_limit=1000)
    assert info.value.code == code


def test_step_limit():
    text = ".data x\nL:\n    CMFRM(M)\n    ADD(x, 1)\nM:\n    GOTO(L)\n"
    with pytest.raises(VmError) as info:
        run_low(text, step_limit=1000, mode="release")
    assert info.value.code == "E_STEP_LIMIT"


def test_stack_overflow():
    text = ".data x\n.stack 1\n    PUSH(x)\n    PUSH(x)\n    HALT\n"
    with pytest.raises(VmError) as info:
        run_low(text)
    assert info.value.code == "E_STACK_OVERFLOW"


def test_word_width_bounds():
    with pytest.raises(ValueError):
        VmConfig(word_width=3)
    with pytest.raises(ValueError):
        VmConfig(word_width=65)


# -- control flow ---------------------------------------------------------------


def test_goto_comefrom_pair():
    text = ".data x\n    ADD(x, 1)\nj:\n    GOTO(t)\n    ADD(x, 100)\nt:\n    CMFRM(j)\n    HALT\n"
    program, result = run_low(text)
    assert result.state.variables(program) == {"x": 1}


def test_comefrom_checks_origin_in_debug_mode():
    # falling into an unconditional landing is not a legal arrival
    text = ".data x\n    ADD(x, 1)\nt:\n    CMFRM(j)\n    HALT\nj:\n    GOTO(t)\n"
    with pytest.raises(VmError) as info:
        run_low(text, mode="debug")
    assert info.value.code == "E_CMFRM_MISMATCH"
    _, result = run_low(text, mode="release")
    assert result.state.halted


def test_trace_lines():
    _, result = run_low(".data x\n    ADD(x, 1)\n    HALT\n", trace=True)
    assert len(result.trace) == 2 and "ADD(x, 1)" in result.trace[0]


def test_pointer_invariants():
    program = low(".data x\n    HALT\n")
    _, result = run_low(".data x\n    HALT\n")
    assert pointer_invariants_hold(result.state, 8)
    assert result.state.sp == program.stack_base


def test_machine_steps_one_instruction_at_a_time():
    program = low(".data x\n    ADD(x, 2)\n    NEG(x)\n    HALT\n")
    m = Machine(program, VmConfig(word_width=8))
    m.step()
    assert m.state.mem[program.layout["x"]] == 2 and m.state.pc == 1
    m.step()
    assert m.state.mem[program.layout["x"]] == -2


@pytest.mark.parametrize("w", [4, 8, 16, 64])
def test_compiled_programs_wrap_at_word_width(w):
    comp = compile_source("x = 1\nFor(i = 0, i != 3, i += 1):\n    x *= 5\n", w)
    result = execute(comp.low, VmConfig(word_width=w))
    assert result.state.variables(comp.low)["x"] == wrap(125, w)


def test_release_and_debug_agree_on_conforming_programs():
    comp = compile_source("k = 4\nLog:\n    While(k != 0):\n        k -= 1\n        s += k\nUnroll\n", 16)
    a = execute(comp.low, VmConfig(word_width=16, mode="debug"))
    b = execute(comp.low, VmConfig(word_width=16, mode="release"))
    assert a.state.mem == b.state.mem
    assert a.ledger.to_dict() == b.ledger.to_dict()
