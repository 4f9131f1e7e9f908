from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eel import frontend as hl
from eel.errors import ParseError, TokenizeError
from eel.frontend import TokenKind


def kinds(source: str) -> list[tuple[str, str]]:
    return [(t.kind.name, t.lexeme) for t in hl.tokenize(source)]


def test_tokenize_logged_increment():
    # the [PAPER] Fig. 1 listing, plus the NEWLINE ending the last line
    assert kinds("Log:\n    x += 1\nUnroll\n") == [
        ("KEYWORD", "Log"), ("COLON", ":"), ("NEWLINE", ""), ("INDENT", ""),
        ("IDENT", "x"), ("OP", "+="), ("INT", "1"), ("NEWLINE", ""), ("DEDENT", ""),
        ("KEYWORD", "Unroll"), ("NEWLINE", ""),
    ]


def test_token_positions():
    toks = hl.tokenize("a = 1\n  // note\nb  -= a\n")
    b = next(t for t in toks if t.lexeme == "b")
    assert (b.line, b.column) == (3, 1)
    op = next(t for t in toks if t.lexeme == "-=")
    assert (op.line, op.column) == (3, 4)


def test_comments_and_blank_lines_are_ignored():
    assert kinds("x = 1 // set\n\n// alone\n") == kinds("x = 1\n")


def test_unicode_operators_normalize():
    assert kinds("c = a ≤ b\nd = a ≠ b\ne = a ≥ b\n") == kinds("c = a <= b\nd = a != b\ne = a >= b\n")


@pytest.mark.parametrize("source, code", [
    ("x = a < b\n", "E_BAD_CHAR"),
    ("x = a > b\n", "E_BAD_CHAR"),
    ("x = 1 $\n", "E_BAD_CHAR"),
    ("Log:\n\tx += 1\n", "E_TAB_INDENT"),
    ("Log:\n    x += 1\n  y += 1\n", "E_BAD_INDENT"),
])
def test_tokenize_errors(source, code):
    with pytest.raises(TokenizeError) as info:
        hl.tokenize(source)
    assert info.value.code == code


def test_tabs_allowed_when_asked():
    toks = hl.tokenize("Log:\n\tx += 1\n", allow_tabs=True)
    assert [t.kind for t in toks][:4] == [TokenKind.KEYWORD, TokenKind.COLON, TokenKind.NEWLINE, TokenKind.INDENT]


@pytest.mark.parametrize("source, code", [
    ("Log:\nx += 1\n", "E_EMPTY_BLOCK"),
    ("x += \n", "E_SYNTAX"),
    ("PIf(x)\n    y += 1\n", "E_SYNTAX"),
    ("x = 200\n", "E_INT_RANGE"),
    ("Log:\n    Log:\n        x += 1\n", "E_NESTED_LOG"),
])
def test_parse_errors(source, code):
    with pytest.raises(ParseError) as info:
        hl.parse_source(source, word_width=8)
    assert info.value.code == code


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as info:
        hl.parse_source("x = 1\ny = (2 + \n")
    assert info.value.line == 2


def test_literal_range_follows_word_width():
    hl.parse_source("x = -128\ny = 127\n", word_width=8)
    with pytest.raises(ParseError):
        hl.parse_source("x = -129\n", word_width=8)


def test_log_nested_through_a_conditional_is_allowed():
    prog = hl.parse_source("Log:\n    PIf(c):\n        Log:\n            x += 1\n")
    assert isinstance(prog.body[0].body[0].then[0], hl.LogBlock)


def test_precedence_and_associativity():
    (s,) = hl.parse_source("x = a - b - c * d == e\n").body
    assert s.expr == hl.BinOp("==", hl.BinOp("-", hl.BinOp("-", hl.Var("a"), hl.Var("b")),
                                              hl.BinOp("*", hl.Var("c"), hl.Var("d"))), hl.Var("e"))


def test_statement_shapes():
    src = (
        "Def f(a, b):\n    a += b\n"
        "PFor(i = 0, i != 3, i += 1):\n    f(x, y)\n"
        "For(j = 0, j <= 2, j += 1):\n    x *= 3\n"
        "While(k != 0):\n    k -= 1\n"
        "If(x == 1):\n    y = 2\nElse:\n    y = 3\n"
        "Log:\n    LogPush(y)\nUnroll\n"
    )
    body = hl.parse_source(src).body
    assert [type(s).__name__ for s in body] == ["Def", "PFor", "For", "While", "If", "LogBlock", "Unroll"]
    assert body[0].params == ("a", "b")
    assert body[1].body[0] == hl.Call("f", ("x", "y"))
    assert body[4].orelse == (hl.Assign("y", hl.Const(3)),)


def test_expr_vars_in_order():
    (s,) = hl.parse_source("x = b + a * b - c\n").body
    assert hl.expr_vars(s.expr) == ["b", "a", "c"]


def test_corpus_round_trips(corpus_sources):
    for name, source in corpus_sources:
        prog = hl.parse_source(source)
        assert hl.parse_source(hl.format_high(prog)) == prog, name


@pytest.fixture
def corpus_sources():
    from conftest import PROGRAMS
    return [(p.name, p.read_text()) for p in sorted(PROGRAMS.glob("*.eel"))]


# -- printer/parser round trip -------------------------------------------------

names = st.sampled_from(["a", "b", "x", "y1"])
leaves = st.one_of(names.map(hl.Var), st.integers(-100, 100).map(hl.Const))
ops = st.sampled_from(["+", "-", "*", "/", "<=", ">=", "!=", "=="])
exprs = st.recursive(leaves, lambda sub: st.builds(hl.BinOp, ops, sub, sub), max_leaves=8)


@settings(max_examples=200)
@given(exprs)
def test_expression_round_trip(e):
    (s,) = hl.parse_source(f"t = {hl.format_expr(e)}\n").body
    assert s.expr == e


@st.composite
def blocks(draw, depth=0):
    n = draw(st.integers(1, 3))
    out = []
    for _ in range(n):
        kind = draw(st.sampled_from(["assign", "compound", "pif", "while", "for"] if depth < 2 else ["assign", "compound"]))
        if kind == "assign":
            out.append(hl.Assign(draw(names), draw(exprs)))
        elif kind == "compound":
            out.append(hl.CompoundAssign(draw(names), draw(st.sampled_from("+-*")), draw(exprs)))
        elif kind == "pif":
            orelse = draw(st.one_of(st.none(), blocks(depth + 1)))
            out.append(hl.PIf(draw(exprs), draw(blocks(depth + 1)), orelse))
        elif kind == "while":
            out.append(hl.While(draw(exprs), draw(blocks(depth + 1))))
        else:
            out.append(hl.For(hl.Assign("i", hl.Const(0)), draw(exprs), hl.CompoundAssign("i", "+", hl.Const(1)),
                              draw(blocks(depth + 1))))
    return tuple(out)


@settings(max_examples=100)
@given(blocks())
def test_program_round_trip(body):
    prog = hl.HighProgram(body)
    assert hl.parse_source(hl.format_high(prog)) == prog
