"""Lexer, syntax tree and parser for the high level Eel language.

Blocks are introduced by ``:`` followed by a newline and a deeper indent,
the same way Python does it.  Comments run from ``//`` to end of line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .errors import ParseError, TokenizeError

KEYWORDS = frozenset(
    {"PIf", "If", "Else", "PFor", "For", "While", "Def", "Log", "Unroll", "LogPush"}
)

COMPOUND_OPS = ("+=", "-=", "*=")
ARITH_OPS = ("+", "-", "*", "/")
COMPARE_OPS = ("<=", ">=", "!=", "==")
BINARY_OPS = ARITH_OPS + COMPARE_OPS

_UNICODE_OPS = {"≤": "<=", "≥": ">=", "≠": "!="}

# longest first
_OPERATORS = ("+=", "-=", "*=", "<=", ">=", "!=", "==", "=", "+", "-", "*", "/", ",", "≤", "≥", "≠")

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_RESERVED_IDENT = re.compile(r"%[A-Za-z0-9_.]+|[A-Za-z_][A-Za-z0-9_.]*")
_INT = re.compile(r"[0-9]+")


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    INT = "integer-literal"
    OP = "operator"
    COLON = "colon"
    PAREN = "paren"
    INDENT = "indent"
    DEDENT = "dedent"
    NEWLINE = "newline"
    COMMENT = "comment"

    def __repr__(self) -> str:
        return f"TokenKind.{self.name}"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    column: int


def tokenize(source: str, allow_tabs: bool = False, reserved_names: bool = False) -> list[Token]:
    """Split ``source`` into tokens, synthesizing INDENT/DEDENT pairs.

    ``reserved_names`` admits ``%``-prefixed and dotted identifiers, which
    only the intermediate and low level formats use.
    """
    source = source.replace("\r\n", "\n")
    tokens: list[Token] = []
    indents = [0]
    ident_re = _RESERVED_IDENT if reserved_names else _IDENT
    lines = source.split("\n")
    for lineno, text in enumerate(lines, start=1):
        width = 0
        pos = 0
        while pos < len(text) and text[pos] in " \t":
            if text[pos] == "\t":
                if not allow_tabs:
                    raise TokenizeError("E_TAB_INDENT", "tab in indentation", lineno, pos + 1)
                width = (width // 8 + 1) * 8
            else:
                width += 1
            pos += 1
        rest = text[pos:]
        if not rest or rest.startswith("//"):
            continue

        if width > indents[-1]:
            indents.append(width)
            tokens.append(Token(TokenKind.INDENT, "", lineno, 1))
        elif width < indents[-1]:
            while width < indents[-1]:
                indents.pop()
                tokens.append(Token(TokenKind.DEDENT, "", lineno, 1))
            if width != indents[-1]:
                raise TokenizeError(
                    "E_BAD_INDENT", "dedent does not match any outer indentation level", lineno, pos + 1
                )

        while pos < len(text):
            ch = text[pos]
            col = pos + 1
            if ch in " \t":
                pos += 1
                continue
            if text.startswith("//", pos):
                break
            m = ident_re.match(text, pos)
            if m:
                word = m.group()
                kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT
                tokens.append(Token(kind, word, lineno, col))
                pos = m.end()
                continue
            m = _INT.match(text, pos)
            if m:
                tokens.append(Token(TokenKind.INT, m.group(), lineno, col))
                pos = m.end()
                continue
            if ch == ":":
                tokens.append(Token(TokenKind.COLON, ch, lineno, col))
                pos += 1
                continue
            if ch in "()":
                tokens.append(Token(TokenKind.PAREN, ch, lineno, col))
                pos += 1
                continue
            for op in _OPERATORS:
                if text.startswith(op, pos):
                    tokens.append(Token(TokenKind.OP, _UNICODE_OPS.get(op, op), lineno, col))
                    pos += len(op)
                    break
            else:
                raise TokenizeError("E_BAD_CHAR", f"unrecognized character {ch!r}", lineno, col)
        tokens.append(Token(TokenKind.NEWLINE, "", lineno, len(text) + 1))

    last = len(lines)
    while len(indents) > 1:
        indents.pop()
        tokens.append(Token(TokenKind.DEDENT, "", last, 1))
    return tokens


# ---------------------------------------------------------------------------
# syntax tree

@dataclass(frozen=True)
class Const:
    value: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    line: int = field(default=0, compare=False)


Expr = Union[Const, Var, BinOp]


@dataclass(frozen=True)
class CompoundAssign:
    target: str
    op: str  # one of + - *
    expr: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PIf:
    cond: Expr
    then: tuple
    orelse: tuple | None = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple
    orelse: tuple | None = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PFor:
    init: Assign | CompoundAssign
    cond: Expr
    incr: Assign | CompoundAssign
    body: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class For:
    init: Assign | CompoundAssign
    cond: Expr
    incr: Assign | CompoundAssign
    body: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Def:
    name: str
    params: tuple[str, ...]
    body: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LogBlock:
    body: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unroll:
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LogPush:
    var: str
    line: int = field(default=0, compare=False)


Stmt = Union[CompoundAssign, Assign, PIf, If, PFor, For, While, Def, Call, LogBlock, Unroll, LogPush]


@dataclass(frozen=True)
class HighProgram:
    body: tuple


def expr_vars(expr: Expr) -> list[str]:
    """Variables referenced by ``expr``, in first-occurrence order."""
    out: list[str] = []

    def walk(e: Expr) -> None:
        if isinstance(e, Var):
            if e.name not in out:
                out.append(e.name)
        elif isinstance(e, BinOp):
            walk(e.lhs)
            walk(e.rhs)

    walk(expr)
    return out


# ---------------------------------------------------------------------------
# parser

_PREC = {"<=": 1, ">=": 1, "!=": 1, "==": 1, "+": 2, "-": 2, "*": 3, "/": 3}


class _Parser:
    def __init__(self, tokens: list[Token], word_width: int) -> None:
        self.tokens = tokens
        self.i = 0
        self.lo = -(1 << (word_width - 1))
        self.hi = (1 << (word_width - 1)) - 1

    # token helpers
    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else None

    def at(self, kind: TokenKind, lexeme: str | None = None, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.kind is kind and (lexeme is None or tok.lexeme == lexeme)

    def fail(self, expected: tuple[str, ...], code: str = "E_SYNTAX") -> ParseError:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            return ParseError(code, f"unexpected end of input, expected {' or '.join(expected)}",
                              line, None, expected)
        shown = tok.lexeme or tok.kind.value
        return ParseError(code, f"unexpected {shown!r}, expected {' or '.join(expected)}",
                          tok.line, tok.column, expected)

    def expect(self, kind: TokenKind, lexeme: str | None = None) -> Token:
        if not self.at(kind, lexeme):
            raise self.fail((lexeme or kind.value,))
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    # statements
    def program(self) -> HighProgram:
        body = []
        while self.peek() is not None:
            body.append(self.statement(depth=0, in_log=False))
        return HighProgram(tuple(body))

    def block(self, depth: int, in_log: bool) -> tuple:
        colon = self.expect(TokenKind.COLON)
        if not self.at(TokenKind.NEWLINE):
            raise self.fail(("newline",))
        self.i += 1
        if not self.at(TokenKind.INDENT):
            raise ParseError("E_EMPTY_BLOCK", "block has no statements", colon.line, colon.column)
        self.i += 1
        body = []
        while not self.at(TokenKind.DEDENT):
            if self.peek() is None:
                raise self.fail(("dedent",))
            body.append(self.statement(depth + 1, in_log))
        self.i += 1
        return tuple(body)

    def end_simple(self) -> None:
        if self.peek() is None:
            return
        self.expect(TokenKind.NEWLINE)

    def statement(self, depth: int, in_log: bool) -> Stmt:
        tok = self.peek()
        assert tok is not None
        if tok.kind is TokenKind.KEYWORD:
            kw = tok.lexeme
            if kw in ("PIf", "If"):
                self.i += 1
                cond = self.paren_expr()
                then = self.block(depth, in_log)
                orelse = None
                if self.at(TokenKind.KEYWORD, "Else"):
                    self.i += 1
                    orelse = self.block(depth, in_log)
                node = PIf if kw == "PIf" else If
                return node(cond, then, orelse, line=tok.line)
            if kw in ("PFor", "For"):
                self.i += 1
                self.expect(TokenKind.PAREN, "(")
                init = self.assignment()
                self.expect(TokenKind.OP, ",")
                cond = self.expression()
                self.expect(TokenKind.OP, ",")
                incr = self.assignment()
                self.expect(TokenKind.PAREN, ")")
                body = self.block(depth, in_log)
                node = PFor if kw == "PFor" else For
                return node(init, cond, incr, body, line=tok.line)
            if kw == "While":
                self.i += 1
                cond = self.paren_expr()
                return While(cond, self.block(depth, in_log), line=tok.line)
            if kw == "Def":
                if depth > 0:
                    raise ParseError("E_SYNTAX", "function definitions are only allowed at top level",
                                     tok.line, tok.column, ("statement",))
                self.i += 1
                name = self.expect(TokenKind.IDENT).lexeme
                params = self.name_list()
                if len(set(params)) != len(params):
                    raise ParseError("E_SYNTAX", f"duplicate parameter in {name}", tok.line, tok.column)
                return Def(name, params, self.block(depth, in_log), line=tok.line)
            if kw == "Log":
                self.i += 1
                return LogBlock(self.block(depth, True), line=tok.line)
            if kw == "Unroll":
                self.i += 1
                self.end_simple()
                return Unroll(line=tok.line)
            if kw == "LogPush":
                self.i += 1
                self.expect(TokenKind.PAREN, "(")
                name = self.expect(TokenKind.IDENT).lexeme
                self.expect(TokenKind.PAREN, ")")
                self.end_simple()
                return LogPush(name, line=tok.line)
            raise self.fail(("statement",))
        if tok.kind is TokenKind.IDENT:
            if self.at(TokenKind.PAREN, "(", offset=1):
                self.i += 1
                args = self.name_list()
                self.end_simple()
                return Call(tok.lexeme, args, line=tok.line)
            stmt = self.assignment()
            self.end_simple()
            return stmt
        raise self.fail(("statement",))

    def assignment(self) -> Assign | CompoundAssign:
        name = self.expect(TokenKind.IDENT)
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.OP and tok.lexeme in COMPOUND_OPS:
            self.i += 1
            return CompoundAssign(name.lexeme, tok.lexeme[0], self.expression(), line=name.line)
        if tok is not None and tok.kind is TokenKind.OP and tok.lexeme == "=":
            self.i += 1
            return Assign(name.lexeme, self.expression(), line=name.line)
        raise self.fail(("=", "+=", "-=", "*="))

    def name_list(self) -> tuple[str, ...]:
        self.expect(TokenKind.PAREN, "(")
        names = []
        if not self.at(TokenKind.PAREN, ")"):
            names.append(self.expect(TokenKind.IDENT).lexeme)
            while self.at(TokenKind.OP, ","):
                self.i += 1
                names.append(self.expect(TokenKind.IDENT).lexeme)
        self.expect(TokenKind.PAREN, ")")
        return tuple(names)

    def paren_expr(self) -> Expr:
        self.expect(TokenKind.PAREN, "(")
        e = self.expression()
        self.expect(TokenKind.PAREN, ")")
        return e

    # expressions, precedence climbing with left associativity
    def expression(self, min_prec: int = 1) -> Expr:
        lhs = self.primary()
        while True:
            tok = self.peek()
            if tok is None or tok.kind is not TokenKind.OP or tok.lexeme not in _PREC:
                return lhs
            prec = _PREC[tok.lexeme]
            if prec < min_prec:
                return lhs
            self.i += 1
            rhs = self.expression(prec + 1)
            lhs = BinOp(tok.lexeme, lhs, rhs, line=lhs.line)

    def primary(self) -> Expr:
        tok = self.peek()
        if tok is None:
            raise self.fail(("expression",))
        if tok.kind is TokenKind.INT:
            self.i += 1
            return self.literal(int(tok.lexeme), tok)
        if tok.kind is TokenKind.OP and tok.lexeme == "-" and self.at(TokenKind.INT, offset=1):
            self.i += 2
            return self.literal(-int(self.tokens[self.i - 1].lexeme), tok)
        if tok.kind is TokenKind.IDENT:
            self.i += 1
            return Var(tok.lexeme, line=tok.line)
        if tok.kind is TokenKind.PAREN and tok.lexeme == "(":
            self.i += 1
            e = self.expression()
            self.expect(TokenKind.PAREN, ")")
            return _with_line(e, tok.line)
        raise self.fail(("expression",))

    def literal(self, value: int, tok: Token) -> Const:
        if not self.lo <= value <= self.hi:
            raise ParseError("E_INT_RANGE", f"integer literal {value} does not fit the word width",
                             tok.line, tok.column)
        return Const(value, line=tok.line)


def _with_line(e: Expr, line: int) -> Expr:
    if isinstance(e, BinOp):
        return BinOp(e.op, e.lhs, e.rhs, line=line)
    return e


def parse_high(tokens: list[Token], word_width: int = 64) -> HighProgram:
    """Parse a token stream produced by :func:`tokenize`."""
    parser = _Parser(tokens, word_width)
    return _check_log_nesting(parser.program())


def _check_log_nesting(program: HighProgram) -> HighProgram:
    def walk(body: tuple, direct_log: bool) -> None:
        for s in body:
            if isinstance(s, LogBlock):
                if direct_log:
                    raise ParseError("E_NESTED_LOG", "log block directly inside another log block",
                                     s.line, None)
                walk(s.body, True)
            else:
                for child in _child_blocks(s):
                    walk(child, False)

    walk(program.body, False)
    return program


def _child_blocks(s: Stmt) -> list[tuple]:
    if isinstance(s, (PIf, If)):
        return [s.then] + ([s.orelse] if s.orelse is not None else [])
    if isinstance(s, (PFor, For, While, Def, LogBlock)):
        return [s.body]
    return []


def parse_source(source: str, word_width: int = 64, allow_tabs: bool = False) -> HighProgram:
    return parse_high(tokenize(source, allow_tabs=allow_tabs), word_width)


# ---------------------------------------------------------------------------
# printer

def format_expr(e: Expr, parent: int = 0, right: bool = False) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    prec = _PREC[e.op]
    text = f"{format_expr(e.lhs, prec)} {e.op} {format_expr(e.rhs, prec, True)}"
    if prec < parent or (prec == parent and right):
        return f"({text})"
    return text


def _format_simple(s: Assign | CompoundAssign) -> str:
    if isinstance(s, CompoundAssign):
        return f"{s.target} {s.op}= {format_expr(s.expr)}"
    return f"{s.target} = {format_expr(s.expr)}"


def format_high(program: HighProgram, indent: str = "    ") -> str:
    lines: list[str] = []

    def emit(body: tuple, level: int) -> None:
        pad = indent * level
        for s in body:
            if isinstance(s, (Assign, CompoundAssign)):
                lines.append(pad + _format_simple(s))
            elif isinstance(s, (PIf, If)):
                kw = "PIf" if isinstance(s, PIf) else "If"
                lines.append(f"{pad}{kw}({format_expr(s.cond)}):")
                emit(s.then, level + 1)
                if s.orelse is not None:
                    lines.append(pad + "Else:")
                    emit(s.orelse, level + 1)
            elif isinstance(s, (PFor, For)):
                kw = "PFor" if isinstance(s, PFor) else "For"
                lines.append(f"{pad}{kw}({_format_simple(s.init)}, {format_expr(s.cond)}, "
                             f"{_format_simple(s.incr)}):")
                emit(s.body, level + 1)
            elif isinstance(s, While):
                lines.append(f"{pad}While({format_expr(s.cond)}):")
                emit(s.body, level + 1)
            elif isinstance(s, Def):
                lines.append(f"{pad}Def {s.name}({', '.join(s.params)}):")
                emit(s.body, level + 1)
            elif isinstance(s, Call):
                lines.append(f"{pad}{s.name}({', '.join(s.args)})")
            elif isinstance(s, LogBlock):
                lines.append(pad + "Log:")
                emit(s.body, level + 1)
            elif isinstance(s, Unroll):
                lines.append(pad + "Unroll")
            elif isinstance(s, LogPush):
                lines.append(f"{pad}LogPush({s.var})")
            else:  # pragma: no cover
                raise TypeError(s)

    emit(program.body, 0)
    return "\n".join(lines) + ("\n" if lines else "")
