"""Intermediate level: jumps, labels and log-region markers.

High level control flow is lowered into protected jumps (which re-evaluate
a backward condition when reversed) and general jumps (which log one bit at
their label).  ``Log`` blocks become ``LogBegin``/``LogEnd`` markers and each
``Unroll`` names the regions it reverses, most recent first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from . import frontend as hl
from .errors import LoweringError, ParseError
from .frontend import BinOp, Const, Expr, TokenKind, Var, expr_vars, format_expr, tokenize

# ---------------------------------------------------------------------------
# statements


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CompoundAssign:
    target: str
    op: str
    expr: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PGoto:
    label: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PGotoIf:
    fwd: Expr
    bwd: Expr
    label: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PGotoIfN:
    fwd: Expr
    bwd: Expr
    label: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PLabel:
    label: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Goto:
    label: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class GotoIf:
    cond: Expr
    label: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class GotoIfN:
    cond: Expr
    label: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Label:
    label: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LogBegin:
    region: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LogEnd:
    region: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unroll:
    regions: tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LogPush:
    var: str
    line: int = field(default=0, compare=False)


IrStmt = Union[Assign, CompoundAssign, PGoto, PGotoIf, PGotoIfN, PLabel, Goto, GotoIf, GotoIfN,
               Label, Call, LogBegin, LogEnd, Unroll, LogPush]

PROTECTED_JUMPS = (PGoto, PGotoIf, PGotoIfN)
GENERAL_JUMPS = (Goto, GotoIf, GotoIfN)
JUMPS = PROTECTED_JUMPS + GENERAL_JUMPS
LABELS = (PLabel, Label)


@dataclass(frozen=True)
class Def:
    name: str
    params: tuple[str, ...]
    body: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class IrProgram:
    functions: tuple[Def, ...]
    body: tuple


@dataclass
class UnrollPlan:
    """Which regions each Unroll reverses, and what each region contains.

    Keys are ``(scope, index)`` where scope is a function name or ``None``
    for the main body and index is the statement position in that body.
    """

    unrolls: dict[tuple[str | None, int], tuple[str, ...]]
    regions: dict[str, tuple[str | None, tuple[int, ...]]]

    def unroll_of(self, region: str) -> tuple[str | None, int]:
        for key, regions in self.unrolls.items():
            if region in regions:
                return key
        raise KeyError(region)


def stmt_vars(s: IrStmt) -> list[str]:
    """Variables a statement mentions, in order."""
    if isinstance(s, (Assign, CompoundAssign)):
        return [s.target] + [v for v in expr_vars(s.expr) if v != s.target]
    if isinstance(s, (PGotoIf, PGotoIfN)):
        return list(dict.fromkeys(expr_vars(s.fwd) + expr_vars(s.bwd)))
    if isinstance(s, (GotoIf, GotoIfN)):
        return expr_vars(s.cond)
    if isinstance(s, Call):
        return list(dict.fromkeys(s.args))
    if isinstance(s, LogPush):
        return [s.var]
    return []


def is_unconditional(s: IrStmt) -> bool:
    """True if control never falls through ``s``."""
    if isinstance(s, (Goto, PGoto)):
        return True
    if isinstance(s, (PGotoIf, GotoIf)):
        cond = s.fwd if isinstance(s, PGotoIf) else s.cond
        return isinstance(cond, Const) and cond.value != 0
    if isinstance(s, (PGotoIfN, GotoIfN)):
        cond = s.fwd if isinstance(s, PGotoIfN) else s.cond
        return isinstance(cond, Const) and cond.value == 0
    return False


# ---------------------------------------------------------------------------
# lowering from the high level

TRUE = Const(1)


class _Lowerer:
    def __init__(self, program: hl.HighProgram, implicit_unroll: bool) -> None:
        self.implicit_unroll = implicit_unroll
        self.n_labels = 0
        self.n_regions = 0
        self.n_counters = 0
        self.arity: dict[str, int] = {}
        for s in program.body:
            if isinstance(s, hl.Def):
                if s.name in self.arity:
                    raise LoweringError("E_SYNTAX", f"function {s.name} defined twice", s.line)
                self.arity[s.name] = len(s.params)

    def label(self) -> str:
        self.n_labels += 1
        return f"L{self.n_labels}"

    def lower(self, program: hl.HighProgram) -> IrProgram:
        functions = []
        main = [s for s in program.body if not isinstance(s, hl.Def)]
        for s in program.body:
            if isinstance(s, hl.Def):
                functions.append(Def(s.name, s.params, tuple(self.block(s.body, s.line)), line=s.line))
        body = self.block(tuple(main), main[-1].line if main else 0)
        return IrProgram(tuple(functions), tuple(body))

    def block(self, stmts: tuple, end_line: int) -> list:
        out: list = []
        pending: list[str] = []
        for s in stmts:
            if isinstance(s, hl.LogBlock):
                self.n_regions += 1
                r = f"r{self.n_regions}"
                out.append(LogBegin(r, line=s.line))
                out.extend(self.block(s.body, s.body[-1].line))
                out.append(LogEnd(r, line=s.line))
                pending.append(r)
            elif isinstance(s, hl.Unroll):
                # an Unroll with nothing pending is skipped
                if pending:
                    out.append(Unroll(tuple(reversed(pending)), line=s.line))
                    pending.clear()
            else:
                out.extend(self.statement(s))
        if pending:
            if not self.implicit_unroll:
                raise LoweringError("E_LOG_NOT_UNROLLED",
                                    f"log region(s) {', '.join(pending)} not unrolled before block end",
                                    end_line)
            line = stmts[-1].line if stmts else end_line
            out.append(Unroll(tuple(reversed(pending)), line=line))
        return out

    def statement(self, s) -> list:
        if isinstance(s, hl.Assign):
            return [Assign(s.target, s.expr, line=s.line)]
        if isinstance(s, hl.CompoundAssign):
            return [CompoundAssign(s.target, s.op, s.expr, line=s.line)]
        if isinstance(s, hl.LogPush):
            return [LogPush(s.var, line=s.line)]
        if isinstance(s, hl.Call):
            if s.name not in self.arity:
                raise LoweringError("E_UNKNOWN_FXN", f"call to undefined function {s.name}", s.line)
            if self.arity[s.name] != len(s.args):
                raise LoweringError(
                    "E_ARITY", f"{s.name} takes {self.arity[s.name]} argument(s), got {len(s.args)}", s.line)
            return [Call(s.name, s.args, line=s.line)]
        if isinstance(s, hl.PIf):
            return self.protected_conditional(s)
        if isinstance(s, hl.If):
            return self.general_conditional(s)
        if isinstance(s, hl.PFor):
            return self.protected_for(s)
        if isinstance(s, (hl.For, hl.While)):
            return self.general_for(s)
        if isinstance(s, hl.Def):
            raise LoweringError("E_SYNTAX", "function definitions are only allowed at top level", s.line)
        raise TypeError(s)  # pragma: no cover

    def protected_conditional(self, s: hl.PIf) -> list:
        line = s.line
        then = self.block(s.then, s.line)
        if s.orelse is None:
            end = self.label()
            return [PGotoIfN(s.cond, s.cond, end, line=line), *then, PLabel(end, line=line)]
        orelse = self.block(s.orelse, s.line)
        other, end = self.label(), self.label()
        return [
            PGotoIfN(s.cond, s.cond, other, line=line),
            *then,
            PGotoIf(TRUE, s.cond, end, line=line),
            PLabel(other, line=line),
            *orelse,
            PLabel(end, line=line),
        ]

    def general_conditional(self, s: hl.If) -> list:
        line = s.line
        then = self.block(s.then, s.line)
        if s.orelse is None:
            end = self.label()
            return [GotoIfN(s.cond, end, line=line), *then, Label(end, line=line)]
        orelse = self.block(s.orelse, s.line)
        other, end = self.label(), self.label()
        return [
            GotoIfN(s.cond, other, line=line),
            *then,
            Goto(end, line=line),
            Label(other, line=line),
            *orelse,
            Label(end, line=line),
        ]

    def protected_for(self, s: hl.PFor) -> list:
        init, incr = s.init, s.incr
        x = init.target
        if not isinstance(init, hl.Assign) or incr.target != x or x in expr_vars(init.expr):
            raise LoweringError("E_PFOR_INIT_FORM",
                                "protected for needs a single assignment to the loop variable as init",
                                s.line)
        line = s.line
        start, end = self.label(), self.label()
        moved = BinOp("!=", Var(x, line=line), init.expr, line=line)
        return [
            *self.statement(init),
            PLabel(start, line=line),
            PGotoIfN(s.cond, s.cond, end, line=line),
            *self.block(s.body, s.line),
            *self.statement(incr),
            PGotoIf(moved, moved, start, line=line),
            PLabel(end, line=line),
        ]

    def general_for(self, s: hl.For | hl.While) -> list:
        line = s.line
        self.n_counters += 1
        counter = f"%l{self.n_counters}"
        start, end = self.label(), self.label()
        looping = BinOp("!=", Var(counter, line=line), Const(0, line=line), line=line)
        init = self.statement(s.init) if isinstance(s, hl.For) else []
        incr = self.statement(s.incr) if isinstance(s, hl.For) else []
        # the counter cell is reserved and zero on entry, so `l = 0` needs no code
        return [
            *init,
            PLabel(start, line=line),
            PGotoIfN(s.cond, s.cond, end, line=line),
            *self.block(s.body, s.line),
            *incr,
            CompoundAssign(counter, "+", Const(1, line=line), line=line),
            PGotoIf(looping, looping, start, line=line),
            PLabel(end, line=line),
            LogPush(counter, line=line),
        ]


def lower_high_to_ir(program: hl.HighProgram, implicit_unroll: bool = True) -> tuple[IrProgram, UnrollPlan]:
    """Lower a parsed program to the intermediate level."""
    ir = _Lowerer(program, implicit_unroll).lower(program)
    return ir, validate_ir(ir)


def lower_protected_conditional(stmt: hl.PIf) -> list:
    return _Lowerer(hl.HighProgram(()), True).protected_conditional(stmt)


def lower_general_conditional(stmt: hl.If) -> list:
    return _Lowerer(hl.HighProgram(()), True).general_conditional(stmt)


def lower_protected_for(stmt: hl.PFor) -> list:
    return _Lowerer(hl.HighProgram(()), True).protected_for(stmt)


def lower_general_for(stmt: hl.For | hl.While) -> list:
    return _Lowerer(hl.HighProgram(()), True).general_for(stmt)


# ---------------------------------------------------------------------------
# validation


def validate_ir(ir: IrProgram) -> UnrollPlan:
    """Check label pairing, region structure and calls; return the unroll plan."""
    arity = {}
    for f in ir.functions:
        if f.name in arity:
            raise LoweringError("E_SYNTAX", f"function {f.name} defined twice", f.line)
        arity[f.name] = len(f.params)
    plan = UnrollPlan({}, {})
    for f in ir.functions:
        _validate_body(f.body, f.name, arity, plan)
    _validate_body(ir.body, None, arity, plan)
    return plan


def _validate_body(body: tuple, scope: str | None, arity: dict[str, int], plan: UnrollPlan) -> None:
    jumps: dict[str, IrStmt] = {}
    labels: dict[str, IrStmt] = {}
    for s in body:
        if isinstance(s, JUMPS):
            if s.label in jumps:
                raise LoweringError("E_UNPAIRED_LABEL", f"label {s.label} has more than one jump", s.line)
            jumps[s.label] = s
        elif isinstance(s, LABELS):
            if s.label in labels:
                raise LoweringError("E_UNPAIRED_LABEL", f"label {s.label} defined twice", s.line)
            labels[s.label] = s
        elif isinstance(s, Call):
            if s.name not in arity:
                raise LoweringError("E_UNKNOWN_FXN", f"call to undefined function {s.name}", s.line)
            if arity[s.name] != len(s.args):
                raise LoweringError("E_ARITY", f"{s.name} takes {arity[s.name]} argument(s)", s.line)
    for name, j in jumps.items():
        lab = labels.get(name)
        if lab is None:
            raise LoweringError("E_UNPAIRED_LABEL", f"jump to missing label {name}", j.line)
        if isinstance(j, PROTECTED_JUMPS) != isinstance(lab, PLabel):
            raise LoweringError("E_UNPAIRED_LABEL", f"jump and label {name} are of different classes", j.line)
    for name, lab in labels.items():
        if name not in jumps:
            raise LoweringError("E_UNPAIRED_LABEL", f"label {name} has no jump", lab.line)

    open_regions: list[tuple[str, int]] = []
    closed: dict[str, tuple[int, int, int]] = {}  # region -> (begin, end, depth)
    members: dict[str, list[int]] = {}
    reversed_by: dict[str, tuple[str | None, int]] = {}
    for i, s in enumerate(body):
        for r, _ in open_regions:
            members[r].append(i)
        if isinstance(s, LogBegin):
            if s.region in members or s.region in closed:
                raise LoweringError("E_SYNTAX", f"region {s.region} opened twice", s.line)
            open_regions.append((s.region, i))
            members[s.region] = []
        elif isinstance(s, LogEnd):
            if not open_regions or open_regions[-1][0] != s.region:
                raise LoweringError("E_SYNTAX", f"LogEnd({s.region}) does not close the innermost region",
                                    s.line)
            r, begin = open_regions.pop()
            members[r].pop()  # the LogEnd itself
            closed[r] = (begin, i, len(open_regions))
        elif isinstance(s, Unroll):
            last_begin = None
            for r in s.regions:
                if r not in closed:
                    raise LoweringError("E_UNROLL_OUTSIDE", f"Unroll names region {r} which is not closed "
                                        "in this body", s.line)
                if r in reversed_by:
                    raise LoweringError("E_UNROLL_OUTSIDE", f"region {r} is unrolled twice", s.line)
                begin, _, depth = closed[r]
                if depth != len(open_regions) or (open_regions and begin < open_regions[-1][1]):
                    raise LoweringError("E_UNROLL_OUTSIDE", f"region {r} is unrolled outside its block", s.line)
                if last_begin is not None and begin > last_begin:
                    raise LoweringError("E_UNROLL_ORDER", "Unroll must list regions most recent first", s.line)
                last_begin = begin
                reversed_by[r] = (scope, i)
            plan.unrolls[(scope, i)] = s.regions
    if open_regions:
        raise LoweringError("E_SYNTAX", f"region {open_regions[-1][0]} is never closed")
    for r in closed:
        if r not in reversed_by:
            raise LoweringError("E_LOG_NOT_UNROLLED", f"region {r} is never unrolled",
                                body[closed[r][0]].line)
        plan.regions[r] = (scope, tuple(members[r]))


# ---------------------------------------------------------------------------
# text form


def format_stmt(s: IrStmt) -> str:
    if isinstance(s, Assign):
        return f"{s.target} = {format_expr(s.expr)}"
    if isinstance(s, CompoundAssign):
        return f"{s.target} {s.op}= {format_expr(s.expr)}"
    if isinstance(s, PGoto):
        return f"PGoto({s.label})"
    if isinstance(s, PGotoIf):
        return f"PGotoIf({format_expr(s.fwd)}, {format_expr(s.bwd)}, {s.label})"
    if isinstance(s, PGotoIfN):
        return f"PGotoIfN({format_expr(s.fwd)}, {format_expr(s.bwd)}, {s.label})"
    if isinstance(s, PLabel):
        return f"PLabel({s.label})"
    if isinstance(s, Goto):
        return f"Goto({s.label})"
    if isinstance(s, GotoIf):
        return f"GotoIf({format_expr(s.cond)}, {s.label})"
    if isinstance(s, GotoIfN):
        return f"GotoIfN({format_expr(s.cond)}, {s.label})"
    if isinstance(s, Label):
        return f"Label({s.label})"
    if isinstance(s, Call):
        return f"Call {s.name}({', '.join(s.args)})"
    if isinstance(s, LogBegin):
        return f"LogBegin({s.region})"
    if isinstance(s, LogEnd):
        return f"LogEnd({s.region})"
    if isinstance(s, Unroll):
        return f"Unroll({', '.join(s.regions)})"
    if isinstance(s, LogPush):
        return f"LogPush({s.var})"
    raise TypeError(s)  # pragma: no cover


def print_ir(ir: IrProgram) -> str:
    lines = []
    for f in ir.functions:
        lines.append(f"Def {f.name}({', '.join(f.params)}):")
        lines.extend("    " + format_stmt(s) for s in f.body)
    lines.extend(format_stmt(s) for s in ir.body)
    return "\n".join(lines) + ("\n" if lines else "")


def ir_lines(ir: IrProgram) -> dict[tuple[str | None, int], int]:
    """Line of every statement in :func:`print_ir` output, keyed by (scope, index)."""
    out = {}
    n = 0
    for f in ir.functions:
        n += 1
        out[(f.name, -1)] = n
        for i in range(len(f.body)):
            n += 1
            out[(f.name, i)] = n
    for i in range(len(ir.body)):
        n += 1
        out[(None, i)] = n
    return out


class _IrLineParser(hl._Parser):
    def stmt(self) -> IrStmt | tuple:
        tok = self.peek()
        assert tok is not None
        head, line = tok.lexeme, tok.line
        if tok.kind is TokenKind.KEYWORD and head == "Def":
            self.i += 1
            name = self.expect(TokenKind.IDENT).lexeme
            params = self.name_list()
            self.expect(TokenKind.COLON)
            return ("def", name, params, line)
        if tok.kind is TokenKind.KEYWORD and head == "Unroll":
            self.i += 1
            regions: tuple[str, ...] = ()
            if self.at(TokenKind.PAREN, "("):
                regions = self.name_list()
            return Unroll(regions, line=line)
        if tok.kind is TokenKind.KEYWORD and head == "LogPush":
            self.i += 1
            return LogPush(self.one_name(), line=line)
        if tok.kind is TokenKind.IDENT and head == "Call":
            self.i += 1
            name = self.expect(TokenKind.IDENT).lexeme
            return Call(name, self.name_list(), line=line)
        if tok.kind is TokenKind.IDENT and head in _IR_HEADS and self.at(TokenKind.PAREN, "(", 1):
            self.i += 1
            return self.jump_or_marker(head, line)
        return self.assignment_ir()

    def assignment_ir(self):
        s = self.assignment()
        if isinstance(s, hl.Assign):
            return Assign(s.target, s.expr, line=s.line)
        return CompoundAssign(s.target, s.op, s.expr, line=s.line)

    def one_name(self) -> str:
        names = self.name_list()
        if len(names) != 1:
            raise self.fail(("one name",))
        return names[0]

    def jump_or_marker(self, head: str, line: int) -> IrStmt:
        if head in ("PGoto", "PLabel", "Goto", "Label", "LogBegin", "LogEnd"):
            name = self.one_name()
            return _IR_HEADS[head](name, line=line)
        self.expect(TokenKind.PAREN, "(")
        first = self.expression()
        self.expect(TokenKind.OP, ",")
        if head in ("PGotoIf", "PGotoIfN"):
            second = self.expression()
            self.expect(TokenKind.OP, ",")
            label = self.expect(TokenKind.IDENT).lexeme
            self.expect(TokenKind.PAREN, ")")
            return _IR_HEADS[head](first, second, label, line=line)
        label = self.expect(TokenKind.IDENT).lexeme
        self.expect(TokenKind.PAREN, ")")
        return _IR_HEADS[head](first, label, line=line)


_IR_HEADS = {
    "PGoto": PGoto, "PGotoIf": PGotoIf, "PGotoIfN": PGotoIfN, "PLabel": PLabel,
    "Goto": Goto, "GotoIf": GotoIf, "GotoIfN": GotoIfN, "Label": Label,
    "LogBegin": LogBegin, "LogEnd": LogEnd,
}


def parse_ir(text: str, word_width: int = 64, validate: bool = True) -> IrProgram:
    """Parse ``.eir`` text: one statement per line, function bodies indented."""
    text = text.replace("\r\n", "\n")
    functions: list[Def] = []
    body: list = []
    current: tuple | None = None  # (name, params, line, stmts)
    for lineno, raw in enumerate(text.split("\n"), start=1):
        content = raw.split("//", 1)[0]
        if not content.strip():
            continue
        indented = content[0] in " \t"
        toks = tokenize(content.strip(), reserved_names=True)
        toks = [hl.Token(t.kind, t.lexeme, lineno, t.column) for t in toks]
        parser = _IrLineParser(toks, word_width)
        s = parser.stmt()
        if not parser.at(TokenKind.NEWLINE):
            raise parser.fail(("end of line",))
        if isinstance(s, tuple):
            if indented:
                raise ParseError("E_SYNTAX", "function definitions are only allowed at top level", lineno, 1)
            if current is not None:
                functions.append(Def(current[0], current[1], tuple(current[3]), line=current[2]))
            current = (s[1], s[2], s[3], [])
            continue
        if indented:
            if current is None:
                raise ParseError("E_SYNTAX", "indented statement outside a function definition", lineno, 1)
            current[3].append(s)
        else:
            if current is not None:
                functions.append(Def(current[0], current[1], tuple(current[3]), line=current[2]))
                current = None
            body.append(s)
    if current is not None:
        functions.append(Def(current[0], current[1], tuple(current[3]), line=current[2]))
    ir = IrProgram(tuple(functions), tuple(body))
    if validate:
        validate_ir(ir)
    return ir
