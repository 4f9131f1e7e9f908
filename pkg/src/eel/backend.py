"""Lower the intermediate level to low level instructions.

Every jump site computes its condition into a dedicated 0/1 cell and
branches on it; every label recovers the same bit on arrival and clears
it.  Protected labels recompute it from the backward condition, general
labels push it to the log (or erase it outside log regions).  Because
each pattern is a mirror image of itself, reversing a region is a plain
instruction-by-instruction inversion.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from . import midend as ir
from .errors import CompileError, ParseError
from .frontend import BinOp, Const, Expr, Var, expr_vars
from .isa import (
    ACC_OPS,
    GOTOS,
    CMFRMS,
    AddrOf,
    Cell,
    Imm,
    Instruction,
    Label,
    Ref,
    Sel,
    Slot,
    emit_reverse,
    ins,
    invert,
    parse_instruction,
)

DEFAULT_SEGMENT = 4096


@dataclass
class BackendConfig:
    stack_size: int = DEFAULT_SEGMENT
    log_size: int = DEFAULT_SEGMENT
    max_scratch: int = 32


@dataclass
class Region:
    """A compiled log region and the code that reverses it (half-open ranges)."""

    key: str
    begin: int
    end: int
    rev_begin: int
    rev_end: int
    variables: tuple[tuple[str, object], ...]
    line: int | None


@dataclass
class LowProgram:
    instructions: list[Instruction]
    labels: dict[str, int]
    layout: dict[str, int]
    entry: int = 0
    stack_size: int = DEFAULT_SEGMENT
    log_size: int = DEFAULT_SEGMENT
    regions: list[Region] = field(default_factory=list)
    # (landing index, index after which the cell must be zero, cell, line)
    protected_checks: list[tuple[int, int, object, int | None]] = field(default_factory=list)
    functions: dict[str, tuple[int, int]] = field(default_factory=dict)
    hooks: dict = field(default_factory=dict)

    @property
    def data_size(self) -> int:
        return len(self.layout)

    @property
    def stack_base(self) -> int:
        return self.data_size

    @property
    def log_base(self) -> int:
        return self.data_size + self.stack_size

    @property
    def memory_size(self) -> int:
        return self.log_base + self.log_size

    @property
    def line_map(self) -> list[tuple[int | None, int | None]]:
        return [(i.line, i.ir_line) for i in self.instructions]

    def user_variables(self) -> list[str]:
        return [n for n in self.layout if not n.startswith("%")]


# ---------------------------------------------------------------------------
# expressions


def _leaf(e: Expr, operand_of) -> object | None:
    if isinstance(e, Const):
        return Imm(e.value)
    if isinstance(e, Var):
        return operand_of(e.name)
    return None


def _temp(depth: int, max_scratch: int) -> Cell:
    if depth >= max_scratch:
        raise CompileError("E_SCRATCH_EXHAUSTED", f"expression needs more than {max_scratch} scratch cells")
    return Cell(f"%t{depth}")


def uncompute(code: list[Instruction]) -> list[Instruction]:
    return [invert(i, "") for i in reversed(code)]


def _compute(e: Expr, target, operand_of, depth: int, max_scratch: int) -> list[Instruction]:
    if isinstance(e, Const):
        return [ins("ADD", target, Imm(e.value))] if e.value else []
    if isinstance(e, Var):
        return [ins("ADD", target, operand_of(e.name))]
    if e.op in ("+", "-"):
        verb = "ADD" if e.op == "+" else "SUB"
        code = _compute(e.lhs, target, operand_of, depth, max_scratch)
        leaf = _leaf(e.rhs, operand_of)
        if leaf is not None:
            if not (isinstance(leaf, Imm) and leaf.value == 0):
                code.append(ins(verb, target, leaf))
            return code
        t = _temp(depth, max_scratch)
        sub = _compute(e.rhs, t, operand_of, depth + 1, max_scratch)
        return code + sub + [ins(verb, target, t)] + uncompute(sub)
    a_code, a = _operand(e.lhs, operand_of, depth, max_scratch)
    b_code, b = _operand(e.rhs, operand_of, depth + (1 if a_code else 0), max_scratch)
    return a_code + b_code + [ins("ACC", Sel(e.op), target, a, b)] + uncompute(b_code) + uncompute(a_code)


def _operand(e: Expr, operand_of, depth: int, max_scratch: int):
    leaf = _leaf(e, operand_of)
    if leaf is not None:
        return [], leaf
    t = _temp(depth, max_scratch)
    return _compute(e, t, operand_of, depth + 1, max_scratch), t


def compile_expression(expr: Expr, target, operand_of=Cell, depth: int = 0,
                       max_scratch: int = 32) -> tuple[list[Instruction], list[Instruction]]:
    """Code leaving ``expr`` in the zeroed ``target``, and the code undoing it.

    Scratch cells ``%t<depth>`` and deeper are used and left at zero.
    """
    code = _compute(expr, target, operand_of, depth, max_scratch)
    return code, uncompute(code)


def compile_condition(expr: Expr, target, negate: bool = False, operand_of=Cell, depth: int = 0,
                      max_scratch: int = 32) -> tuple[list[Instruction], list[Instruction]]:
    """Like :func:`compile_expression` but leaves a 0/1 truth value (inverted if ``negate``)."""
    if isinstance(expr, Const):
        code = [ins("ADD", target, Imm(1))] if (expr.value != 0) != negate else []
    elif isinstance(expr, BinOp) and expr.op in ("<=", ">=", "!=", "=="):
        a_code, a = _operand(expr.lhs, operand_of, depth, max_scratch)
        b_code, b = _operand(expr.rhs, operand_of, depth + (1 if a_code else 0), max_scratch)
        if negate:
            test = [ins("ADD", target, Imm(1)), ins("UNACC", Sel(expr.op), target, a, b)]
        else:
            test = [ins("ACC", Sel(expr.op), target, a, b)]
        code = a_code + b_code + test + uncompute(b_code) + uncompute(a_code)
    else:
        v_code, v = _operand(expr, operand_of, depth, max_scratch)
        code = v_code + [ins("ACC", Sel("==" if negate else "!="), target, v, Imm(0))] + uncompute(v_code)
    return code, uncompute(code)


# ---------------------------------------------------------------------------
# statements


@dataclass
class _LabelInfo:
    jump: object
    label: object
    fall_in: bool
    cell: Cell | None = None


class _BodyGen:
    def __init__(self, backend: "_Backend", body: tuple, scope: str | None, variant: str,
                 params: tuple[str, ...] = ()) -> None:
        self.backend = backend
        self.body = body
        self.scope = scope
        self.variant = variant
        self.params = {p: Ref(-(len(params) + 1) + i) for i, p in enumerate(params)}
        self.prefix = "" if scope is None else f"{scope}.{variant}."
        self.base_in_log = variant == "log"
        self.out: list[Instruction] = []
        self.open: list[tuple[str, int]] = []
        self.closed: dict[str, tuple[int, int, tuple]] = {}
        self.regions: list[Region] = []
        self.checks: list[tuple[int, int, object, int | None]] = []
        # protected jump sites: (first compute index, jump index, cell, line)
        self.sites: list[tuple[int, int, object, int | None]] = []
        self.cur_line: int | None = 0
        self.cur_ir_line: int | None = 0
        self.labels = self.analyse_labels()

    def operand(self, name: str):
        return self.params.get(name) or Cell(name)

    @property
    def in_log(self) -> bool:
        return self.base_in_log or bool(self.open)

    def analyse_labels(self) -> dict[str, _LabelInfo]:
        jumps, labels = {}, {}
        for i, s in enumerate(self.body):
            if isinstance(s, ir.JUMPS):
                jumps[s.label] = s
            elif isinstance(s, ir.LABELS):
                labels[s.label] = (i, s)
        info = {}
        for name, (i, lab) in labels.items():
            fall_in = i == 0 or not ir.is_unconditional(self.body[i - 1])
            info[name] = _LabelInfo(jumps[name], lab, fall_in)
        return info

    def emit(self, instrs) -> None:
        for x in instrs:
            self.out.append(replace(x, line=self.cur_line, ir_line=self.cur_ir_line, in_log=self.in_log))

    def mk(self, op: str, *args, name: str | None = None) -> None:
        self.emit([ins(op, *args, name=name)])

    def expr(self, e: Expr, target, depth: int = 0):
        return compile_expression(e, target, self.operand, depth, self.backend.config.max_scratch)

    def cond(self, e: Expr, target, negate: bool):
        return compile_condition(e, target, negate, self.operand, 0, self.backend.config.max_scratch)

    def dispose(self, target) -> None:
        if self.in_log:
            self.mk("LPUSH", target)
        else:
            self.mk("MOVE", target, Imm(0))

    def run(self) -> list[Instruction]:
        lines = self.backend.ir_line_of
        for i, s in enumerate(self.body):
            self.cur_line = s.line
            self.cur_ir_line = lines.get((self.scope, i), s.line) if lines is not None else s.line
            self.statement(s)
        if self.open:
            raise CompileError("E_SYNTAX", f"region {self.open[-1][0]} is never closed")
        return self.out

    def statement(self, s) -> None:
        if isinstance(s, ir.CompoundAssign):
            self.compound(s)
        elif isinstance(s, ir.Assign):
            self.assign(s.target, s.expr)
        elif isinstance(s, ir.LogPush):
            self.dispose(self.operand(s.var))
        elif isinstance(s, ir.Call):
            args = tuple(self.operand(a) for a in s.args)
            self.emit([Instruction("CALL", args, call=(s.name, "log" if self.in_log else "plain"))])
        elif isinstance(s, ir.LogBegin):
            self.open.append((s.region, len(self.out)))
        elif isinstance(s, ir.LogEnd):
            region, begin = self.open.pop()
            if region != s.region:
                raise CompileError("E_SYNTAX", f"LogEnd({s.region}) does not match LogBegin({region})", s.line)
            self.closed[region] = (begin, len(self.out), self.region_vars(region))
        elif isinstance(s, ir.Unroll):
            for r in s.regions:
                self.unroll(r, s.line)
        elif isinstance(s, ir.JUMPS):
            self.jump(s)
        elif isinstance(s, ir.LABELS):
            self.label(s)
        else:  # pragma: no cover
            raise TypeError(s)

    def region_vars(self, region: str) -> tuple:
        names: list[str] = []
        inside = False
        for s in self.body:
            if isinstance(s, ir.LogBegin) and s.region == region:
                inside = True
            elif isinstance(s, ir.LogEnd) and s.region == region:
                break
            elif inside:
                names.extend(n for n in ir.stmt_vars(s) if not n.startswith("%") and n not in names)
        return tuple((n, self.operand(n)) for n in names)

    def compound(self, s: ir.CompoundAssign) -> None:
        x = self.operand(s.target)
        if s.target in expr_vars(s.expr):
            # x += f(x) is not an in-place update; treat as an overwrite
            self.assign(s.target, BinOp(s.op, Var(s.target), s.expr))
            return
        verb = {"+": "ADD", "-": "SUB", "*": "MULT"}[s.op]
        leaf = _leaf(s.expr, self.operand)
        if leaf is not None:
            if isinstance(leaf, Imm) and leaf.value == 0 and verb != "MULT":
                return
            self.mk(verb, x, leaf)
            return
        t = _temp(0, self.backend.config.max_scratch)
        code, undo = self.expr(s.expr, t, depth=1)
        self.emit(code + [ins(verb, x, t)] + undo)

    def assign(self, target: str, e: Expr) -> None:
        x = self.operand(target)
        if target not in expr_vars(e):
            self.dispose(x)
            self.emit(self.expr(e, x)[0])
            return
        t = _temp(0, self.backend.config.max_scratch)
        self.emit(self.expr(e, t, depth=1)[0])
        self.mk("SWAP", x, t)
        self.dispose(t)

    def unroll(self, region: str, line: int | None) -> None:
        if region not in self.closed:
            raise CompileError("E_UNROLL_OUTSIDE", f"region {region} is not closed before Unroll", line)
        begin, end, variables = self.closed.pop(region)
        code = self.out[begin:end]
        names = {i.name for i in code if i.name}
        for i in code:
            for a in i.args:
                if isinstance(a, Label) and a.name not in names:
                    raise CompileError("E_UNRESOLVED_LABEL",
                                       f"jump to {a.name} leaves region {region}", i.line)
        key = f"{self.prefix}{region}"
        rev_begin = len(self.out)
        self.out.extend(emit_reverse(code, prefix=f"~{key}."))
        # a reversed protected jump site is a landing followed by the
        # uncompute of its forward condition
        mirror = rev_begin + end - 1
        for start, jump, c, ln in self.sites:
            if begin <= start and jump < end:
                self.checks.append((mirror - jump, mirror - start, c, ln))
        self.regions.append(Region(key, begin, end, rev_begin, len(self.out), variables, line))

    def info(self, name: str) -> _LabelInfo:
        inf = self.labels[name]
        if inf.cell is None:
            inf.cell = self.backend.condition_cell()
        return inf

    def jump(self, s) -> None:
        inf = self.info(s.label)
        landing = Label(self.prefix + s.label)
        jname = f"{self.prefix}{s.label}.j"
        c = inf.cell
        if isinstance(s, ir.PGoto) or (isinstance(s, ir.Goto) and not inf.fall_in):
            self.mk("GOTO", landing, name=jname)
            return
        if isinstance(s, ir.Goto):
            code = [ins("ADD", c, Imm(1))]
        elif isinstance(s, (ir.PGotoIf, ir.PGotoIfN)):
            code = self.cond(s.fwd, c, negate=isinstance(s, ir.PGotoIfN))[0]
            self.sites.append((len(self.out), len(self.out) + len(code), c, self.cur_line))
        else:
            code = self.cond(s.cond, c, negate=isinstance(s, ir.GotoIfN))[0]
        self.emit(code)
        self.mk("GOTOIF", c, landing, name=jname)

    def label(self, s) -> None:
        inf = self.info(s.label)
        j = inf.jump
        c = inf.cell
        lname = self.prefix + s.label
        source = Label(f"{lname}.j")
        unconditional_site = isinstance(j, ir.PGoto) or (isinstance(j, ir.Goto) and not inf.fall_in)
        if unconditional_site:
            self.mk("CMFRM", source, name=lname)
            return
        if isinstance(s, ir.PLabel):
            code, undo = self.cond(j.bwd, c, negate=isinstance(j, ir.PGotoIfN))
            self.emit(code)
            self.mk("CMFRMIF", c, source, name=lname)
            landing = len(self.out) - 1
            self.emit(undo)
            self.checks.append((landing, len(self.out) - 1, c, self.cur_line))
            return
        self.mk("CMFRMIF", c, source, name=lname)
        if not inf.fall_in:
            self.mk("SUB", c, Imm(1))
        elif self.in_log:
            self.mk("LPUSHBIT", c)
        else:
            self.mk("MOVE", c, Imm(0))


# ---------------------------------------------------------------------------
# whole programs


class _Backend:
    def __init__(self, program: ir.IrProgram, config: BackendConfig, ir_line_of) -> None:
        self.program = program
        self.config = config
        self.ir_line_of = ir_line_of
        self.n_cells = 0
        self.functions = {f.name: f for f in program.functions}

    def condition_cell(self) -> Cell:
        self.n_cells += 1
        return Cell(f"%c{self.n_cells}")

    def function_body(self, name: str, variant: str, cache: dict) -> _BodyGen:
        key = (name, variant)
        if key not in cache:
            f = self.functions[name]
            gen = _BodyGen(self, f.body, name, variant, f.params)
            gen.run()
            cache[key] = gen
        return cache[key]

    def build(self) -> LowProgram:
        main = _BodyGen(self, self.program.body, None, "main")
        main.run()
        main.cur_line, main.cur_ir_line = 0, 0
        main.out.append(Instruction("HALT", (), None, 0, 0, False))
        chunks = [(None, main.out, main.regions, main.checks)]

        compiled: dict = {}
        emitted: list[tuple[str, str]] = []
        todo = _calls(main.out)
        while todo:
            key = todo.pop(0)
            if key in emitted:
                continue
            emitted.append(key)
            name, variant = key
            f = self.functions[name]
            if variant == "rev":
                fwd = self.function_body(name, "log", compiled)
                inner = emit_reverse(fwd.out, prefix="~")
                mirror = len(inner) - 1
                regions = []
                checks = [(mirror - jump, mirror - start, c, ln) for start, jump, c, ln in fwd.sites]
            else:
                gen = self.function_body(name, variant, compiled)
                inner, regions, checks = gen.out, gen.regions, gen.checks
            entry = Instruction("CMFRM", (Slot(-1),), f"{name}.{variant}", f.line,
                                self._def_line(name, f), variant != "plain")
            exit_ = Instruction("GOTO", (Slot(-1),), f"{name}.{variant}.exit", f.line,
                                self._def_line(name, f), variant != "plain")
            body = [entry] + inner + [exit_]
            shift = 1
            regions = [replace(r, begin=r.begin + shift, end=r.end + shift, rev_begin=r.rev_begin + shift,
                               rev_end=r.rev_end + shift) for r in regions]
            checks = [(a + shift, i + shift, c, ln) for a, i, c, ln in checks]
            chunks.append((key, body, regions, checks))
            todo.extend(k for k in _calls(inner) if k not in emitted)

        # keep main first, then functions in a stable order
        head, rest = chunks[0], sorted(chunks[1:], key=lambda c: (c[0][0], "plain log rev".split().index(c[0][1])))
        instructions: list[Instruction] = []
        regions: list[Region] = []
        checks = []
        functions = {}
        n_calls = 0
        for key, body, body_regions, body_checks in [head] + rest:
            expanded, remap, n_calls = _expand_calls(body, n_calls)
            base = len(instructions)
            instructions.extend(expanded)
            if key is not None:
                functions[f"{key[0]}.{key[1]}"] = (base, base + len(expanded))
            for r in body_regions:
                regions.append(replace(r, begin=base + remap[r.begin], end=base + remap[r.end],
                                       rev_begin=base + remap[r.rev_begin], rev_end=base + remap[r.rev_end]))
            checks.extend((base + remap[a], base + remap[i], c, ln) for a, i, c, ln in body_checks)

        return assemble(instructions, self.config, regions, checks, functions, self.named_variables())

    def named_variables(self) -> list[str]:
        """Every user variable of the program, even ones no instruction touches."""
        names: list[str] = []
        bodies = [(self.program.body, set())] + [(f.body, set(f.params)) for f in self.program.functions]
        for body, params in bodies:
            for s in body:
                names.extend(n for n in ir.stmt_vars(s)
                             if not n.startswith("%") and n not in params and n not in names)
        return names

    def _def_line(self, name: str, f: ir.Def) -> int | None:
        if self.ir_line_of is None:
            return f.line
        return self.ir_line_of.get((name, -1), f.line)


def _calls(code: list[Instruction]) -> list[tuple[str, str]]:
    out = []
    for i in code:
        if i.op == "CALL" and i.call not in out:
            out.append(i.call)
    return out


def _expand_calls(body: list[Instruction], n_calls: int):
    out: list[Instruction] = []
    remap = []
    for x in body:
        remap.append(len(out))
        if x.op != "CALL":
            out.append(x)
            continue
        n_calls += 1
        fn, variant = x.call
        ret = f"call{n_calls}"
        seq = []

        def pointer(arg, depth):
            return AddrOf(Ref(arg.offset - depth)) if isinstance(arg, Ref) else AddrOf(arg)

        for depth, arg in enumerate(x.args):
            seq.append(ins("PUSH", pointer(arg, depth)))
        seq.append(ins("PUSH", AddrOf(Label(ret))))
        seq.append(ins("GOTO", Label(f"{fn}.{variant}"), name=f"{ret}.go"))
        seq.append(ins("CMFRM", Label(f"{fn}.{variant}.exit"), name=ret))
        seq.append(ins("POP", AddrOf(Label(ret))))
        for depth in reversed(range(len(x.args))):
            seq.append(ins("POP", pointer(x.args[depth], depth)))
        out.extend(replace(s, line=x.line, ir_line=x.ir_line, in_log=x.in_log) for s in seq)
    remap.append(len(out))
    return out, remap, n_calls


def assemble(instructions: list[Instruction], config: BackendConfig | None = None,
             regions: list[Region] | None = None, checks=None, functions=None,
             variables: list[str] | None = None) -> LowProgram:
    """Resolve labels and lay out the data segment (second assembler pass).

    ``variables`` seeds the layout so that named variables the code never
    touches still get a cell.
    """
    config = config or BackendConfig()
    labels: dict[str, int] = {}
    for idx, i in enumerate(instructions):
        if i.name:
            if i.name in labels:
                raise CompileError("E_SYNTAX", f"label {i.name} defined twice", i.line)
            labels[i.name] = idx
    user: list[str] = list(variables or [])
    reserved: list[str] = []
    for i in instructions:
        for a in i.args:
            target = a.target if isinstance(a, AddrOf) else a
            if isinstance(target, Label) or (isinstance(target, Cell) and target.name in labels
                                             and isinstance(a, AddrOf)):
                name = target.name
                if name not in labels:
                    raise CompileError("E_UNRESOLVED_LABEL", f"undefined label {name}", i.line)
            elif isinstance(target, Cell):
                bucket = reserved if target.name.startswith("%") else user
                if target.name not in bucket:
                    bucket.append(target.name)
    layout = {name: addr for addr, name in enumerate(user + reserved)}
    return LowProgram(list(instructions), labels, layout, 0, config.stack_size, config.log_size,
                      regions or [], checks or [], functions or {})


def lower_ir_to_low(program: ir.IrProgram, plan: ir.UnrollPlan | None = None,
                    config: BackendConfig | None = None, ir_line_of=None) -> LowProgram:
    """Compile a validated intermediate program to a resolved low program.

    ``ir_line_of`` maps ``(scope, index)`` to the printed IR line; when it
    is omitted, IR statements' own lines are used for both provenance
    columns.
    """
    if plan is None:
        plan = ir.validate_ir(program)
    return _Backend(program, config or BackendConfig(), ir_line_of).build()


def pairing_errors(low: LowProgram) -> list[str]:
    """Static scan: every direct jump has exactly one matching landing."""
    problems = []
    partners: dict[int, int] = {}
    for idx, i in enumerate(low.instructions):
        if i.op in GOTOS:
            target = i.args[-1]
            if not isinstance(target, Label):
                continue
            t = low.labels[target.name]
            landing = low.instructions[t]
            if landing.op not in CMFRMS:
                problems.append(f"{idx}: {i} lands on non-comefrom {landing}")
                continue
            if landing.op[5:] != i.op[4:]:
                problems.append(f"{idx}: {i} paired with {landing} of different conditionality")
            src = landing.args[-1]
            if isinstance(src, Label) and src.name != i.name:
                problems.append(f"{idx}: {landing} does not name {i.name}")
            partners[t] = partners.get(t, 0) + 1
    for t, n in partners.items():
        land = low.instructions[t]
        if isinstance(land.args[-1], Label) and n != 1:
            problems.append(f"{t}: {land} has {n} jumps")
    return problems


# ---------------------------------------------------------------------------
# .elo text


def format_low(low: LowProgram) -> str:
    out = ["// eel low level", ".data " + " ".join(low.layout), f".stack {low.stack_size}",
           f".log {low.log_size}"]
    for i in low.instructions:
        if i.name:
            out.append(f"{i.name}:")
        out.append(f"    {i}")
    return "\n".join(out) + "\n"


def line_map_json(low: LowProgram) -> str:
    data = {
        "lines": [[i.line, i.ir_line, i.in_log] for i in low.instructions],
        "regions": [
            {"key": r.key, "begin": r.begin, "end": r.end, "rev_begin": r.rev_begin, "rev_end": r.rev_end,
             "variables": [[n, str(op)] for n, op in r.variables], "line": r.line}
            for r in low.regions
        ],
        "protected_checks": [[a, i, str(c), ln] for a, i, c, ln in low.protected_checks],
        "functions": low.functions,
    }
    return json.dumps(data, indent=1, sort_keys=True) + "\n"


def parse_low(text: str, line_map: str | None = None) -> LowProgram:
    from .isa import parse_operand

    pending: str | None = None
    instrs: list[Instruction] = []
    data: list[str] = []
    stack, log = DEFAULT_SEGMENT, DEFAULT_SEGMENT
    for lineno, raw in enumerate(text.replace("\r\n", "\n").split("\n"), start=1):
        s = raw.split("//", 1)[0].strip()
        if not s:
            continue
        if s.startswith(".data"):
            data = s.split()[1:]
        elif s.startswith(".stack"):
            stack = int(s.split()[1])
        elif s.startswith(".log"):
            log = int(s.split()[1])
        elif s.endswith(":"):
            if pending is not None:
                raise ParseError("E_SYNTAX", "two labels on one instruction", lineno)
            pending = s[:-1]
        else:
            instr = parse_instruction(s, lineno)
            instrs.append(replace(instr, name=pending, line=lineno, ir_line=lineno))
            pending = None
    if pending is not None:
        raise ParseError("E_SYNTAX", f"label {pending} at end of program")
    labels = {i.name for i in instrs if i.name}
    # &name refers to a code label when such a label exists
    instrs = [replace(i, args=tuple(AddrOf(Label(a.target.name)) if isinstance(a, AddrOf) and
                                    isinstance(a.target, Cell) and a.target.name in labels else a
                                    for a in i.args)) for i in instrs]
    low = assemble(instrs, BackendConfig(stack, log))
    if data:
        names = list(data) + [n for n in low.layout if n not in data]
        low.layout = {n: k for k, n in enumerate(names)}
    if line_map is not None:
        meta = json.loads(line_map)
        low.instructions = [replace(i, line=ln, ir_line=il, in_log=lg)
                            for i, (ln, il, lg) in zip(low.instructions, meta["lines"])]
        low.functions = {k: tuple(v) for k, v in meta.get("functions", {}).items()}
        low.regions = [Region(r["key"], r["begin"], r["end"], r["rev_begin"], r["rev_end"],
                              tuple((n, parse_operand(o, 1, "ADD")) for n, o in r["variables"]), r["line"])
                       for r in meta.get("regions", [])]
        low.protected_checks = [(a, i, parse_operand(c, 1, "ADD"), ln)
                                for a, i, c, ln in meta.get("protected_checks", [])]
    return low


__all__ = [
    "ACC_OPS", "BackendConfig", "LowProgram", "Region", "assemble", "compile_condition", "compile_expression",
    "emit_reverse", "format_low", "line_map_json", "lower_ir_to_low", "pairing_errors", "parse_low", "uncompute",
]
