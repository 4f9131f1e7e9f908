"""Correct-program conventions: syntactic checks and runtime snapshot hooks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum

from . import frontend as hl
from .backend import LowProgram


class Severity(str, Enum):
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int | None
    severity: Severity = Severity.WARNING

    def format(self, filename: str = "<input>") -> str:
        line = self.line if self.line is not None else 0
        return f"{filename}:{line}: {self.severity.value} {self.code} {self.message}"

    def to_dict(self, filename: str = "<input>") -> dict:
        return {"file": filename, "line": self.line, "severity": self.severity.value, "code": self.code,
                "message": self.message}


def diagnostics_json(diags: list[Diagnostic], filename: str = "<input>") -> str:
    return json.dumps([d.to_dict(filename) for d in diags], indent=1) + "\n"


# ---------------------------------------------------------------------------
# block model


def stmt_vars(s: hl.Stmt) -> list[str]:
    """V(b): every variable occurring in a statement, recursively."""
    out: list[str] = []

    def add(names):
        out.extend(n for n in names if n not in out)

    def visit(s):
        if isinstance(s, (hl.Assign, hl.CompoundAssign)):
            add([s.target])
            add(hl.expr_vars(s.expr))
        elif isinstance(s, (hl.PIf, hl.If, hl.While)):
            add(hl.expr_vars(s.cond))
        elif isinstance(s, (hl.PFor, hl.For)):
            visit(s.init)
            add(hl.expr_vars(s.cond))
            visit(s.incr)
        elif isinstance(s, hl.Call):
            add(s.args)
        elif isinstance(s, hl.LogPush):
            add([s.var])
        for block in _blocks(s):
            for t in block:
                visit(t)

    visit(s)
    return out


def modified_vars(s: hl.Stmt) -> list[tuple[str, int]]:
    """V_mod(b) with the line of each modification.

    Call arguments are passed by reference, so every argument counts as
    modified.
    """
    out: list[tuple[str, int]] = []

    def visit(s):
        if isinstance(s, (hl.Assign, hl.CompoundAssign)):
            out.append((s.target, s.line))
        elif isinstance(s, (hl.PFor, hl.For)):
            visit(s.init)
            visit(s.incr)
        elif isinstance(s, hl.Call):
            out.extend((a, s.line) for a in s.args)
        elif isinstance(s, hl.LogPush):
            out.append((s.var, s.line))
        for block in _blocks(s):
            for t in block:
                visit(t)

    visit(s)
    return out


def _blocks(s: hl.Stmt) -> list[tuple]:
    if isinstance(s, (hl.PIf, hl.If)):
        return [s.then] + ([s.orelse] if s.orelse is not None else [])
    if isinstance(s, (hl.PFor, hl.For, hl.While, hl.LogBlock)):
        return [s.body]
    return []


@dataclass
class BlockModel:
    """One code block split into log blocks, forward blocks and unrolls."""

    elements: list[tuple[str, object]] = field(default_factory=list)  # ("log" | "forward" | "unroll", stmt)
    pairing: dict[int, int | None] = field(default_factory=dict)  # log element index -> unroll index

    @classmethod
    def of(cls, block: tuple) -> "BlockModel":
        model = cls()
        pending: list[int] = []
        for s in block:
            if isinstance(s, hl.Def):
                continue
            idx = len(model.elements)
            if isinstance(s, hl.LogBlock):
                model.elements.append(("log", s))
                pending.append(idx)
            elif isinstance(s, hl.Unroll):
                model.elements.append(("unroll", s))
                for r in pending:
                    model.pairing[r] = idx
                pending = []
            else:
                model.elements.append(("forward", s))
        for r in pending:
            model.pairing[r] = None
        return model


# ---------------------------------------------------------------------------
# static checks


def check_static(program: hl.HighProgram, implicit_unroll: bool = True, strict: bool = False) -> list[Diagnostic]:
    severity = Severity.ERROR if strict else Severity.WARNING
    diags: list[Diagnostic] = []

    def report(code, message, line):
        diags.append(Diagnostic(code, message, line, severity))

    def check_block(block: tuple) -> None:
        model = BlockModel.of(block)
        for r, u in model.pairing.items():
            log = model.elements[r][1]
            if u is None and not implicit_unroll:
                report("LOG_NOT_UNROLLED", "log block is not unrolled before its block ends", log.line)
            stop = u if u is not None else len(model.elements)
            logged = set(stmt_vars(log))
            for kind, f in model.elements[r + 1:stop]:
                if kind != "forward":
                    continue
                for name, line in modified_vars(f):
                    if name in logged:
                        report("FORWARD_MODIFIES_LOGGED",
                               f"'{name}' belongs to the pending log block at line {log.line} "
                               "and is modified before its unroll", line)
        for s in block:
            check_stmt(s)

    def check_stmt(s) -> None:
        if isinstance(s, hl.PIf):
            cond = set(hl.expr_vars(s.cond))
            for block in _blocks(s):
                for t in block:
                    for name, line in modified_vars(t):
                        if name in cond:
                            report("PROTECTED_COND_MODIFIED",
                                   f"'{name}' appears in the protected condition at line {s.line} "
                                   "and is modified inside the conditional", line)
        elif isinstance(s, hl.PFor):
            var = s.init.target
            for t in s.body:
                for name, line in modified_vars(t):
                    if name == var:
                        report("PFOR_VAR_MODIFIED",
                               f"loop variable '{var}' of the protected loop at line {s.line} "
                               "is modified outside its increment", line)
        if isinstance(s, hl.Def):
            check_block(s.body)
        for block in _blocks(s):
            check_block(block)

    check_block(program.body)
    return diags


# ---------------------------------------------------------------------------
# dynamic instrumentation


def _read(machine, operand) -> int:
    return machine.value(machine.decode_operand(operand))


def instrument_dynamic(low: LowProgram) -> LowProgram:
    """Attach snapshot hooks comparing each region's variables around its unroll.

    Hooks run in the VM's debug mode only, keep their snapshots in the
    machine's shadow store (outside machine state), and
    charge nothing.  The protected-jump zero checks are already carried by
    the program and need no hook.
    """
    entries: list[tuple[int, object]] = []

    def snapshot(machine, region):
        return {name: _read(machine, op) for name, op in region.variables}

    def diff(a: dict, b: dict) -> list[str]:
        return [n for n in a if a[n] != b.get(n)]

    for k, region in enumerate(low.regions):
        def begin(m, k=k, region=region):
            m.shadow.setdefault(k, []).append({"in": snapshot(m, region)})

        def end(m, k=k, region=region):
            frames = m.shadow
            if frames.get(k):
                frames[k][-1]["out"] = snapshot(m, region)

        def unroll(m, k=k, region=region):
            frames = m.shadow
            if not frames.get(k) or "out" not in frames[k][-1]:
                return
            now = snapshot(m, region)
            changed = diff(frames[k][-1]["out"], now)
            if changed:
                m.violate(f"variables {', '.join(changed)} of the log block changed between its end "
                          "and its unroll", region.line, changed)

        def restored(m, k=k, region=region):
            frames = m.shadow
            if not frames.get(k):
                return
            frame = frames[k].pop()
            wrong = diff(frame["in"], snapshot(m, region))
            if wrong:
                m.violate(f"unroll did not restore {', '.join(wrong)}", region.line, wrong)

        entries += [(region.begin, begin), (region.end, end), (region.rev_begin, unroll), (region.rev_end, restored)]

    before: dict[int, list] = {}
    for index, fn in sorted(entries, key=lambda e: e[0]):
        before.setdefault(index, []).append(fn)
    hooks = dict(low.hooks)
    hooks["before"] = before
    return replace(low, hooks=hooks)
