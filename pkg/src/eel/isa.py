"""Low level instruction set: operands, instructions and the ``.elo`` format.

Operand spellings in ``.elo`` text::

    5, -3          immediate
    x, %t0         data cell by name
    &x, &L         address of a data cell or code label (immediate)
    &ref[sp-2]     the address held in stack slot sp-2 (immediate)
    mem[sp-1]      stack slot sp-1 itself
    ref[sp-2]      the data cell whose address is held in stack slot sp-2
    <=             comparison selector (first operand of ACC/UNACC)
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Union

from .errors import CompileError, ParseError


@dataclass(frozen=True)
class Imm:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Cell:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Slot:
    offset: int

    def __str__(self) -> str:
        return f"mem[sp{self.offset:+d}]"


@dataclass(frozen=True)
class Ref:
    offset: int

    def __str__(self) -> str:
        return f"ref[sp{self.offset:+d}]"


@dataclass(frozen=True)
class Label:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class AddrOf:
    target: Union[Cell, Ref, Label]

    def __str__(self) -> str:
        return f"&{self.target}"


@dataclass(frozen=True)
class Sel:
    op: str

    def __str__(self) -> str:
        return self.op


Operand = Union[Imm, Cell, Slot, Ref, Label, AddrOf, Sel]

REVERSIBLE = frozenset(
    {"ADD", "SUB", "MULT", "MULTINV", "NEG", "SWAP", "LPUSH", "LPOP", "LPUSHBIT", "LPOPBIT",
     "PUSH", "POP", "ACC", "UNACC"}
)
IRREVERSIBLE = frozenset({"MOVE", "AND", "OR"})
GOTOS = frozenset({"GOTO", "GOTOIF", "GOTOIFN"})
CMFRMS = frozenset({"CMFRM", "CMFRMIF", "CMFRMIFN"})
JUMP_OPS = GOTOS | CMFRMS
OPCODES = REVERSIBLE | IRREVERSIBLE | JUMP_OPS | {"HALT"}
LOG_OPS = frozenset({"LPUSH", "LPOP", "LPUSHBIT", "LPOPBIT"})

ARITY = {
    "ADD": 2, "SUB": 2, "MULT": 2, "MULTINV": 2, "NEG": 1, "SWAP": 2,
    "LPUSH": 1, "LPOP": 1, "LPUSHBIT": 1, "LPOPBIT": 1, "PUSH": 1, "POP": 1,
    "MOVE": 2, "AND": 2, "OR": 2,
    "GOTO": 1, "GOTOIF": 2, "GOTOIFN": 2, "CMFRM": 1, "CMFRMIF": 2, "CMFRMIFN": 2,
    "ACC": 4, "UNACC": 4, "HALT": 0,
}

INVERSE = {
    "ADD": "SUB", "SUB": "ADD", "MULT": "MULTINV", "MULTINV": "MULT", "NEG": "NEG", "SWAP": "SWAP",
    "LPUSH": "LPOP", "LPOP": "LPUSH", "LPUSHBIT": "LPOPBIT", "LPOPBIT": "LPUSHBIT",
    "PUSH": "POP", "POP": "PUSH", "ACC": "UNACC", "UNACC": "ACC",
}

# a jump and the landing that mirrors it under reversal
MIRROR = {
    "GOTO": "CMFRM", "GOTOIF": "CMFRMIF", "GOTOIFN": "CMFRMIFN",
    "CMFRM": "GOTO", "CMFRMIF": "GOTOIF", "CMFRMIFN": "GOTOIFN",
}

ACC_OPS = ("*", "/", "<=", ">=", "!=", "==")


@dataclass(frozen=True)
class Instruction:
    """One low level instruction.

    ``name`` labels the instruction itself (jump sites and landings both get
    one).  ``call`` is only set on the CALL pseudo-instruction, which the
    assembler expands into the calling sequence.  ``line``/``ir_line`` are
    provenance; ``in_log`` tags code compiled inside a log region.
    """

    op: str
    args: tuple = ()
    name: str | None = None
    line: int | None = 0
    ir_line: int | None = 0
    in_log: bool = False
    call: tuple | None = None  # (function, variant)

    def __str__(self) -> str:
        if self.op == "CALL":
            fn, variant = self.call or ("?", "?")
            return f"CALL({fn}.{variant}, {', '.join(str(a) for a in self.args)})"
        if not self.args:
            return self.op
        return f"{self.op}({', '.join(str(a) for a in self.args)})"


def ins(op: str, *args: Operand, name: str | None = None) -> Instruction:
    return Instruction(op, tuple(args), name)


def _rename(prefix: str, operand):
    if isinstance(operand, Label):
        return Label(prefix + operand.name)
    return operand


def invert(instr: Instruction, prefix: str) -> Instruction:
    """The instruction that undoes ``instr`` in reversed code.

    Jumps become landings and landings become jumps; every label is
    renamed with ``prefix`` so the reversed copy does not clash with the
    forward code.
    """
    op = instr.op
    if op in INVERSE:
        return replace(instr, op=INVERSE[op])
    if op in MIRROR:
        return replace(instr, op=MIRROR[op], args=tuple(_rename(prefix, a) for a in instr.args),
                       name=prefix + instr.name if instr.name else None)
    if op == "CALL":
        fn, variant = instr.call
        flipped = {"log": "rev", "rev": "log"}.get(variant)
        if flipped is None:
            raise CompileError("E_IRREVERSIBLE_IN_LOG", f"plain call to {fn} inside a log region", instr.line)
        return replace(instr, call=(fn, flipped))
    if op in IRREVERSIBLE:
        raise CompileError("E_IRREVERSIBLE_IN_LOG", f"{op} cannot appear in a log region", instr.line)
    raise CompileError("E_IRREVERSIBLE_IN_LOG", f"{op} has no inverse", instr.line)


def emit_reverse(region: list[Instruction], prefix: str = "~") -> list[Instruction]:
    """Reverse a log region instruction by instruction."""
    return [invert(i, prefix) for i in reversed(region)]


# ---------------------------------------------------------------------------
# text form

_INSTR = re.compile(r"^([A-Z]+)\s*(?:\((.*)\))?$")
_SLOT = re.compile(r"^(mem|ref|&ref)\[sp([+-]\d+)\]$")
_NAME = re.compile(r"^%?[A-Za-z_~][A-Za-z0-9_.~%]*$")


def parse_operand(text: str, position: int, op: str) -> Operand:
    text = text.strip()
    if op in ("ACC", "UNACC") and position == 0:
        if text not in ACC_OPS:
            raise ParseError("E_SYNTAX", f"bad ACC selector {text!r}")
        return Sel(text)
    if re.fullmatch(r"-?\d+", text):
        return Imm(int(text))
    m = _SLOT.match(text)
    if m:
        kind, off = m.group(1), int(m.group(2))
        if kind == "mem":
            return Slot(off)
        if kind == "ref":
            return Ref(off)
        return AddrOf(Ref(off))
    jump_target = (op in ("GOTO", "CMFRM") and position == 0) or (op in JUMP_OPS and position == 1)
    if text.startswith("&") and _NAME.match(text[1:]):
        return AddrOf(Cell(text[1:]))
    if _NAME.match(text):
        return Label(text) if jump_target else Cell(text)
    raise ParseError("E_SYNTAX", f"bad operand {text!r}")


def format_instruction(instr: Instruction) -> str:
    return str(instr)


def parse_instruction(text: str, line: int | None = None) -> Instruction:
    m = _INSTR.match(text.strip())
    if not m or m.group(1) not in OPCODES:
        raise ParseError("E_SYNTAX", f"bad instruction {text.strip()!r}", line)
    op = m.group(1)
    raw = m.group(2)
    parts = [p for p in raw.split(",")] if raw is not None and raw.strip() else []
    if len(parts) != ARITY[op]:
        raise ParseError("E_SYNTAX", f"{op} takes {ARITY[op]} operand(s)", line)
    args = tuple(parse_operand(p, i, op) for i, p in enumerate(parts))
    return Instruction(op, args)
