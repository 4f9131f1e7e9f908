"""Word machine for low level programs, with energy and log ledgers.

Memory is one flat list holding the data segment followed by the stack
segment.  The log is kept as its own list of w-bit words addressed by the
bit-granular log pointer ``lp`` (bit 0 of the log segment is lp = 0).
Data cells hold signed w-bit values; stack cells hold addresses and are
not wrapped, so pushed addresses survive small word widths.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

from .backend import BackendConfig, LowProgram, assemble
from .errors import VmError
from .isa import AddrOf, Cell, Imm, Instruction, Label, Ref, Sel, Slot, ins

DEFAULT_STEP_LIMIT = 10**8


class Mode(str, Enum):
    DEBUG = "debug"
    RELEASE = "release"


class CostModel(str, Enum):
    PAPER = "paper"
    ENTROPY = "entropy"


class LogAccounting(str, Enum):
    WORD = "word"
    TIGHT = "tight"


@dataclass
class VmConfig:
    word_width: int = 64
    step_limit: int = DEFAULT_STEP_LIMIT
    mode: Mode = Mode.DEBUG
    cost_model: CostModel = CostModel.PAPER
    log_accounting: LogAccounting = LogAccounting.WORD
    on_violation: str = "halt"  # or "continue"
    trace: bool = False
    record_events: bool = True

    def __post_init__(self) -> None:
        self.mode = Mode(self.mode)
        self.cost_model = CostModel(self.cost_model)
        self.log_accounting = LogAccounting(self.log_accounting)
        if not 4 <= self.word_width <= 64:
            raise ValueError(f"word width must be in [4, 64], got {self.word_width}")
        if self.step_limit <= 0:
            raise ValueError("step limit must be positive")
        if self.on_violation not in ("halt", "continue"):
            raise ValueError("on_violation must be 'halt' or 'continue'")


@dataclass
class MachineState:
    mem: list[int]
    log: list[int]
    data_size: int
    pc: int = 0
    sp: int = 0
    lp: int = 0
    halted: bool = False

    @classmethod
    def fresh(cls, program: LowProgram) -> "MachineState":
        return cls(
            mem=[0] * (program.data_size + program.stack_size),
            log=[0] * program.log_size,
            data_size=program.data_size,
            pc=program.entry,
            sp=program.data_size,
        )

    @property
    def stack_base(self) -> int:
        return self.data_size

    def variables(self, program: LowProgram, include_reserved: bool = False) -> dict[str, int]:
        return {n: self.mem[a] for n, a in program.layout.items() if include_reserved or not n.startswith("%")}

    def copy(self) -> "MachineState":
        return MachineState(list(self.mem), list(self.log), self.data_size, self.pc, self.sp, self.lp, self.halted)


@dataclass
class CostLedger:
    word_width: int
    cost_model: str = "paper"
    log_accounting: str = "word"
    total_energy: float = 0.0
    energy: dict[int, float] = field(default_factory=dict)
    pushed: dict[int, int] = field(default_factory=dict)
    popped: dict[int, int] = field(default_factory=dict)
    executions: dict[int, int] = field(default_factory=dict)
    events: list[tuple[int, int]] = field(default_factory=list)
    occupancy: int = 0
    peak: int = 0
    steps: int = 0

    @property
    def total_pushed(self) -> int:
        return sum(self.pushed.values())

    def to_dict(self) -> dict:
        return {
            "word_width": self.word_width,
            "cost_model": self.cost_model,
            "log_accounting": self.log_accounting,
            "total_energy": self.total_energy,
            "total_pushed_bits": self.total_pushed,
            "final_log_bits": self.occupancy,
            "peak_log_bits": self.peak,
            "steps": self.steps,
            "energy": {str(k): v for k, v in sorted(self.energy.items())},
            "pushed": {str(k): v for k, v in sorted(self.pushed.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


@dataclass
class Violation:
    code: str
    message: str
    pc: int
    line: int | None = None
    variables: tuple[str, ...] = ()

    def describe(self) -> str:
        where = f"{self.line}: " if self.line is not None else ""
        return f"{where}{self.code} {self.message} (pc={self.pc})"


@dataclass
class RunResult:
    state: MachineState
    ledger: CostLedger
    violations: list[Violation] = field(default_factory=list)
    trace: list[str] = field(default_factory=list)

    @property
    def stopped_on_violation(self) -> bool:
        return bool(self.violations) and not self.state.halted


# ---------------------------------------------------------------------------
# word arithmetic


def wrap(value: int, w: int) -> int:
    """Reduce to signed w-bit two's complement."""
    value &= (1 << w) - 1
    return value - (1 << w) if value >> (w - 1) else value


def unsigned(value: int, w: int) -> int:
    return value & ((1 << w) - 1)


def trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def acc_value(sel: str, a: int, b: int, w: int) -> int:
    """The quantity ACC adds (and UNACC subtracts)."""
    if sel == "*":
        return wrap(a * b, w)
    if sel == "/":
        if b == 0:
            raise VmError("E_DIV_ZERO", "division by zero")
        return wrap(trunc_div(a, b), w)
    if sel == "<=":
        return int(a <= b)
    if sel == ">=":
        return int(a >= b)
    if sel == "!=":
        return int(a != b)
    return int(a == b)


def alu(op: str, w: int, values: tuple[int, ...], sel: str | None = None) -> tuple[int, ...]:
    """Pure transition of a data-only instruction over its operand cells."""
    if op == "ADD":
        a, b = values
        return wrap(a + b, w), b
    if op == "SUB":
        a, b = values
        return wrap(a - b, w), b
    if op in ("MULT", "MULTINV"):
        a, b = values
        if b % 2 == 0:
            raise VmError("E_MULT_NONINVERTIBLE", f"multiplier {b} is not odd")
        m = b if op == "MULT" else pow(b, -1, 1 << w)
        return wrap(a * m, w), b
    if op == "NEG":
        (a,) = values
        return (wrap(-a, w),)
    if op == "SWAP":
        a, b = values
        return b, a
    if op == "MOVE":
        a, b = values
        return wrap(b, w), b
    if op == "AND":
        a, b = values
        return wrap(a & b, w), b
    if op == "OR":
        a, b = values
        return wrap(a | b, w), b
    if op in ("ACC", "UNACC"):
        t, a, b = values
        d = acc_value(sel, a, b, w)
        return wrap(t + d if op == "ACC" else t - d, w), a, b
    raise ValueError(f"{op} is not a data instruction")


def instruction_cost(instr: Instruction | str, config: VmConfig) -> float:
    op = instr if isinstance(instr, str) else instr.op
    w = config.word_width
    if op == "MOVE":
        return float(w)
    if op in ("AND", "OR"):
        return float(w) if config.cost_model == CostModel.PAPER else w * math.log2(4 / 3)
    return 0.0


# ---------------------------------------------------------------------------
# execution


_IMM, _MEM, _SLOT, _REF, _AREF = range(5)


class Machine:
    """A program bound to a state, ledger and configuration."""

    def __init__(self, program: LowProgram, config: VmConfig, state: MachineState | None = None,
                 ledger: CostLedger | None = None) -> None:
        self.program = program
        self.config = config
        self.w = config.word_width
        self.state = state or MachineState.fresh(program)
        self.ledger = ledger or CostLedger(self.w, config.cost_model.value, config.log_accounting.value)
        self.debug = config.mode == Mode.DEBUG
        self.tight = config.log_accounting == LogAccounting.TIGHT
        self.decoded = [self.decode(i) for i in program.instructions]
        self.costs = [instruction_cost(i, config) for i in program.instructions]
        self.prev: int | None = None
        self.violations: list[Violation] = []
        self.shadow: dict = {}  # debug-only storage for checker hooks
        self.trace: list[str] = []
        self.log_bits: list[int] = []  # accounted size of each live log entry
        self.checks: dict[int, list[tuple[object, int | None]]] = {}
        self.landings: set[int] = set()
        for landing, idx, cell, line in program.protected_checks:
            self.checks.setdefault(idx, []).append((self.decode_operand(cell), line))
            self.landings.add(landing)
        self.hooks: dict[int, list[Callable]] = program.hooks.get("before", {}) if program.hooks else {}

    # -- decoding ---------------------------------------------------------
    def decode_operand(self, a) -> tuple[int, int]:
        layout, labels = self.program.layout, self.program.labels
        if isinstance(a, Imm):
            return _IMM, a.value
        if isinstance(a, Cell):
            if a.name in layout:
                return _MEM, layout[a.name]
            if a.name in labels:
                return _IMM, labels[a.name]
            raise VmError("E_SEGMENT", f"unknown cell {a.name}")
        if isinstance(a, Label):
            return _IMM, labels[a.name]
        if isinstance(a, Slot):
            return _SLOT, a.offset
        if isinstance(a, Ref):
            return _REF, a.offset
        if isinstance(a, AddrOf):
            t = a.target
            if isinstance(t, Ref):
                return _AREF, t.offset
            if isinstance(t, Label) or t.name in labels and t.name not in layout:
                return _IMM, labels[t.name]
            return _IMM, layout[t.name]
        if isinstance(a, Sel):
            return _IMM, 0
        raise TypeError(a)

    def decode(self, i: Instruction):
        if i.op == "CALL":
            raise VmError("E_SEGMENT", "unexpanded CALL pseudo-instruction")
        args = tuple(self.decode_operand(a) for a in i.args if not isinstance(a, Sel))
        sel = i.args[0].op if i.args and isinstance(i.args[0], Sel) else None
        return i.op, args, sel

    # -- operand access ---------------------------------------------------
    def fail(self, code: str, message: str) -> VmError:
        pc = self.state.pc
        instr = self.program.instructions[pc] if 0 <= pc < len(self.program.instructions) else None
        return VmError(code, message, pc, str(instr) if instr else None, instr.line if instr else None)

    def address(self, operand) -> int:
        kind, v = operand
        st = self.state
        if kind == _MEM:
            return v
        if kind == _SLOT:
            addr = st.sp + v
            if not st.data_size <= addr < len(st.mem):
                raise self.fail("E_SEGMENT", f"stack slot {addr} outside the stack")
            return addr
        if kind == _REF:
            slot = st.sp + v
            if not st.data_size <= slot < len(st.mem):
                raise self.fail("E_SEGMENT", f"stack slot {slot} outside the stack")
            addr = st.mem[slot]
            if not 0 <= addr < st.data_size:
                raise self.fail("E_SEGMENT", f"reference {addr} outside the data segment")
            return addr
        raise self.fail("E_SEGMENT", "immediate used as a destination")

    def value(self, operand) -> int:
        kind, v = operand
        if kind == _IMM:
            return v
        if kind == _AREF:
            slot = self.state.sp + v
            if not self.state.data_size <= slot < len(self.state.mem):
                raise self.fail("E_SEGMENT", f"stack slot {slot} outside the stack")
            return self.state.mem[slot]
        return self.state.mem[self.address(operand)]

    def store(self, addr: int, value: int) -> None:
        self.state.mem[addr] = wrap(value, self.w) if addr < self.state.data_size else value

    # -- log segment ------------------------------------------------------
    def write_bits(self, lp: int, n: int, value: int) -> None:
        w = self.w
        if lp + n > len(self.state.log) * w:
            raise self.fail("E_SEGMENT", "log segment overflow")
        for k in range(n):
            if (value >> k) & 1:
                pos = lp + k
                self.state.log[pos // w] |= 1 << (pos % w)

    def take_bits(self, lp: int, n: int) -> int:
        w = self.w
        if lp < 0:
            raise self.fail("E_SEGMENT", "log segment underflow")
        if n == w and lp % w == 0:
            v = self.state.log[lp // w]
            self.state.log[lp // w] = 0
            return v
        out = 0
        for k in range(n):
            pos = lp + k
            word, bit = divmod(pos, w)
            if (self.state.log[word] >> bit) & 1:
                out |= 1 << k
                self.state.log[word] &= ~(1 << bit)
        return out

    def account(self, pc: int, bits: int) -> None:
        led = self.ledger
        if bits > 0:
            led.pushed[pc] = led.pushed.get(pc, 0) + bits
        elif bits < 0:
            led.popped[pc] = led.popped.get(pc, 0) - bits
        led.occupancy += bits
        if led.occupancy > led.peak:
            led.peak = led.occupancy
        if self.config.record_events:
            led.events.append((pc, bits))

    # -- stepping ---------------------------------------------------------
    def violate(self, message: str, line: int | None, variables: Iterable[str] = ()) -> None:
        self.violations.append(Violation("CONVENTION_VIOLATION", message, self.state.pc, line, tuple(variables)))

    def step(self) -> None:
        st = self.state
        pc = st.pc
        if st.halted:
            raise self.fail("E_HALTED", "machine already halted")
        if not 0 <= pc < len(self.decoded):
            raise self.fail("E_SEGMENT", f"pc {pc} outside the program")
        if self.debug and pc in self.hooks and (self.prev is None or self.prev == pc - 1):
            for hook in self.hooks[pc]:
                hook(self)
        op, args, sel = self.decoded[pc]
        w = self.w
        next_pc = pc + 1
        log_delta = 0
        mem = st.mem

        if op in ("ADD", "SUB"):
            a = self.address(args[0])
            b = self.value(args[1])
            self.store(a, mem[a] + b if op == "ADD" else mem[a] - b)
        elif op in ("MULT", "MULTINV"):
            a = self.address(args[0])
            b = self.value(args[1])
            if b % 2 == 0:
                raise self.fail("E_MULT_NONINVERTIBLE", f"multiplier {b} is not odd")
            self.store(a, mem[a] * (b if op == "MULT" else pow(b, -1, 1 << w)))
        elif op in ("ACC", "UNACC"):
            t = self.address(args[0])
            try:
                d = acc_value(sel, self.value(args[1]), self.value(args[2]), w)
            except VmError as e:
                raise self.fail(e.code, e.message) from None
            self.store(t, mem[t] + d if op == "ACC" else mem[t] - d)
        elif op == "NEG":
            a = self.address(args[0])
            self.store(a, -mem[a])
        elif op == "SWAP":
            a, b = self.address(args[0]), self.address(args[1])
            mem[a], mem[b] = mem[b], mem[a]
            if a < st.data_size:
                mem[a] = wrap(mem[a], w)
            if b < st.data_size:
                mem[b] = wrap(mem[b], w)
        elif op in ("MOVE", "AND", "OR"):
            a = self.address(args[0])
            b = self.value(args[1])
            self.store(a, b if op == "MOVE" else (mem[a] & b if op == "AND" else mem[a] | b))
        elif op == "LPUSH":
            a = self.address(args[0])
            v = unsigned(mem[a], w)
            self.write_bits(st.lp, w, v)
            mem[a] = 0
            st.lp += w
            bits = v.bit_length() if self.tight else w
            self.log_bits.append(bits)
            log_delta = bits
        elif op == "LPOP":
            a = self.address(args[0])
            if mem[a] != 0:
                raise self.fail("E_LPOP_NONZERO_DEST", "LPOP destination is not zero")
            if st.lp < w:
                raise self.fail("E_SEGMENT", "log segment underflow")
            st.lp -= w
            mem[a] = wrap(self.take_bits(st.lp, w), w) if a < st.data_size else self.take_bits(st.lp, w)
            log_delta = -self.log_bits.pop() if self.log_bits else -w
        elif op == "LPUSHBIT":
            a = self.address(args[0])
            if mem[a] not in (0, 1):
                raise self.fail("E_BIT_RANGE", f"LPUSHBIT of non-bit value {mem[a]}")
            self.write_bits(st.lp, 1, mem[a])
            mem[a] = 0
            st.lp += 1
            self.log_bits.append(1)
            log_delta = 1
        elif op == "LPOPBIT":
            a = self.address(args[0])
            if mem[a] != 0:
                raise self.fail("E_LPOP_NONZERO_DEST", "LPOPBIT destination is not zero")
            if st.lp < 1:
                raise self.fail("E_SEGMENT", "log segment underflow")
            st.lp -= 1
            mem[a] = self.take_bits(st.lp, 1)
            log_delta = -self.log_bits.pop() if self.log_bits else -1
        elif op == "PUSH":
            if st.sp >= len(mem):
                raise self.fail("E_STACK_OVERFLOW", "stack segment overflow")
            if args[0][0] in (_IMM, _AREF):
                mem[st.sp] += self.value(args[0])
            else:
                a = self.address(args[0])
                mem[st.sp], mem[a] = mem[a], 0
            st.sp += 1
        elif op == "POP":
            if st.sp <= st.data_size:
                raise self.fail("E_SEGMENT", "stack segment underflow")
            st.sp -= 1
            if args[0][0] in (_IMM, _AREF):
                mem[st.sp] -= self.value(args[0])
                if mem[st.sp] != 0:
                    raise self.fail("E_POP_MISMATCH", "popped value differs from the expected constant")
            else:
                a = self.address(args[0])
                if mem[a] != 0:
                    raise self.fail("E_POP_NONZERO_DEST", "POP destination is not zero")
                self.store(a, mem[st.sp])
                mem[st.sp] = 0
        elif op == "GOTO":
            next_pc = self.value(args[0])
        elif op in ("GOTOIF", "GOTOIFN"):
            c = self.value(args[0])
            if (c != 0) == (op == "GOTOIF"):
                next_pc = self.value(args[1])
        elif op == "CMFRM":
            if self.debug:
                self.check_arrival(pc, True, args[0])
        elif op in ("CMFRMIF", "CMFRMIFN"):
            if self.debug:
                c = self.value(args[0])
                self.check_arrival(pc, (c != 0) == (op == "CMFRMIF"), args[1])
        elif op == "HALT":
            st.halted = True
            next_pc = pc
        else:  # pragma: no cover
            raise self.fail("E_SEGMENT", f"unknown opcode {op}")

        led = self.ledger
        cost = self.costs[pc]
        if cost:
            led.total_energy += cost
            led.energy[pc] = led.energy.get(pc, 0) + cost
        if log_delta:
            self.account(pc, log_delta)
        led.executions[pc] = led.executions.get(pc, 0) + 1
        led.steps += 1
        if self.config.trace:
            self.trace.append(f"{led.steps} {pc} {self.program.instructions[pc]} dE={cost:g} dL={log_delta}")
        if self.debug and pc in self.checks:
            for cell, line in self.checks[pc]:
                if self.value(cell) != 0:
                    self.violate("protected condition cell left nonzero: backward condition "
                                 "disagrees with the forward jump", line)
        self.prev = pc
        st.pc = next_pc

    def check_arrival(self, pc: int, jumped: bool, source) -> None:
        """Debug check that a landing was reached the way its condition says."""
        st = self.state
        if source[0] == _SLOT:
            expected = st.mem[st.sp + source[1]] - 1
        else:
            expected = self.value(source)
        ok = self.prev == expected if jumped else (self.prev is None or self.prev == pc - 1)
        if ok:
            return
        if pc in self.landings:
            instr = self.program.instructions[pc]
            self.violate("backward condition disagrees with how the label was reached", instr.line)
            return
        raise self.fail("E_CMFRM_MISMATCH",
                        f"arrived from {self.prev} but the landing expects {'jump from ' + str(expected) if jumped else 'fall-through'}")

    def run(self) -> RunResult:
        limit = self.config.step_limit
        halt_on_violation = self.config.on_violation == "halt"
        while not self.state.halted:
            if self.ledger.steps >= limit:
                raise self.fail("E_STEP_LIMIT", f"step limit {limit} reached")
            self.step()
            if self.violations and halt_on_violation:
                break
        return RunResult(self.state, self.ledger, self.violations, self.trace)


def step(state: MachineState, program: LowProgram, ledger: CostLedger, config: VmConfig) -> None:
    """Execute one instruction in place (slow path; ``run`` decodes once)."""
    Machine(program, config, state, ledger).step()


def run(program: LowProgram, config: VmConfig | None = None, inputs: dict[str, int] | None = None) -> RunResult:
    config = config or VmConfig()
    machine = Machine(program, config)
    for name, value in (inputs or {}).items():
        if name not in program.layout:
            continue
        machine.state.mem[program.layout[name]] = wrap(value, config.word_width)
    return machine.run()


def pointer_invariants_hold(state: MachineState, w: int) -> bool:
    """All stack cells at or above sp and all log bits at or above lp are zero."""
    if any(state.mem[state.sp:]):
        return False
    word, bit = divmod(state.lp, w)
    if word < len(state.log) and state.log[word] >> bit:
        return False
    return not any(state.log[word + 1:])


# ---------------------------------------------------------------------------
# enumeration oracle


@dataclass
class ImageResult:
    opcode: str
    word_width: int
    inputs: int
    image: int

    @property
    def injective(self) -> bool:
        return self.inputs == self.image

    @property
    def cost(self) -> float:
        return math.log2(self.inputs / self.image) if self.inputs else 0.0


_DATA_OPS = {"ADD": 2, "SUB": 2, "MULT": 2, "MULTINV": 2, "NEG": 1, "SWAP": 2, "MOVE": 2, "AND": 2, "OR": 2,
             "ACC": 3, "UNACC": 3}


def enumerate_function(fn: Callable, domain: Iterable) -> ImageResult:
    """Image of an arbitrary function over a finite domain."""
    inputs = 0
    image = set()
    for x in domain:
        inputs += 1
        image.add(fn(x))
    return ImageResult(getattr(fn, "__name__", "function"), 0, inputs, len(image))


def enumerate_image(opcode: str, w: int, selector: str | None = None) -> ImageResult:
    """Count the image of an instruction's transition over all operand values.

    Data instructions are enumerated through the pure ALU at any width;
    stack, log, jump and HALT instructions run on a small machine (w >= 4)
    whose state is the whole memory plus pc, sp and lp.
    """
    if opcode in _DATA_OPS:
        n = _DATA_OPS[opcode]
        sels = [selector] if selector else (["*", "/", "<=", ">=", "!=", "=="] if n == 3 else [None])
        inputs = 0
        image = set()
        values = range(-(1 << (w - 1)), 1 << (w - 1)) if w > 1 else (0, -1)
        for sel in sels:
            for combo in _product(values, n):
                try:
                    out = alu(opcode, w, combo, sel)
                except VmError:
                    continue
                inputs += 1
                image.add((sel,) + out)
        return ImageResult(opcode if not selector else f"{opcode}({selector})", w, inputs, len(image))
    return _enumerate_machine(opcode, w)


def _product(values, n):
    if n == 0:
        yield ()
        return
    for head in values:
        for rest in _product(values, n - 1):
            yield (head,) + rest


def _enumerate_machine(opcode: str, w: int) -> ImageResult:
    if w < 4:
        raise ValueError("machine-level enumeration needs w >= 4")
    x, c = Cell("x"), Cell("c")
    target = Label("T")
    if opcode in ("LPUSH", "LPOP", "LPUSHBIT", "LPOPBIT", "PUSH", "POP"):
        code = [ins(opcode, x)]
    elif opcode in ("GOTO", "CMFRM"):
        code = [ins(opcode, target)]
    elif opcode in ("GOTOIF", "GOTOIFN", "CMFRMIF", "CMFRMIFN"):
        code = [ins(opcode, c, target)]
    elif opcode == "HALT":
        code = [ins("HALT")]
    else:
        raise ValueError(f"unknown opcode {opcode}")
    # T doubles as the landing's named source and the jump's target
    code = code + [ins("HALT", name="T"), ins("ADD", x, Imm(0)), ins("ADD", c, Imm(0))]
    low = assemble(code, BackendConfig(stack_size=2, log_size=2))
    config = VmConfig(word_width=w, mode=Mode.RELEASE, record_events=False)
    vals = range(-(1 << (w - 1)), 1 << (w - 1))
    inputs = 0
    image = set()
    for state in _machine_states(low, w, vals):
        m = Machine(low, config, state)
        try:
            m.step()
        except VmError:
            continue
        inputs += 1
        s = m.state
        image.add((tuple(s.mem), tuple(s.log), s.pc, s.sp, s.lp, s.halted))
    return ImageResult(opcode, w, inputs, len(image))


def _machine_states(low: LowProgram, w: int, vals) -> Iterable[MachineState]:
    """Reachable-shaped states: zeros above sp and lp, arbitrary below."""
    D = low.data_size
    xa, ca = low.layout["x"], low.layout["c"]
    for xv in vals:
        for cv in (0, 1, -1):
            # stack: sp at base or base+1 with an arbitrary slot below
            for depth, slot in [(0, 0)] + [(1, v) for v in vals]:
                # log: empty, one full word, or a single bit
                for lp, logw in [(0, 0)] + [(w, unsigned(v, w)) for v in vals] + [(1, 0), (1, 1)]:
                    mem = [0] * (D + 2)
                    mem[xa], mem[ca] = xv, cv
                    mem[D] = slot
                    yield MachineState(mem, [logw, 0], D, 0, D + depth, lp)
