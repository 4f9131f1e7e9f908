"""Glue for running the three levels end to end."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import frontend as hl
from . import midend as ir
from .backend import BackendConfig, LowProgram, lower_ir_to_low, parse_low
from .checker import Diagnostic, check_static, instrument_dynamic
from .vm import RunResult, VmConfig, run


@dataclass
class Compilation:
    low: LowProgram
    high: hl.HighProgram | None = None
    ir: ir.IrProgram | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)


def compile_source(source: str, word_width: int = 64, implicit_unroll: bool = True, strict: bool = False,
                   allow_tabs: bool = False, backend: BackendConfig | None = None) -> Compilation:
    high = hl.parse_source(source, word_width, allow_tabs)
    diagnostics = check_static(high, implicit_unroll=implicit_unroll, strict=strict)
    program, plan = ir.lower_high_to_ir(high, implicit_unroll=implicit_unroll)
    low = lower_ir_to_low(program, plan, backend, ir_line_of=ir.ir_lines(program))
    return Compilation(low, high, program, diagnostics)


def compile_ir(text: str, word_width: int = 64, backend: BackendConfig | None = None) -> Compilation:
    program = ir.parse_ir(text, word_width)
    low = lower_ir_to_low(program, None, backend)
    return Compilation(low, None, program)


def load(path: str | Path, word_width: int = 64, implicit_unroll: bool = True, strict: bool = False,
         allow_tabs: bool = False) -> Compilation:
    """Enter the pipeline at the level given by the file extension."""
    path = Path(path)
    text = path.read_text(encoding="utf-8").replace("\r\n", "\n")
    if path.suffix == ".eir":
        return compile_ir(text, word_width)
    if path.suffix == ".elo":
        map_path = path.with_name(path.name + ".map")
        line_map = map_path.read_text(encoding="utf-8") if map_path.exists() else None
        return Compilation(parse_low(text, line_map))
    return compile_source(text, word_width, implicit_unroll, strict, allow_tabs)


def execute(low: LowProgram, config: VmConfig | None = None, inputs: dict[str, int] | None = None) -> RunResult:
    """Run a compiled program, adding the snapshot hooks in debug mode."""
    config = config or VmConfig()
    if config.mode.value == "debug":
        low = instrument_dynamic(low)
    return run(low, config, inputs)


def run_source(source: str, config: VmConfig | None = None, inputs: dict[str, int] | None = None,
               implicit_unroll: bool = True) -> tuple[Compilation, RunResult]:
    config = config or VmConfig()
    comp = compile_source(source, config.word_width, implicit_unroll)
    return comp, execute(comp.low, config, inputs)
