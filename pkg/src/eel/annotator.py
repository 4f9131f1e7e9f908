"""Attribute energy and log bits back to source lines as (E, L) pairs."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .backend import LowProgram
from .errors import EelError
from .vm import CostLedger


@dataclass
class LineCost:
    energy: float = 0.0
    pushed: int = 0
    # dichotomy bookkeeping: energy spent by log-region code, bits pushed outside
    energy_in_log: float = 0.0
    pushed_out_of_log: int = 0

    def add(self, energy: float, pushed: int, in_log: bool) -> None:
        self.energy += energy
        self.pushed += pushed
        if in_log:
            self.energy_in_log += energy
        else:
            self.pushed_out_of_log += pushed


@dataclass
class CostReport:
    lines: dict[int, LineCost] = field(default_factory=dict)
    ir_lines: dict[int, LineCost] = field(default_factory=dict)
    total_energy: float = 0.0
    total_pushed: int = 0
    peak: int = 0
    final: int = 0
    steps: int = 0
    cost_model: str = "paper"
    log_accounting: str = "word"

    def dichotomy_exceptions(self) -> list[int]:
        """Lines whose log-region code spent energy or whose other code pushed bits."""
        return sorted(n for n, c in self.lines.items() if c.energy_in_log or c.pushed_out_of_log)

    def to_dict(self) -> dict:
        def table(rows):
            return {str(n): {"E": c.energy, "L": c.pushed} for n, c in sorted(rows.items())}

        return {
            "cost_model": self.cost_model,
            "log_accounting": self.log_accounting,
            "totals": {"E": self.total_energy, "L_pushed": self.total_pushed, "peak_log_bits": self.peak,
                       "final_log_bits": self.final, "steps": self.steps},
            "lines": table(self.lines),
            "ir_lines": table(self.ir_lines),
        }


def attribute_costs(ledger: CostLedger, program: LowProgram) -> CostReport:
    """Sum the ledger per high level and IR line.

    Compiler-synthesized instructions carry line 0 and are reported in that
    bucket.
    """
    report = CostReport(total_energy=ledger.total_energy, total_pushed=ledger.total_pushed, peak=ledger.peak,
                        final=ledger.occupancy, steps=ledger.steps, cost_model=ledger.cost_model,
                        log_accounting=ledger.log_accounting)
    for idx in ledger.executions:
        instr = program.instructions[idx]
        if instr.line is None or instr.ir_line is None:
            raise EelError("E_MAP_GAP", f"instruction {idx} ({instr}) has no source line")
        energy = ledger.energy.get(idx, 0.0)
        pushed = ledger.pushed.get(idx, 0)
        report.lines.setdefault(instr.line, LineCost()).add(energy, pushed, instr.in_log)
        report.ir_lines.setdefault(instr.ir_line, LineCost()).add(energy, pushed, instr.in_log)
    return report


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.4f}"


def render_report(report: CostReport, source: str, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=1) + "\n"
    out = []
    for n, text in enumerate(source.splitlines(), start=1):
        cost = report.lines.get(n)
        if cost and (cost.energy or cost.pushed):
            text = f"{text}  // (E={_num(cost.energy)}, L={cost.pushed})"
        out.append(text)
    synthesized = report.lines.get(0)
    if synthesized and (synthesized.energy or synthesized.pushed):
        out.append(f"// synthesized code: (E={_num(synthesized.energy)}, L={synthesized.pushed})")
    out.append(f"// totals: E={_num(report.total_energy)} L={report.total_pushed} peak={report.peak} "
               f"final={report.final} steps={report.steps} ({report.cost_model}, {report.log_accounting})")
    return "\n".join(out) + "\n"
