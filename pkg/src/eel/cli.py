"""``eelc``: build, check, run, annotate and emit Eel programs.

Exit codes: 0 success, 1 diagnostics reported as errors (including
compile errors and runtime convention violations), 2 usage error,
3 runtime machine error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import frontend as hl
from . import midend as ir
from .annotator import attribute_costs, render_report
from .backend import format_low, line_map_json
from .checker import Severity, check_static, diagnostics_json
from .errors import EelError, VmError
from .pipeline import execute, load
from .vm import DEFAULT_STEP_LIMIT, VmConfig

EXIT_OK, EXIT_DIAG, EXIT_USAGE, EXIT_VM = 0, 1, 2, 3

_COLORS = {"error": "\033[31m", "warning": "\033[33m"}


def _use_color(stream) -> bool:
    setting = os.environ.get("EELC_COLOR", "auto")
    if setting == "always":
        return True
    if setting == "never":
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _paint(text: str, severity: str) -> str:
    if not _use_color(sys.stderr):
        return text
    return text.replace(f" {severity} ", f" {_COLORS[severity]}{severity}\033[0m ", 1)


def _error(path: str, e: EelError) -> None:
    line = e.line if e.line is not None else 0
    sys.stderr.write(_paint(f"{path}:{line}: error {e.code} {e.message}", "error") + "\n")


def _width(text: str) -> int:
    w = int(text)
    if not 4 <= w <= 64:
        raise argparse.ArgumentTypeError("word width must be between 4 and 64")
    return w


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _assignment(text: str) -> tuple[str, int]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError("expected NAME=VALUE")
    return name.strip(), int(value)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eelc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, run_flags: bool) -> None:
        sp.add_argument("input", help=".eel, .eir or .elo file")
        sp.add_argument("--word-width", type=_width, default=64)
        sp.add_argument("--strict", action="store_true", help="report convention warnings as errors")
        sp.add_argument("--no-implicit-unroll", action="store_true",
                        help="do not insert the Unroll that ends a block with pending log blocks")
        sp.add_argument("--allow-tabs", action="store_true")
        sp.add_argument("--diag-format", choices=("text", "json"), default="text")
        if run_flags:
            sp.add_argument("--mode", choices=("debug", "release"), default="debug")
            sp.add_argument("--cost-model", choices=("paper", "entropy"), default="paper")
            sp.add_argument("--log-accounting", choices=("word", "tight"), default="word")
            sp.add_argument("--step-limit", type=_positive, default=DEFAULT_STEP_LIMIT)
            sp.add_argument("--trace", action="store_true", help="print one line per executed instruction")
            sp.add_argument("--on-violation", choices=("halt", "continue"), default="halt")
            sp.add_argument("--set", type=_assignment, action="append", default=[], metavar="NAME=VALUE",
                            help="initial value of a variable (repeatable)")
            sp.add_argument("--ledger-json", type=Path, help="write the ledger as JSON to this path")

    b = sub.add_parser("build", help="compile to .eir, .elo and .elo.map")
    common(b, False)
    b.add_argument("-o", "--output", type=Path, help="output path stem (default: next to the input)")
    c = sub.add_parser("check", help="static convention checks")
    common(c, False)
    r = sub.add_parser("run", help="compile and execute")
    common(r, True)
    a = sub.add_parser("annotate", help="run and write per-line (E, L) annotations")
    common(a, True)
    a.add_argument("-o", "--output", type=Path, help="output path stem (default: next to the input)")
    a.add_argument("--format", choices=("text", "json"), default="text", help="what to print to stdout")
    e = sub.add_parser("emit", help="print one level to stdout")
    common(e, False)
    e.add_argument("--level", choices=("high", "ir", "low"), required=True)
    return p


def _vm_config(args) -> VmConfig:
    return VmConfig(word_width=args.word_width, step_limit=args.step_limit, mode=args.mode,
                    cost_model=args.cost_model, log_accounting=args.log_accounting,
                    on_violation=args.on_violation, trace=args.trace)


def _report_diagnostics(args, diags) -> int:
    if args.diag_format == "json":
        sys.stdout.write(diagnostics_json(diags, args.input))
    else:
        for d in diags:
            sys.stderr.write(_paint(d.format(args.input), d.severity.value) + "\n")
    return EXIT_DIAG if any(d.severity == Severity.ERROR for d in diags) else EXIT_OK


def _stem(args) -> Path:
    if getattr(args, "output", None):
        return args.output
    path = Path(args.input)
    return path.with_suffix("")


def _footer(result) -> str:
    led = result.ledger
    energy = int(led.total_energy) if float(led.total_energy).is_integer() else round(led.total_energy, 4)
    return f"// E={energy} L={led.total_pushed} peak={led.peak} final={led.occupancy} steps={led.steps}"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    path = Path(args.input)
    if not path.exists():
        sys.stderr.write(f"eelc: {args.input}: no such file\n")
        return EXIT_USAGE
    if args.command == "emit" and args.level == "high" and path.suffix != ".eel":
        sys.stderr.write("eelc: --level=high needs a .eel input\n")
        return EXIT_USAGE

    try:
        comp = load(path, args.word_width, not args.no_implicit_unroll, args.strict, args.allow_tabs)
    except EelError as e:
        _error(args.input, e)
        return EXIT_DIAG

    status = EXIT_OK
    if args.command != "emit" or args.diag_format == "json":
        status = _report_diagnostics(args, comp.diagnostics)
    if args.command == "check":
        return status
    if status != EXIT_OK:
        return status

    if args.command == "emit":
        if args.level == "high":
            sys.stdout.write(hl.format_high(comp.high))
        elif args.level == "ir":
            if comp.ir is None:
                sys.stderr.write("eelc: --level=ir needs a .eel or .eir input\n")
                return EXIT_USAGE
            sys.stdout.write(ir.print_ir(comp.ir))
        else:
            sys.stdout.write(format_low(comp.low))
        return EXIT_OK

    if args.command == "build":
        stem = _stem(args)
        if comp.ir is not None and path.suffix != ".eir":
            stem.with_suffix(".eir").write_text(ir.print_ir(comp.ir), encoding="utf-8")
        stem.with_suffix(".elo").write_text(format_low(comp.low), encoding="utf-8")
        Path(str(stem) + ".elo.map").write_text(line_map_json(comp.low), encoding="utf-8")
        return EXIT_OK

    try:
        result = execute(comp.low, _vm_config(args), dict(args.set))
    except VmError as e:
        _error(args.input, e)
        return EXIT_VM
    for line in result.trace:
        print(line)
    if args.ledger_json:
        args.ledger_json.write_text(result.ledger.to_json(), encoding="utf-8")
    for v in result.violations:
        sys.stderr.write(_paint(f"{args.input}:{v.line or 0}: error {v.code} {v.message}", "error") + "\n")

    if args.command == "run":
        for name, value in result.state.variables(comp.low).items():
            print(f"{name} = {value}")
        print(_footer(result))
    else:
        report = attribute_costs(result.ledger, comp.low)
        stem = _stem(args)
        if path.suffix == ".eel":
            source = path.read_text(encoding="utf-8").replace("\r\n", "\n")
            annotated = render_report(report, source)
            Path(str(stem) + ".annotated.eel").write_text(annotated, encoding="utf-8")
        else:
            annotated = render_report(report, "")
        as_json = render_report(report, "", "json")
        Path(str(stem) + ".cost.json").write_text(as_json, encoding="utf-8")
        sys.stdout.write(as_json if args.format == "json" else annotated)
    return EXIT_DIAG if result.violations else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
