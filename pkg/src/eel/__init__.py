"""Eel: a partially reversible language compiled through three levels to a word machine."""
from .errors import CompileError, EelError, LoweringError, ParseError, TokenizeError, VmError
from .pipeline import Compilation, compile_source, execute, load, run_source

__all__ = [
    "Compilation", "CompileError", "EelError", "LoweringError", "ParseError", "TokenizeError", "VmError",
    "compile_source", "execute", "load", "run_source",
]
