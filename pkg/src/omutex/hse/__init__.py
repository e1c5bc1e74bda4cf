"""Guarded-command (handshaking-expansion) front end: AST, parser,
compiler to kernel instructions, and the timed execution engine."""

from omutex.hse import ast
from omutex.hse.ast import (
    Guard, Ref, Not, And, Or, conj, disj,
    Statement, Skip, Assign, Wait, Seq, Par, DetSel, NondetSel, Loop,
    ProcessSet, format_guard, format_statement, format_process_set,
)
from omutex.hse.parser import HseSyntaxError, parse_hse, parse_guard
from omutex.hse.compiler import (
    CompileError, CompiledProcessSet, compile_process_set,
)
from omutex.hse.engine import Engine, run

__all__ = [
    "ast",
    "Guard", "Ref", "Not", "And", "Or", "conj", "disj",
    "Statement", "Skip", "Assign", "Wait", "Seq", "Par",
    "DetSel", "NondetSel", "Loop", "ProcessSet",
    "format_guard", "format_statement", "format_process_set",
    "HseSyntaxError", "parse_hse", "parse_guard",
    "CompileError", "CompiledProcessSet", "compile_process_set",
    "Engine", "run",
]
