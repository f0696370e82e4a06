"""The minimiser-input language: syntax, static checks, concrete semantics."""
from .ast import BOOL, INT, Domain, Param, Program
from .interp import DEFAULT_LOOP_BOUND, compile_program, evaluate
from .parser import check_program, parse, parse_expr, parse_file, parse_programs, type_of
from .printer import format_expr, format_program

__all__ = [
    "BOOL",
    "INT",
    "DEFAULT_LOOP_BOUND",
    "Domain",
    "Param",
    "Program",
    "check_program",
    "compile_program",
    "evaluate",
    "format_expr",
    "format_program",
    "parse",
    "parse_expr",
    "parse_file",
    "parse_programs",
    "type_of",
]
