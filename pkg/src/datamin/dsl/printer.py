"""Pretty-printer producing text that parses back to the same AST."""
from __future__ import annotations

from .ast import (
    BOOL,
    Assign,
    Binary,
    BoolLit,
    Expr,
    If,
    IntLit,
    Program,
    Return,
    Unary,
    Var,
    VarDecl,
    While,
)

_PREC = {
    "||": 1, "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
_UNARY_PREC = 7


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) or (isinstance(e, IntLit) and e.value < 0):
        return _UNARY_PREC
    return 8


def format_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        inner = format_expr(e.arg)
        if _prec(e.arg) < _UNARY_PREC or isinstance(e.arg, Unary) or (
            isinstance(e.arg, IntLit) and e.arg.value < 0
        ):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, Binary):
        p = _PREC[e.op]
        left = format_expr(e.left)
        right = format_expr(e.right)
        if _prec(e.left) < p:
            left = f"({left})"
        # left-associative: an equal-precedence right operand needs parens
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    # quantified formulas print in a non-DSL notation, for diagnostics only
    from ..logic.formula import Quantifier

    if isinstance(e, Quantifier):
        dom = "int" if e.domain is None else str(e.domain)
        return f"({e.kind} {e.var}: {dom}. {format_expr(e.body)})"
    raise TypeError(f"not an expression: {e!r}")


def _format_block(stmts, indent, out):
    pad = "    " * indent
    for s in stmts:
        if isinstance(s, VarDecl):
            out.append(f"{pad}var {s.name} = {format_expr(s.init)};")
        elif isinstance(s, Assign):
            out.append(f"{pad}{s.name} = {format_expr(s.expr)};")
        elif isinstance(s, Return):
            out.append(f"{pad}return {format_expr(s.expr)};")
        elif isinstance(s, While):
            out.append(f"{pad}while ({format_expr(s.cond)}) {{")
            _format_block(s.body, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(s, If):
            out.append(f"{pad}if ({format_expr(s.cond)}) {{")
            _format_block(s.then, indent + 1, out)
            if s.orelse:
                out.append(f"{pad}}} else {{")
                _format_block(s.orelse, indent + 1, out)
            out.append(f"{pad}}}")
        else:
            raise TypeError(f"not a statement: {s!r}")


def format_program(program: Program) -> str:
    params = ", ".join(
        f"{p.name}: {'bool' if p.domain.kind == BOOL else f'int[{p.domain.lo}..{p.domain.hi}]'}"
        for p in program.params
    )
    head = f"program {program.name}({params}) -> {program.output}"
    if program.requires is not None:
        head += f"\n    requires {format_expr(program.requires)};\n{{"
    else:
        head += " {"
    out = [head]
    _format_block(program.body, 1, out)
    out.append("}")
    return "\n".join(out) + "\n"
