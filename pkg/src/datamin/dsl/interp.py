"""Concrete semantics: programs are compiled to Python functions once and cached.

This is the reference execution path. It shares no code with the symbolic
executor or the vectorised formula engine, which is what lets the oracle
check those routes against it.
"""
from __future__ import annotations

import threading
import weakref
from typing import Callable, Mapping

from ..errors import DivisionByZero, DomainError, LoopBoundExceeded, PreconditionViolated
from .ast import (
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

DEFAULT_LOOP_BOUND = 256

_PY_OPS = {
    "+": "+", "-": "-", "*": "*",
    "<": "<", "<=": "<=", ">": ">", ">=": ">=", "==": "==", "!=": "!=",
    "&&": "and", "||": "or",
}


def div_trunc(a: int, b: int) -> int:
    """Integer division rounding toward zero."""
    if b == 0:
        raise DivisionByZero("division by zero")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def mod_trunc(a: int, b: int) -> int:
    """Remainder with the sign of the dividend."""
    return a - b * div_trunc(a, b)


def _py_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return repr(e.value)
    if isinstance(e, BoolLit):
        return repr(e.value)
    if isinstance(e, Var):
        return f"v_{e.name}"
    if isinstance(e, Unary):
        return f"(-{_py_expr(e.arg)})" if e.op == "-" else f"(not {_py_expr(e.arg)})"
    if isinstance(e, Binary):
        if e.op == "/":
            return f"_div({_py_expr(e.left)}, {_py_expr(e.right)})"
        if e.op == "%":
            return f"_mod({_py_expr(e.left)}, {_py_expr(e.right)})"
        if e.op in ("&&", "||"):
            # flattened so long guard chains do not nest parentheses
            parts = []
            node = e
            while isinstance(node, Binary) and node.op == e.op:
                parts.append(node.right)
                node = node.left
            parts.append(node)
            joined = f" {_PY_OPS[e.op]} ".join(_py_expr(x) for x in reversed(parts))
            return f"({joined})"
        return f"({_py_expr(e.left)} {_PY_OPS[e.op]} {_py_expr(e.right)})"
    raise TypeError(f"cannot compile {e!r}")


class _Emitter:
    def __init__(self):
        self.lines = []
        self.loops = 0

    def block(self, stmts, depth):
        pad = "    " * depth
        if not stmts:
            self.lines.append(f"{pad}pass")
        for s in stmts:
            if isinstance(s, (VarDecl, Assign)):
                value = s.init if isinstance(s, VarDecl) else s.expr
                self.lines.append(f"{pad}v_{s.name} = {_py_expr(value)}")
            elif isinstance(s, Return):
                self.lines.append(f"{pad}return {_py_expr(s.expr)}")
            elif isinstance(s, If):
                self.lines.append(f"{pad}if {_py_expr(s.cond)}:")
                self.block(s.then, depth + 1)
                orelse = s.orelse
                # else-if chains become elif so long decision tables stay shallow
                while len(orelse) == 1 and isinstance(orelse[0], If):
                    self.lines.append(f"{pad}elif {_py_expr(orelse[0].cond)}:")
                    self.block(orelse[0].then, depth + 1)
                    orelse = orelse[0].orelse
                if orelse:
                    self.lines.append(f"{pad}else:")
                    self.block(orelse, depth + 1)
            elif isinstance(s, While):
                self.loops += 1
                n = f"_n{self.loops}"
                self.lines.append(f"{pad}{n} = 0")
                self.lines.append(f"{pad}while {_py_expr(s.cond)}:")
                self.lines.append(f"{pad}    {n} += 1")
                self.lines.append(f"{pad}    if {n} > _bound: _exceeded()")
                self.block(s.body, depth + 1)
            else:
                raise TypeError(f"cannot compile {s!r}")


def _exceeded():
    raise LoopBoundExceeded("loop exceeded unroll bound")


class CompiledProgram:
    """A program's body and precondition as plain Python callables.

    `body` and `precondition` take input values positionally, in declaration
    order, and perform no domain checking.
    """

    def __init__(self, program: Program, loop_bound: int = DEFAULT_LOOP_BOUND):
        self.name = program.name
        self.params = program.params
        self.input_names = program.input_names
        self.loop_bound = loop_bound
        args = ", ".join(f"v_{name}" for name in program.input_names)
        em = _Emitter()
        em.lines.append(f"def _body({args}):")
        em.block(program.body, 1)
        em.lines.append(f"def _pre({args}):")
        em.lines.append(f"    return {_py_expr(program.precondition)}")
        self.source = "\n".join(em.lines)
        ns = {"_div": div_trunc, "_mod": mod_trunc, "_bound": loop_bound, "_exceeded": _exceeded}
        exec(compile(self.source, f"<datamin:{program.name}>", "exec"), ns)
        self.body: Callable = ns["_body"]
        self.precondition: Callable = ns["_pre"]

    def args(self, valuation: Mapping) -> tuple:
        """Validate a name -> value mapping and order it as positional args."""
        out = []
        for p in self.params:
            if p.name not in valuation:
                raise DomainError(f"no value for input {p.name!r}")
            value = valuation[p.name]
            if not p.domain.contains(value):
                raise DomainError(f"{p.name}={value!r} is outside {p.domain}")
            out.append(value)
        extra = set(valuation) - set(self.input_names)
        if extra:
            raise DomainError(f"unknown inputs {sorted(extra)}")
        return tuple(out)

    def __call__(self, valuation: Mapping):
        args = self.args(valuation)
        if not self.precondition(*args):
            raise PreconditionViolated(f"{dict(valuation)} violates the precondition of {self.name}")
        return self.body(*args)


_cache_lock = threading.Lock()
# keyed by id(): hashing a frozen Program walks its whole tree
_cache: dict = {}


def _forget(key, ref):
    with _cache_lock:
        entry = _cache.get(key)
        if entry is not None and entry[0] is ref:
            del _cache[key]


def compile_program(program: Program, loop_bound: int = DEFAULT_LOOP_BOUND) -> CompiledProgram:
    """Compiled form of `program`, cached per program object and loop bound."""
    key = id(program)
    with _cache_lock:
        entry = _cache.get(key)
        if entry is None or entry[0]() is not program:
            entry = _cache[key] = (weakref.ref(program, lambda r, k=key: _forget(k, r)), {})
        compiled = entry[1].get(loop_bound)
    if compiled is None:
        compiled = CompiledProgram(program, loop_bound)
        with _cache_lock:
            entry[1][loop_bound] = compiled
    return compiled


def evaluate(program: Program, valuation: Mapping, loop_bound: int = DEFAULT_LOOP_BOUND):
    """Run `program` on a name -> value mapping.

    Raises DomainError, PreconditionViolated, DivisionByZero or
    LoopBoundExceeded.
    """
    return compile_program(program, loop_bound)(valuation)
