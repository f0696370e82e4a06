"""SMT-LIB2 export, so an external solver can cross-check the enumeration backend."""
from __future__ import annotations

import re
import subprocess

from ..dsl.ast import BOOL, Binary, BoolLit, Expr, IntLit, Unary, Var
from .formula import FORALL, Quantifier, children

_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/-][A-Za-z0-9~!@$%^&*_+=<>.?/-]*$")
_RESERVED = frozenset(
    "and or not xor ite let forall exists distinct true false par as _ ! assert "
    "check-sat declare-const declare-fun define-fun set-logic Int Bool div mod abs".split()
)

# SMT-LIB div/mod are Euclidean; the language truncates toward zero and the
# engine defines x / 0 = x % 0 = 0, so both are spelled out.
_PRELUDE_DIV = (
    "(define-fun datamin_div ((a Int) (b Int)) Int\n"
    "  (ite (= b 0) 0\n"
    "    (ite (= (< a 0) (< b 0)) (div (abs a) (abs b)) (- (div (abs a) (abs b))))))"
)
_PRELUDE_MOD = (
    "(define-fun datamin_mod ((a Int) (b Int)) Int\n"
    "  (ite (= b 0) 0 (- a (* b (datamin_div a b)))))"
)

_OPS = {
    "+": "+", "-": "-", "*": "*", "/": "datamin_div", "%": "datamin_mod",
    "<": "<", "<=": "<=", ">": ">", ">=": ">=", "==": "=", "!=": "distinct",
    "&&": "and", "||": "or",
}


def symbol(name: str) -> str:
    if _SIMPLE.match(name) and name not in _RESERVED:
        return name
    return "|" + name.replace("|", "_").replace("\\", "_") + "|"


def _flatten(node, op):
    if isinstance(node, Binary) and node.op == op:
        return _flatten(node.left, op) + _flatten(node.right, op)
    return [node]


def _bounds(sym, domain):
    if domain is None or domain.kind == BOOL:
        return None
    return f"(and (<= {_int(domain.lo)} {sym}) (<= {sym} {_int(domain.hi)}))"


def _int(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def term(e: Expr) -> str:
    if isinstance(e, IntLit):
        return _int(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return symbol(e.name)
    if isinstance(e, Unary):
        return f"(- {term(e.arg)})" if e.op == "-" else f"(not {term(e.arg)})"
    if isinstance(e, Binary):
        if e.op in ("&&", "||"):
            parts = _flatten(e, e.op)
            return f"({_OPS[e.op]} {' '.join(term(p) for p in parts)})"
        return f"({_OPS[e.op]} {term(e.left)} {term(e.right)})"
    if isinstance(e, Quantifier):
        sym = symbol(e.var)
        sort = "Bool" if e.domain is not None and e.domain.kind == BOOL else "Int"
        guard = _bounds(sym, e.domain)
        body = term(e.body)
        if guard is not None:
            body = f"(=> {guard} {body})" if e.kind == FORALL else f"(and {guard} {body})"
        return f"({e.kind} (({sym} {sort})) {body})"
    raise TypeError(f"not a formula: {e!r}")


def _uses(e: Expr, op: str) -> bool:
    if isinstance(e, Binary) and e.op == op:
        return True
    return any(_uses(c, op) for c in children(e))


def to_smtlib(f: Expr, env, booleans=()) -> str:
    """A self-contained SMT-LIB2 script asserting `f` under the domains in `env`.

    Variables with no domain are declared Int unless listed in `booleans`.
    """
    lines = ["; generated by datamin", "(set-logic ALL)"]
    uses_mod = _uses(f, "%")
    if uses_mod or _uses(f, "/"):
        lines.append(_PRELUDE_DIV)
    if uses_mod:
        lines.append(_PRELUDE_MOD)
    for name, domain in env.items():
        boolean = name in booleans if domain is None else domain.kind == BOOL
        sort = "Bool" if boolean else "Int"
        lines.append(f"(declare-const {symbol(name)} {sort})")
    for name, domain in env.items():
        bound = _bounds(symbol(name), domain)
        if bound is not None:
            lines.append(f"(assert {bound})")
    lines.append(f"(assert {term(f)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def run_solver(script: str, solver: str, timeout: float = 60.0) -> str:
    """Pipe a script to an external solver binary; returns 'sat', 'unsat' or 'unknown'."""
    cmd = [solver, "-in"] if "z3" in solver.rsplit("/", 1)[-1] else [solver]
    proc = subprocess.run(cmd, input=script, capture_output=True, text=True, timeout=timeout)
    out = proc.stdout.strip().splitlines()
    if not out:
        raise RuntimeError(f"solver {solver!r} produced no answer: {proc.stderr.strip()}")
    return out[-1].strip()
