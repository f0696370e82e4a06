"""Formulas: DSL expressions plus finite-domain quantifiers.

Smart constructors fold constants as they build, which is the only
simplification the rest of the toolkit relies on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional

from ..dsl.ast import (
    FALSE,
    TRUE,
    Binary,
    BoolLit,
    Domain,
    Expr,
    IntLit,
    Unary,
    Var,
)
from ..dsl.interp import div_trunc, mod_trunc

Formula = Expr
FORALL = "forall"
EXISTS = "exists"


@dataclass(frozen=True)
class Quantifier(Expr):
    """`kind var: domain. body`.

    A `domain` of None stands for an unbounded integer. Only existentials may
    be unbounded, and then the variable must occur solely in positive
    equalities `var == e` so it can be eliminated by the one-point rule.
    """

    kind: str
    var: str
    domain: Optional[Domain]
    body: Expr


def forall(var: str, domain: Domain, body: Formula) -> Formula:
    if isinstance(body, BoolLit):
        return body
    return Quantifier(FORALL, var, domain, body)


def exists(var: str, domain: Optional[Domain], body: Formula) -> Formula:
    if isinstance(body, BoolLit):
        return body
    return Quantifier(EXISTS, var, domain, body)


def conj(*parts: Formula) -> Formula:
    out = []
    for p in parts:
        if isinstance(p, BoolLit):
            if not p.value:
                return FALSE
            continue
        out.append(p)
    if not out:
        return TRUE
    acc = out[0]
    for p in out[1:]:
        acc = Binary("&&", acc, p)
    return acc


def disj(*parts: Formula) -> Formula:
    out = []
    for p in parts:
        if isinstance(p, BoolLit):
            if p.value:
                return TRUE
            continue
        out.append(p)
    if not out:
        return FALSE
    acc = out[0]
    for p in out[1:]:
        acc = Binary("||", acc, p)
    return acc


def neg(f: Formula) -> Formula:
    if isinstance(f, BoolLit):
        return FALSE if f.value else TRUE
    if isinstance(f, Unary) and f.op == "!":
        return f.arg
    return Unary("!", f)


def implies(a: Formula, b: Formula) -> Formula:
    return disj(neg(a), b)


def eq(a: Expr, b: Expr) -> Formula:
    return mk_binary("==", a, b)


def conjuncts(f: Formula):
    """Flatten a tree of `&&` into its operands."""
    if isinstance(f, Binary) and f.op == "&&":
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


_FOLD = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _lit(value) -> Expr:
    return BoolLit(bool(value)) if isinstance(value, bool) else IntLit(value)


def mk_unary(op: str, arg: Expr) -> Expr:
    if op == "!":
        return neg(arg)
    if isinstance(arg, IntLit):
        return IntLit(-arg.value)
    return Unary(op, arg)


def mk_binary(op: str, left: Expr, right: Expr) -> Expr:
    if op == "&&":
        return conj(left, right)
    if op == "||":
        return disj(left, right)
    lc = isinstance(left, (IntLit, BoolLit))
    rc = isinstance(right, (IntLit, BoolLit))
    if lc and rc:
        a, b = left.value, right.value
        if op in _FOLD:
            return _lit(_FOLD[op](a, b))
        if b != 0:
            return IntLit(div_trunc(a, b) if op == "/" else mod_trunc(a, b))
    return Binary(op, left, right)


def rebuild(e: Expr, children) -> Expr:
    if isinstance(e, Unary):
        return mk_unary(e.op, children[0])
    if isinstance(e, Binary):
        return mk_binary(e.op, children[0], children[1])
    if isinstance(e, Quantifier):
        build = forall if e.kind == FORALL else exists
        return build(e.var, e.domain, children[0])
    return e


def children(e: Expr):
    if isinstance(e, Unary):
        return (e.arg,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Quantifier):
        return (e.body,)
    return ()


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Capture-avoiding-enough substitution of free variables, folding constants.

    Bound variables shadow the mapping. Shared subtrees are rewritten once.
    """
    memo: Dict[int, Expr] = {}
    top = dict(mapping)

    def go(node, m):
        if not m:
            return node
        key = id(node)
        if m is top and key in memo:
            return memo[key]
        if isinstance(node, Var):
            out = m.get(node.name, node)
        elif isinstance(node, Quantifier):
            inner = {k: v for k, v in m.items() if k != node.var}
            out = rebuild(node, (go(node.body, inner),))
        elif isinstance(node, (IntLit, BoolLit)):
            out = node
        else:
            old = children(node)
            new = tuple(go(c, m) for c in old)
            unchanged = all(a is b for a, b in zip(new, old))
            foldable = all(isinstance(c, (IntLit, BoolLit)) for c in new)
            out = node if unchanged and not foldable else rebuild(node, new)
        if m is top:
            memo[key] = out
        return out

    return go(e, top)


def free_vars(e: Expr) -> frozenset:
    memo: Dict[int, frozenset] = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Var):
            out = frozenset((node.name,))
        elif isinstance(node, Quantifier):
            out = go(node.body) - {node.var}
        else:
            out = frozenset().union(*(go(c) for c in children(node))) if children(node) else frozenset()
        memo[key] = out
        return out

    return go(e)


def ordered_free_vars(e: Expr, order: Iterable[str]) -> list:
    fv = free_vars(e)
    return [name for name in order if name in fv]


def is_quantifier_free(e: Expr) -> bool:
    if isinstance(e, Quantifier):
        return False
    return all(is_quantifier_free(c) for c in children(e))
