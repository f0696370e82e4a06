"""Enumeration backend: satisfiability, minimal models and quantifier elimination.

Formulas are evaluated over the whole product of their variables' domains
at once with numpy broadcasting. Every variable owns one array axis; a
finite quantifier adds an axis for its bound variable and reduces it with
all/any. An existential over an unbounded integer is eliminated by the
one-point rule. Division and remainder are total here (x / 0 = x % 0 = 0);
callers that care about division by zero guard it themselves.
"""
from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from ..dsl.ast import BOOL, Binary, BoolLit, Domain, Expr, IntLit, Unary, Var
from ..errors import BudgetExceeded, LogicError, UndeclaredVariable, Unsatisfiable
from .boxes import BoxUnion
from .formula import EXISTS, FORALL, Quantifier, children, free_vars

DEFAULT_BUDGET = 1_000_000

Env = Mapping[str, Optional[Domain]]


def _domain_array(domain: Domain) -> np.ndarray:
    if domain.kind == BOOL:
        return np.array([False, True])
    return np.arange(domain.lo, domain.hi + 1, dtype=np.int64)


def _div(a, b):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    zero = b == 0
    safe = np.where(zero, 1, b)
    q = np.abs(a) // np.abs(safe)
    q = np.where((a < 0) != (safe < 0), -q, q)
    return np.where(zero, 0, q)


def _mod(a, b):
    q = _div(a, b)
    return np.where(np.asarray(b) == 0, 0, np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64) * q)


_ARITH = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": _div,
    "%": _mod,
    "<": np.less,
    "<=": np.less_equal,
    ">": np.greater,
    ">=": np.greater_equal,
    "==": np.equal,
    "!=": np.not_equal,
    "&&": np.logical_and,
    "||": np.logical_or,
}


def one_point_candidates(body: Expr, var: str, fv=free_vars) -> List[Expr]:
    """Right-hand sides `e` of positive atoms `var == e` in `body`.

    Raises LogicError when `var` occurs anywhere else, since the one-point
    rule would then be unsound.
    """
    found: List[Expr] = []
    free_vars = fv

    def go(node, positive):
        if isinstance(node, Binary) and node.op == "==":
            for this, other in ((node.left, node.right), (node.right, node.left)):
                if isinstance(this, Var) and this.name == var and var not in free_vars(other):
                    if not positive:
                        break
                    if other not in found:
                        found.append(other)
                    return
        if isinstance(node, Var) and node.name == var:
            raise LogicError(f"unbounded variable {var!r} occurs outside a positive equality")
        if isinstance(node, Quantifier) and node.var == var:
            return
        if isinstance(node, Unary) and node.op == "!":
            go(node.arg, not positive)
            return
        if isinstance(node, Binary) and node.op in ("&&", "||"):
            go(node.left, positive)
            go(node.right, positive)
            return
        for c in children(node):
            # inside arithmetic or comparisons polarity is lost
            go(c, None if var in free_vars(c) else positive)

    go(body, True)
    return found


class _Evaluator:
    def __init__(self, env: Env, axes: Sequence[str], formula: Expr, budget: int):
        self.env = env
        self.axes = list(axes)
        self.quant_axes: Dict[int, int] = {}
        self._assign_quantifier_axes(formula)
        self.ndim = len(self.axes) + len(self.quant_axes)
        total = 1
        for name in self.axes:
            total *= env[name].size
        # sibling quantifiers never share an array, so only nesting multiplies
        total *= self._deepest
        if total > budget:
            raise BudgetExceeded(f"enumeration of {total} points exceeds budget {budget}")
        self.bindings = {name: self._axis_array(env[name], k) for k, name in enumerate(self.axes)}
        self.cache: Dict[tuple, object] = {}
        self.fv_memo: Dict[int, frozenset] = {}
        self.keepalive: list = []
        self.candidates: Dict[int, List[Expr]] = {}

    def _assign_quantifier_axes(self, formula):
        self._quantifiers = []
        nested: Dict[int, int] = {}

        def go(node):
            # returns the largest product of quantifier domains along a nesting chain
            if id(node) in nested:
                return nested[id(node)]
            own = 1
            if isinstance(node, Quantifier) and node.domain is not None:
                self.quant_axes[id(node)] = len(self.axes) + len(self._quantifiers)
                self._quantifiers.append(node)
                own = node.domain.size
            below = max((go(c) for c in children(node)), default=1)
            nested[id(node)] = own * below
            return own * below

        self._deepest = go(formula)

    def _axis_array(self, domain: Domain, axis: int) -> np.ndarray:
        shape = [1] * (len(self.axes) + len(self.quant_axes))
        shape[axis] = domain.size
        return _domain_array(domain).reshape(shape)

    def fv(self, node) -> frozenset:
        key = id(node)
        out = self.fv_memo.get(key)
        if out is None:
            if isinstance(node, Var):
                out = frozenset((node.name,))
            elif isinstance(node, Quantifier):
                out = self.fv(node.body) - {node.var}
            else:
                out = frozenset().union(*(self.fv(c) for c in children(node)))
            self.fv_memo[key] = out
        return out

    def eval(self, node, bindings):
        deps = self.fv(node)
        key = (id(node),) + tuple(sorted((n, id(bindings[n])) for n in deps if n in bindings))
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        out = self._eval(node, bindings)
        self.cache[key] = out
        return out

    def _eval(self, node, bindings):
        if isinstance(node, IntLit):
            return np.int64(node.value)
        if isinstance(node, BoolLit):
            return np.bool_(node.value)
        if isinstance(node, Var):
            try:
                return bindings[node.name]
            except KeyError:
                raise UndeclaredVariable(f"variable {node.name!r} is not declared") from None
        if isinstance(node, Unary):
            arg = self.eval(node.arg, bindings)
            return np.negative(arg) if node.op == "-" else np.logical_not(arg)
        if isinstance(node, Binary):
            return _ARITH[node.op](self.eval(node.left, bindings), self.eval(node.right, bindings))
        if isinstance(node, Quantifier):
            return self._quantifier(node, bindings)
        raise TypeError(f"not a formula: {node!r}")

    def _quantifier(self, node: Quantifier, bindings):
        if node.domain is None:
            if node.kind != EXISTS:
                raise LogicError(f"universal over unbounded variable {node.var!r}")
            cands = self.candidates.get(id(node))
            if cands is None:
                cands = self.candidates[id(node)] = one_point_candidates(node.body, node.var, self.fv)
            acc = np.bool_(False)
            for cand in cands:
                value = self.eval(cand, bindings)
                self.keepalive.append(value)
                inner = dict(bindings)
                inner[node.var] = value
                acc = np.logical_or(acc, self.eval(node.body, inner))
            if not cands:
                inner = dict(bindings)
                inner[node.var] = np.int64(0)
                acc = self.eval(node.body, inner)
            return acc
        axis = self.quant_axes[id(node)]
        inner = dict(bindings)
        arr = inner[node.var] = self._axis_array(node.domain, axis)
        self.keepalive.append(arr)
        res = self.eval(node.body, inner)
        if np.ndim(res) == 0 or res.shape[axis] == 1:
            return res
        reduce = np.all if node.kind == FORALL else np.any
        return reduce(res, axis=axis, keepdims=True)

    def truth(self, formula) -> np.ndarray:
        """Truth table over the free axes, shape = domain sizes in axis order."""
        res = np.asarray(self.eval(formula, self.bindings), dtype=bool)
        shape = tuple(self.env[name].size for name in self.axes)
        if res.ndim:
            res = res.reshape(res.shape[: len(self.axes)])
        return np.broadcast_to(res, shape)


def _declared(f: Expr, env: Env, over=None):
    fv = free_vars(f)
    for name in sorted(fv):
        if name not in env:
            raise UndeclaredVariable(f"variable {name!r} is not declared")
        if env[name] is None:
            raise LogicError(f"free variable {name!r} has an unbounded domain")
    if over is None:
        return [name for name in env if name in fv]
    for name in over:
        if name not in env or env[name] is None:
            raise UndeclaredVariable(f"variable {name!r} is not declared with a finite domain")
    extra = fv - set(over)
    if extra:
        raise LogicError(f"free variables {sorted(extra)} are not among {list(over)}")
    return list(over)


def truth_table(f: Expr, env: Env, over=None, budget: int = DEFAULT_BUDGET):
    """(axes, mask): the truth value of `f` at every point of its free variables."""
    axes = _declared(f, env, over)
    ev = _Evaluator(env, axes, f, budget)
    return axes, ev.truth(f)


def check(f: Expr, env: Env, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff some in-domain valuation of the free variables satisfies `f`.

    `f` may also be a formula already in canonical box form.
    """
    if isinstance(f, BoxUnion):
        return not f.is_empty
    _, mask = truth_table(f, env, budget=budget)
    return bool(mask.any())


def model(f: Expr, env: Env, budget: int = DEFAULT_BUDGET) -> dict:
    """The lexicographically least satisfying valuation of every finite env variable.

    Order is env declaration order, then domain order (false < true).
    Variables not free in `f` take their domain minimum.
    """
    if isinstance(f, BoxUnion):
        if f.is_empty:
            raise Unsatisfiable("model() called on an unsatisfiable formula")
        chosen = dict(zip(f.names, f.least()))
        return {name: chosen.get(name, dom.values()[0]) for name, dom in env.items() if dom is not None}
    axes, mask = truth_table(f, env, budget=budget)
    flat = np.ravel(mask)
    if not flat.any():
        raise Unsatisfiable("model() called on an unsatisfiable formula")
    idx = np.unravel_index(int(np.argmax(flat)), mask.shape) if mask.ndim else ()
    chosen = {name: int(i) for name, i in zip(axes, idx)}
    out = {}
    for name, dom in env.items():
        if dom is None:
            continue
        values = dom.values()
        out[name] = values[chosen.get(name, 0)]
    return out


def project(f: Expr, env: Env, over=None, budget: int = DEFAULT_BUDGET) -> BoxUnion:
    """Quantifier elimination into canonical box form over `over` (default: free vars)."""
    axes, mask = truth_table(f, env, over, budget)
    return BoxUnion.from_mask(axes, [env[a] for a in axes], mask)


def quantifier_eliminate(f: Expr, env: Env, over=None, budget: int = DEFAULT_BUDGET) -> Expr:
    """An equivalent quantifier-free formula: interval boxes over the free variables."""
    return project(f, env, over, budget).to_formula()


def equivalent(a: Expr, b: Expr, env: Env, budget: int = DEFAULT_BUDGET) -> bool:
    """Same truth value at every in-domain valuation of their joint free variables."""
    names = [n for n in env if n in (free_vars(a) | free_vars(b))]
    _, ma = truth_table(a, env, names, budget)
    _, mb = truth_table(b, env, names, budget)
    return bool(np.array_equal(ma, mb))


def value_table(e: Expr, env: Env, over, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Value of a (possibly non-boolean) term at every point of `over`."""
    over = _declared(e, env, over)
    ev = _Evaluator(env, over, e, budget)
    res = np.asarray(ev.eval(e, ev.bindings))
    if res.ndim:
        res = res.reshape(res.shape[: len(over)])
    return np.broadcast_to(res, tuple(env[name].size for name in over))
