"""Symbolic execution of programs into leaves (path condition, output term).

Loops are unrolled up to a bound rather than summarised by invariants: with
finite input domains every terminating loop has a finite unrolling, and a
path that would need more iterations than the bound is reported instead of
being cut. Intermediate variables are substituted away as execution goes,
so a leaf's store only binds the output variable.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .dsl.ast import (
    BOOL,
    Assign,
    Binary,
    BoolLit,
    Domain,
    Expr,
    If,
    IntLit,
    Program,
    Return,
    Var,
    VarDecl,
    While,
    domain_bounds,
)
from .dsl.printer import format_expr
from .errors import InternalConsistencyError, SymbolicExecutionError, UnrollBoundExceeded
from .logic import engine
from .logic.formula import conj, disj, eq, neg, substitute

DEFAULT_UNROLL = 256
OUTPUT_VAR = "$out"

if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)


@dataclass(frozen=True)
class SymbolicLeaf:
    path_condition: Expr
    output: Expr
    # branch decisions taken to reach the leaf; doubles as the sort key
    path: Tuple[int, ...] = field(default=(), compare=False)

    @property
    def store(self) -> Dict[str, Expr]:
        return {OUTPUT_VAR: self.output}


@dataclass(frozen=True)
class SymbolicCharacterisation:
    program_name: str
    inputs: Tuple[Tuple[str, Domain], ...]
    output_kind: str
    precondition: Expr
    leaves: Tuple[SymbolicLeaf, ...]

    @property
    def input_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.inputs)

    @property
    def env(self) -> Dict[str, Optional[Domain]]:
        """Input domains plus the unbounded output variable."""
        env: Dict[str, Optional[Domain]] = dict(self.inputs)
        env[OUTPUT_VAR] = None
        return env

    @property
    def input_env(self) -> Dict[str, Domain]:
        return dict(self.inputs)

    def formula(self, output_var: str = OUTPUT_VAR) -> Expr:
        """Pre ∧ ⋁ (PC(l) ∧ out == Sto(l)(out)) over the leaves."""
        out = Var(output_var)
        return conj(
            self.precondition,
            disj(*(conj(leaf.path_condition, eq(out, leaf.output)) for leaf in self.leaves)),
        )

    def to_json(self) -> str:
        doc = {
            "program": self.program_name,
            "precondition": format_expr(self.precondition),
            "leaves": [
                {
                    "path_condition": format_expr(leaf.path_condition),
                    "store": {OUTPUT_VAR: format_expr(leaf.output)},
                }
                for leaf in self.leaves
            ],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def program_precondition(program: Program) -> Expr:
    """Domain bounds of every input conjoined with the `requires` clause."""
    return conj(*(domain_bounds(p.name, p.domain) for p in program.params), program.precondition)


@dataclass
class _State:
    store: Dict[str, Expr]
    pc: List[Expr]
    path: Tuple[int, ...]
    returned: Optional[Expr] = None

    def fork(self, cond: Expr, decision: int) -> "_State":
        pc = self.pc if isinstance(cond, BoolLit) else self.pc + [cond]
        return _State(dict(self.store), pc, self.path + (decision,))


class _Executor:
    def __init__(self, program: Program, unroll: int, budget: int):
        self.program = program
        self.unroll = unroll
        self.budget = budget
        self.env = program.domains
        self.pre = program_precondition(program)

    def feasible(self, state: _State, extra: Expr) -> bool:
        if isinstance(extra, BoolLit):
            return extra.value
        return engine.check(conj(self.pre, *state.pc, extra), self.env, self.budget)

    def sym(self, e: Expr, state: _State) -> Expr:
        out = substitute(e, state.store)
        self._guard_divisions(out, state)
        return out

    def _guard_divisions(self, e: Expr, state: _State, ctx: Expr = BoolLit(True)):
        if isinstance(e, Binary):
            if e.op in ("/", "%"):
                zero = conj(ctx, eq(e.right, IntLit(0)))
                if self.feasible(state, zero):
                    raise SymbolicExecutionError(
                        f"possible division by zero in {format_expr(e)} under "
                        f"{format_expr(conj(*state.pc, ctx))}"
                    )
            self._guard_divisions(e.left, state, ctx)
            if e.op == "&&":
                self._guard_divisions(e.right, state, conj(ctx, e.left))
            elif e.op == "||":
                self._guard_divisions(e.right, state, conj(ctx, neg(e.left)))
            else:
                self._guard_divisions(e.right, state, ctx)
        elif hasattr(e, "arg"):
            self._guard_divisions(e.arg, state, ctx)

    def run(self, stmts, states: List[_State]) -> List[_State]:
        for s in stmts:
            nxt: List[_State] = []
            for st in states:
                if st.returned is not None:
                    nxt.append(st)
                else:
                    nxt.extend(self.step(s, st))
            states = nxt
        return states

    def branch(self, cond: Expr, st: _State):
        """Feasible successors of `st` under cond / ¬cond, then-side first."""
        out = []
        for decision, c in ((0, cond), (1, neg(cond))):
            if self.feasible(st, c):
                out.append((decision, st.fork(c, decision)))
        return out

    def step(self, s, st: _State) -> List[_State]:
        if isinstance(s, (VarDecl, Assign)):
            value = s.init if isinstance(s, VarDecl) else s.expr
            st.store[s.name] = self.sym(value, st)
            return [st]
        if isinstance(s, Return):
            st.returned = self.sym(s.expr, st)
            return [st]
        if isinstance(s, If):
            cond = self.sym(s.cond, st)
            out = []
            for decision, child in self.branch(cond, st):
                out.extend(self.run(s.then if decision == 0 else s.orelse, [child]))
            return out
        if isinstance(s, While):
            return self.loop(s, st)
        raise TypeError(f"not a statement: {s!r}")

    def loop(self, s: While, st: _State) -> List[_State]:
        done: List[_State] = []
        work = [(st, 0)]
        while work:
            cur, n = work.pop(0)
            cond = self.sym(s.cond, cur)
            for decision, child in self.branch(cond, cur):
                if decision == 1:
                    done.append(child)
                    continue
                if n >= self.unroll:
                    raise UnrollBoundExceeded(
                        f"loop needs more than {self.unroll} iterations under "
                        f"{format_expr(conj(*child.pc))}",
                        conj(*child.pc),
                    )
                for after in self.run(s.body, [child]):
                    work.append((after, n + 1))
        done.sort(key=lambda x: x.path)
        return done


def symbolic_execute(
    program: Program, unroll: int = DEFAULT_UNROLL, budget: int = engine.DEFAULT_BUDGET
) -> SymbolicCharacterisation:
    """Explore every feasible path of `program` and collect its leaves.

    Raises UnrollBoundExceeded when some feasible path runs a loop more than
    `unroll` times, and SymbolicExecutionError on a reachable division by zero.
    """
    if unroll < 1:
        raise ValueError("unroll bound must be positive")
    ex = _Executor(program, unroll, budget)
    init = _State({p.name: Var(p.name) for p in program.params}, [], ())
    leaves = []
    if engine.check(ex.pre, ex.env, budget):
        for st in ex.run(program.body, [init]):
            if st.returned is None:
                raise InternalConsistencyError("path finished without returning")
            leaves.append(SymbolicLeaf(conj(*st.pc), st.returned, st.path))
    leaves.sort(key=lambda leaf: leaf.path)
    return SymbolicCharacterisation(
        program.name,
        tuple((p.name, p.domain) for p in program.params),
        program.output,
        ex.pre,
        tuple(leaves),
    )


def concretise(gamma: SymbolicCharacterisation, valuation: Mapping):
    """Output of the unique leaf whose path condition `valuation` satisfies."""
    consts = {}
    for name, dom in gamma.inputs:
        value = valuation[name]
        consts[name] = BoolLit(value) if dom.kind == BOOL else IntLit(value)
    pre = substitute(gamma.precondition, consts)
    if pre != BoolLit(True):
        raise SymbolicExecutionError(f"{dict(valuation)} does not satisfy the precondition")
    hits = []
    for leaf in gamma.leaves:
        pc = substitute(leaf.path_condition, consts)
        if not isinstance(pc, BoolLit):
            raise InternalConsistencyError(f"path condition did not fold: {format_expr(pc)}")
        if pc.value:
            hits.append(leaf)
    if len(hits) != 1:
        raise InternalConsistencyError(f"{len(hits)} leaves match {dict(valuation)}")
    out = substitute(hits[0].output, consts)
    if not isinstance(out, (IntLit, BoolLit)):
        raise InternalConsistencyError(f"leaf output did not fold: {format_expr(out)}")
    return out.value


def tabulate(gamma: SymbolicCharacterisation, budget: int = engine.DEFAULT_BUDGET):
    """Vectorised concretisation over the whole input product.

    Returns (valid, hits, outputs): arrays shaped by the input domains giving
    the precondition mask, how many leaves match each point, and the output
    of the (last) matching leaf. Booleans are reported as 0/1.
    """
    env = gamma.input_env
    names = list(env)
    shape = tuple(d.size for d in env.values())
    _, valid = engine.truth_table(gamma.precondition, env, names, budget)
    hits = np.zeros(shape, dtype=np.int64)
    outputs = np.zeros(shape, dtype=np.int64)
    for leaf in gamma.leaves:
        _, mask = engine.truth_table(conj(gamma.precondition, leaf.path_condition), env, names, budget)
        values = engine.value_table(leaf.output, env, names, budget)
        hits += mask
        outputs = np.where(mask, values.astype(np.int64), outputs)
    return np.array(valid), hits, outputs
