"""Minimiser generation from a symbolic characterisation.

For each input (or, in monolithic mode, for the tuple of all inputs) the
generator repeatedly picks the least value not yet covered, asks for the
set of values that behave like it in every context, records that set as a
guard with the picked value as its representative, and removes it from
the search space.

The fresh copy of the input introduced by the algorithm is pinned to the
model value, so it is substituted directly rather than quantified and then
eliminated.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from .dsl.ast import BOOL, BoolLit, Domain, Expr, IntLit, Program, Var
from .errors import ClassCapExceeded, InternalConsistencyError, SynthesisError
from .logic import engine
from .logic.boxes import BoxUnion
from .logic.formula import conj, eq, exists, forall, implies, neg, substitute
from .logic.smtlib import run_solver, to_smtlib
from .symexec import OUTPUT_VAR, SymbolicCharacterisation, program_precondition

MONOLITHIC = "monolithic"
DISTRIBUTED = "distributed"
MODES = (MONOLITHIC, DISTRIBUTED)
DEFAULT_CLASS_CAP = 100_000


@dataclass(frozen=True)
class GuardedRepresentative:
    """One equivalence class: its guard and the value disclosed for it."""

    guard: BoxUnion
    representative: Tuple

    @property
    def value(self):
        """The representative of a single-input row."""
        if len(self.representative) != 1:
            raise ValueError("row ranges over several inputs; use .valuation")
        return self.representative[0]

    @property
    def valuation(self) -> Dict[str, object]:
        return dict(zip(self.guard.names, self.representative))

    @property
    def formula(self) -> Expr:
        return self.guard.to_formula()


@dataclass(frozen=True)
class Table:
    """Rows over `scope`, ordered by representative."""

    scope: Tuple[str, ...]
    domains: Tuple[Domain, ...]
    rows: Tuple[GuardedRepresentative, ...]

    @property
    def domain_size(self) -> int:
        size = 1
        for d in self.domains:
            size *= d.size
        return size

    def lookup(self, point: Tuple) -> GuardedRepresentative:
        k = -1
        if len(point) == len(self.domains) and all(d.contains(v) for d, v in zip(self.domains, point)):
            k = int(self.row_index()[tuple(d.index(v) for d, v in zip(self.domains, point))])
        if k < 0:
            raise InternalConsistencyError(
                f"no guard of the table over {', '.join(self.scope)} matches {point}"
            )
        return self.rows[k]

    @cached_property
    def _row_index(self) -> np.ndarray:
        out = np.full(tuple(d.size for d in self.domains), -1, dtype=np.int64)
        for k, row in enumerate(self.rows):
            for box in row.guard.boxes:
                sl = tuple(slice(d.index(lo), d.index(hi) + 1) for d, (lo, hi) in zip(self.domains, box))
                if (out[sl] != -1).any():
                    raise InternalConsistencyError(f"guards overlap in the table over {self.scope}")
                out[sl] = k
        out.setflags(write=False)
        return out

    def row_index(self) -> np.ndarray:
        """Row number covering each point of the scope product, -1 where none does."""
        return self._row_index

    def classes(self) -> List[frozenset]:
        return [frozenset(row.guard.members()) for row in self.rows]


@dataclass(frozen=True)
class Minimiser:
    mode: str
    program_name: str
    inputs: Tuple[Tuple[str, Domain], ...]
    tables: Tuple[Table, ...]

    @property
    def input_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.inputs)

    def table(self, name: str) -> Table:
        for t in self.tables:
            if name in t.scope:
                return t
        raise KeyError(name)

    def class_counts(self) -> Dict[str, int]:
        return {",".join(t.scope): len(t.rows) for t in self.tables}


def apply(minimiser: Minimiser, valuation: Mapping) -> Dict[str, object]:
    """Replace a valuation by its representative, table by table."""
    out: Dict[str, object] = {}
    for t in minimiser.tables:
        point = tuple(valuation[name] for name in t.scope)
        out.update(zip(t.scope, t.lookup(point).representative))
    return {name: out[name] for name in minimiser.input_names}


# -- the generation loop ----------------------------------------------------


def _literal(domain: Domain, value) -> Expr:
    return BoolLit(bool(value)) if domain.kind == BOOL else IntLit(int(value))


class _Generator:
    def __init__(self, gamma: SymbolicCharacterisation, budget: int):
        self.gamma = gamma
        self.budget = budget
        self.env = gamma.env
        self.domains = gamma.input_env
        self.pre = gamma.precondition
        self.formula = gamma.formula()
        self._in_scope: Dict[tuple, BoxUnion] = {}

    def others(self, scope: Sequence[str]) -> List[str]:
        return [n for n in self.gamma.input_names if n not in scope]

    def in_scope(self, scope: Sequence[str]) -> BoxUnion:
        """Values of `scope` that occur in some precondition-satisfying valuation."""
        key = tuple(scope)
        if key not in self._in_scope:
            f = self.pre
            for name in reversed(self.others(scope)):
                f = exists(name, self.domains[name], f)
            self._in_scope[key] = engine.project(f, self.domains, list(scope), self.budget)
        return self._in_scope[key]

    def class_formula(self, scope: Sequence[str], rep: Tuple) -> Expr:
        """Values of `scope` that agree with `rep` in every admissible context.

        ∀ others. Pre → ∃ out. Γ ∧ Γ[rep/scope], restricted to in-scope values.
        """
        pinned = {n: _literal(self.domains[n], v) for n, v in zip(scope, rep)}
        same = exists(OUTPUT_VAR, None, conj(self.formula, substitute(self.formula, pinned)))
        body = implies(self.pre, same)
        for name in reversed(self.others(scope)):
            body = forall(name, self.domains[name], body)
        return conj(self.in_scope(scope).to_formula(), body)

    def representative(self, gamma_i: Expr, scope: Sequence[str]) -> Tuple:
        env = {n: self.domains[n] for n in scope}
        m = engine.model(gamma_i, env, self.budget)
        return tuple(m[n] for n in scope)

    def guard(self, wp: Expr, scope: Sequence[str]) -> BoxUnion:
        return engine.project(wp, self.domains, list(scope), self.budget)

    def table(self, scope: Sequence[str], class_cap: int) -> Table:
        scope = list(scope)
        gamma_i = self.in_scope(scope)
        rows: List[GuardedRepresentative] = []
        while engine.check(gamma_i, self.domains, self.budget):
            if len(rows) >= class_cap:
                raise ClassCapExceeded(
                    f"more than {class_cap} classes for {', '.join(scope)}; raise the cap "
                    "or minimise a coarser program"
                )
            rep = self.representative(gamma_i, scope)
            guard = self.guard(self.class_formula(scope, rep), scope)
            if not guard.contains(rep):
                raise InternalConsistencyError(f"representative {rep} escapes its own guard")
            rows.append(GuardedRepresentative(guard, rep))
            # γ ∧ ¬wp, kept in canonical box form so it stays cheap to check
            gamma_i = gamma_i.minus(guard)
        rows.sort(key=lambda r: r.representative)
        return Table(tuple(scope), tuple(self.domains[n] for n in scope), tuple(rows))


def is_rectangular(gamma: SymbolicCharacterisation, budget: int = engine.DEFAULT_BUDGET) -> bool:
    """True when the precondition is a product of per-input conditions."""
    names = list(gamma.input_names)
    _, mask = engine.truth_table(gamma.precondition, gamma.input_env, names, budget)
    mask = np.asarray(mask)
    product = np.ones(mask.shape, dtype=bool)
    for axis in range(mask.ndim):
        other = tuple(a for a in range(mask.ndim) if a != axis)
        product = product & mask.any(axis=other, keepdims=True)
    return bool(np.array_equal(product, mask))


def _require_rectangular(gamma, budget):
    if not is_rectangular(gamma, budget):
        raise SynthesisError(
            "distributed minimisation needs a precondition that constrains each input "
            "independently; this one relates several inputs"
        )


def _check_gamma(program: Program, gamma: SymbolicCharacterisation):
    if gamma.program_name != program.name or gamma.input_names != program.input_names:
        raise SynthesisError(f"characterisation of {gamma.program_name!r} does not match {program.name!r}")


def synthesize_distributed(
    program: Program,
    gamma: SymbolicCharacterisation,
    class_cap: int = DEFAULT_CLASS_CAP,
    budget: int = engine.DEFAULT_BUDGET,
) -> Minimiser:
    """One table per input; each maps a value to the least value that is
    interchangeable with it in every context."""
    _check_gamma(program, gamma)
    _require_rectangular(gamma, budget)
    gen = _Generator(gamma, budget)
    tables = tuple(gen.table([name], class_cap) for name in gamma.input_names)
    return Minimiser(DISTRIBUTED, program.name, gamma.inputs, tables)


def synthesize_monolithic(
    program: Program,
    gamma: SymbolicCharacterisation,
    class_cap: int = DEFAULT_CLASS_CAP,
    budget: int = engine.DEFAULT_BUDGET,
) -> Minimiser:
    """A single table over whole valuations: the kernel classes of the program."""
    _check_gamma(program, gamma)
    gen = _Generator(gamma, budget)
    table = gen.table(list(gamma.input_names), class_cap)
    return Minimiser(MONOLITHIC, program.name, gamma.inputs, (table,))


def synthesize(program, gamma, mode: str = DISTRIBUTED, **kw) -> Minimiser:
    if mode == DISTRIBUTED:
        return synthesize_distributed(program, gamma, **kw)
    if mode == MONOLITHIC:
        return synthesize_monolithic(program, gamma, **kw)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def online_representative(
    program: Program,
    gamma: SymbolicCharacterisation,
    valuation: Mapping,
    mode: str = DISTRIBUTED,
    budget: int = engine.DEFAULT_BUDGET,
) -> Dict[str, object]:
    """Representative of a single known valuation.

    Only the class of the given value is extracted: one class formula and
    one model per input (one in total in monolithic mode).
    """
    _check_gamma(program, gamma)
    if mode == DISTRIBUTED:
        _require_rectangular(gamma, budget)
        scopes = [[name] for name in gamma.input_names]
    elif mode == MONOLITHIC:
        scopes = [list(gamma.input_names)]
    else:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    gen = _Generator(gamma, budget)
    out: Dict[str, object] = {}
    for scope in scopes:
        point = tuple(valuation[n] for n in scope)
        for n, v in zip(scope, point):
            if not gen.domains[n].contains(v):
                raise InternalConsistencyError(f"{n}={v!r} is outside {gen.domains[n]}")
        wp = gen.class_formula(scope, point)
        env = {n: gen.domains[n] for n in scope}
        if not engine.check(conj(wp), env, budget):
            raise InternalConsistencyError(f"{dict(zip(scope, point))} is outside the precondition")
        out.update(engine.model(wp, env, budget))
    return {name: out[name] for name in gamma.input_names}


def identity_minimiser(program: Program, mode: str = DISTRIBUTED, budget: int = engine.DEFAULT_BUDGET) -> Minimiser:
    """Every in-scope value is its own class; useful as a negative control."""
    env = program.domains
    pre = program_precondition(program)
    scopes = [[n] for n in program.input_names] if mode == DISTRIBUTED else [list(program.input_names)]
    tables = []
    for scope in scopes:
        others = [n for n in program.input_names if n not in scope]
        f = pre
        for name in reversed(others):
            f = exists(name, env[name], f)
        members = project_members(f, env, scope, budget)
        doms = tuple(env[n] for n in scope)
        rows = tuple(
            GuardedRepresentative(BoxUnion(tuple(scope), doms, (tuple((v, v) for v in p),)), p)
            for p in members
        )
        tables.append(Table(tuple(scope), doms, rows))
    return Minimiser(mode, program.name, tuple((p.name, p.domain) for p in program.params), tuple(tables))


def project_members(f: Expr, env, scope, budget: int = engine.DEFAULT_BUDGET):
    return list(engine.project(f, env, list(scope), budget).members())


def from_classes(
    program: Program, mode: str, classes_per_scope: Sequence[Tuple[Sequence[str], Sequence[Sequence[Tuple]]]]
) -> Minimiser:
    """Build a minimiser from explicit classes, representative = class minimum."""
    env = program.domains
    tables = []
    for scope, classes in classes_per_scope:
        doms = tuple(env[n] for n in scope)
        rows = [
            GuardedRepresentative(BoxUnion.from_members(scope, doms, cls), min(cls))
            for cls in classes
        ]
        rows.sort(key=lambda r: r.representative)
        tables.append(Table(tuple(scope), doms, tuple(rows)))
    return Minimiser(mode, program.name, tuple((p.name, p.domain) for p in program.params), tuple(tables))


def smt_certify(gamma: SymbolicCharacterisation, m: Minimiser, solver: str, timeout: float = 60.0) -> List[str]:
    """Ask an external solver to confirm that each class is sound.

    For every row the query is: some value in the guard and some context
    give an output different from the representative's. The solver must
    answer unsat; anything else is reported.
    """
    other_out = OUTPUT_VAR + "'"
    env = dict(gamma.input_env)
    env[OUTPUT_VAR] = None
    env[other_out] = None
    formula = gamma.formula()
    problems = []
    for t in m.tables:
        for row in t.rows:
            pinned = {n: _literal(gamma.input_env[n], v) for n, v in zip(t.scope, row.representative)}
            pinned[OUTPUT_VAR] = Var(other_out)
            query = conj(row.guard.to_formula(), formula, substitute(formula, pinned),
                         neg(eq(Var(OUTPUT_VAR), Var(other_out))))
            booleans = (OUTPUT_VAR, other_out) if gamma.output_kind == BOOL else ()
            answer = run_solver(to_smtlib(query, env, booleans), solver, timeout)
            if answer != "unsat":
                problems.append(f"{', '.join(t.scope)} = {row.representative}: solver answered {answer}")
    return problems

