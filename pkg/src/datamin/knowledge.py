"""What an observer learns from program outputs.

Knowledge is compared through kernels: f discloses no more than g exactly
when every pair of inputs g cannot tell apart is also indistinguishable
through f. Equivalence of knowledge is equality of kernels.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .dsl.ast import (
    INT,
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
from .dsl.parser import check_program
from .errors import SignatureMismatch
from .logic.formula import conj
from .oracle import DEFAULT_BUDGET, enumerate_program, image_indices
from .synth import Minimiser

Point = Tuple


@dataclass(frozen=True)
class KnowledgeSet:
    program_name: str
    at_input: Tuple[Tuple[str, object], ...]
    members: frozenset

    def __contains__(self, point) -> bool:
        return tuple(point) in self.members

    def __len__(self) -> int:
        return len(self.members)


def knowledge_set(program: Program, valuation: Mapping, budget: int = DEFAULT_BUDGET) -> KnowledgeSet:
    """Every admissible input that `program` maps to the same output as `valuation`."""
    enum = enumerate_program(program, budget)
    point = tuple(valuation[n] for n in enum.names)
    target = enum.output(point)
    same = enum.valid & (enum.outputs == target)
    members = frozenset(
        tuple(enum.values[a][int(i)] for a, i in enumerate(idx)) for idx in zip(*np.nonzero(same))
    )
    return KnowledgeSet(program.name, tuple(zip(enum.names, point)), members)


def _same_universe(f: Program, g: Program, budget: int):
    if f.signature() != g.signature():
        raise SignatureMismatch(f"{f.name} and {g.name} take different inputs")
    ef, eg = enumerate_program(f, budget), enumerate_program(g, budget)
    if not np.array_equal(ef.valid, eg.valid):
        raise SignatureMismatch(f"{f.name} and {g.name} accept different inputs")
    return ef, eg


def _refines(fine: np.ndarray, coarse: np.ndarray) -> bool:
    """Whether equal values in `fine` imply equal values in `coarse`."""
    if fine.size == 0:
        return True
    pairs = np.unique(np.stack([fine, coarse], axis=1), axis=0)
    return len(pairs) == len(np.unique(fine))


def discloses_leq(f: Program, g: Program, budget: int = DEFAULT_BUDGET) -> bool:
    """f ⊑ g: f reveals no more than g, i.e. ker(g) ⊆ ker(f)."""
    ef, eg = _same_universe(f, g, budget)
    return _refines(eg.outputs[eg.valid], ef.outputs[ef.valid])


def knowledge_equivalent(f: Program, g: Program, budget: int = DEFAULT_BUDGET) -> bool:
    """f ≡ g, read as f ⊑ g and g ⊑ f."""
    return discloses_leq(f, g, budget) and discloses_leq(g, f, budget)


def compare(f: Program, g: Program, budget: int = DEFAULT_BUDGET) -> str:
    """One of 'f ≡ g', 'f ⊑ g', 'g ⊑ f', 'incomparable'."""
    fg, gf = discloses_leq(f, g, budget), discloses_leq(g, f, budget)
    if fg and gf:
        return "f ≡ g"
    if fg:
        return "f ⊑ g"
    if gf:
        return "g ⊑ f"
    return "incomparable"


def range_size(program: Program, budget: int = DEFAULT_BUDGET) -> int:
    enum = enumerate_program(program, budget)
    return int(len(np.unique(enum.outputs[enum.valid])))


def kernel_size(program: Program, budget: int = DEFAULT_BUDGET) -> int:
    """Number of kernel classes, which is the size of the range."""
    return range_size(program, budget)


# -- program composition by inlining -----------------------------------------


def _rename_expr(e: Expr, names: Mapping[str, str]) -> Expr:
    if isinstance(e, Var):
        return Var(names.get(e.name, e.name))
    if isinstance(e, Unary):
        return Unary(e.op, _rename_expr(e.arg, names))
    if isinstance(e, Binary):
        return Binary(e.op, _rename_expr(e.left, names), _rename_expr(e.right, names))
    return e


class _Fresh:
    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)

    def __call__(self, base: str) -> str:
        name = base
        k = 0
        while name in self.taken:
            k += 1
            name = f"{base}_{k}"
        self.taken.add(name)
        return name


def _rename_block(stmts, names: Dict[str, str], fresh: _Fresh, prefix: str):
    out = []
    names = dict(names)
    for s in stmts:
        if isinstance(s, VarDecl):
            init = _rename_expr(s.init, names)
            names[s.name] = fresh(f"{prefix}{s.name}")
            out.append(VarDecl(names[s.name], init))
        elif isinstance(s, Assign):
            out.append(Assign(names[s.name], _rename_expr(s.expr, names)))
        elif isinstance(s, Return):
            out.append(Return(_rename_expr(s.expr, names)))
        elif isinstance(s, If):
            out.append(If(_rename_expr(s.cond, names),
                          _rename_block(s.then, names, fresh, prefix),
                          _rename_block(s.orelse, names, fresh, prefix)))
        elif isinstance(s, While):
            out.append(While(_rename_expr(s.cond, names), _rename_block(s.body, names, fresh, prefix)))
        else:
            raise TypeError(f"not a statement: {s!r}")
    return tuple(out)


def _returns(stmts) -> bool:
    for s in stmts:
        if isinstance(s, Return):
            return True
        if isinstance(s, If) and (_returns(s.then) or _returns(s.orelse)):
            return True
    return False


def _lift_returns(stmts, k: Callable[[Expr], tuple]) -> tuple:
    """Rewrite `stmts` so that each `return e` becomes the statements k(e).

    Code after a conditional that may return is copied into both branches,
    so every copy of the continuation sits in its own block.
    """
    stmts = tuple(stmts)
    for j, s in enumerate(stmts):
        if isinstance(s, Return):
            return stmts[:j] + tuple(k(s.expr))
        if isinstance(s, If) and _returns(s.then + s.orelse):
            rest = stmts[j + 1:]
            branch = If(s.cond, _lift_returns(s.then + rest, k), _lift_returns(s.orelse + rest, k))
            return stmts[:j] + (branch,)
    raise ValueError("block does not return")


def _as_int(name: str, e: Expr, kind: str, fresh: _Fresh):
    """Statements binding an int version of `e` and the name they bind."""
    var = fresh(name)
    if kind == INT:
        return (VarDecl(var, e),), var
    return (VarDecl(var, IntLit(0)), If(e, (Assign(var, IntLit(1)),), ())), var


def _inline(program: Program, fresh: _Fresh, prefix: str, args: Mapping[str, Expr]):
    """Copy `program`'s body with fresh local names; inputs are bound to `args`
    through fresh copies so assignments to inputs stay private."""
    names: Dict[str, str] = {}
    head = []
    for p in program.params:
        names[p.name] = fresh(f"{prefix}{p.name}")
        head.append(VarDecl(names[p.name], args[p.name]))
    return tuple(head), _rename_block(program.body, names, fresh, prefix)


@dataclass(frozen=True)
class AttackerPair:
    legitimate: Program
    hidden: Program

    def __post_init__(self):
        if self.legitimate.signature() != self.hidden.signature():
            raise SignatureMismatch(
                f"{self.legitimate.name} and {self.hidden.name} must take the same inputs"
            )


@dataclass(frozen=True)
class PairEncoding:
    """How ⟨p,h⟩ packs two outputs into one integer: o1 * span + (o2 - low).

    Boolean outputs count as 0/1. `low` and `span` are the least value and
    the width of h's range, so 0 <= o2 - low < span and decoding is a
    floor division.
    """

    low: int
    span: int

    def encode(self, o1, o2) -> int:
        return int(o1) * self.span + (int(o2) - self.low)

    def decode(self, code: int) -> Tuple[int, int]:
        q, r = divmod(code, self.span)
        return q, r + self.low


def pair_encoding(hidden: Program, budget: int = DEFAULT_BUDGET) -> PairEncoding:
    enum = enumerate_program(hidden, budget)
    outs = enum.outputs[enum.valid]
    if outs.size == 0:
        return PairEncoding(0, 1)
    low, high = int(outs.min()), int(outs.max())
    return PairEncoding(low, high - low + 1)


def attacker_compose(pair: AttackerPair, budget: int = DEFAULT_BUDGET) -> Program:
    """The program i ↦ (p(i), h(i)), with the pair encoded per `pair_encoding`."""
    p, h = pair.legitimate, pair.hidden
    enc = pair_encoding(h, budget)
    fresh = _Fresh(p.input_names)
    inputs = {n: Var(n) for n in p.input_names}
    p_head, p_body = _inline(p, fresh, "p_", inputs)
    h_head, h_body = _inline(h, fresh, "h_", inputs)

    def after_h(e2):
        s1, o1 = first
        s2, o2 = _as_int("o2", e2, h.output, fresh)
        code = Binary("+", Binary("*", Var(o1), IntLit(enc.span)), Binary("-", Var(o2), IntLit(enc.low)))
        return s2 + (Return(code),)

    def after_p(e1):
        nonlocal first
        first = _as_int("o1", e1, p.output, fresh)
        stmts = first[0]
        return stmts + h_head + _lift_returns(h_body, after_h)

    first = None
    body = p_head + _lift_returns(p_body, after_p)
    requires = conj(p.precondition, h.precondition)
    out = Program(
        f"{p.name}_with_{h.name}",
        p.params,
        INT,
        body,
        None if requires == BoolLit(True) else requires,
    )
    check_program(out)
    return out


def compose_sequential(f: Program, g: Program) -> Program:
    """f ∘ g: feed g's output into f's single input."""
    if len(f.params) != 1:
        raise SignatureMismatch(f"{f.name} must take exactly one input to follow {g.name}")
    (param,) = f.params
    if param.domain.kind != g.output:
        raise SignatureMismatch(f"{g.name} returns {g.output} but {f.name} expects {param.domain.kind}")
    fresh = _Fresh(g.input_names)
    g_head, g_body = _inline(g, fresh, "g_", {n: Var(n) for n in g.input_names})

    def after_g(e):
        f_head, f_body = _inline(f, fresh, "f_", {param.name: e})
        return f_head + f_body

    out = Program(f"{f.name}_after_{g.name}", g.params, f.output, g_head + _lift_returns(g_body, after_g),
                  g.requires)
    check_program(out)
    return out


def hidden_use_safe(p: Program, h: Program, m: Minimiser, budget: int = DEFAULT_BUDGET) -> bool:
    """⟨p,h⟩ ∘ m ≡ p: observing both uses of minimised data reveals no more than p."""
    pair = attacker_compose(AttackerPair(p, h), budget)
    ep = enumerate_program(p, budget)
    ea = enumerate_program(pair, budget)
    if not np.array_equal(ep.valid, ea.valid):
        return False
    img = image_indices(m, ep)
    if (img[ep.valid] < 0).any():
        return False
    where = tuple(np.where(ep.valid, img[..., a], 0) for a in range(len(ep.names)))
    if not ea.valid[where][ep.valid].all():
        return False
    observed = ea.outputs[where][ep.valid]
    purpose = ep.outputs[ep.valid]
    return _refines(observed, purpose) and _refines(purpose, observed)


# -- offline audit -----------------------------------------------------------


@dataclass(frozen=True)
class Breach:
    """Two logged collections that the purpose could not tell apart."""

    first: int
    second: int
    input_a: Tuple[Tuple[str, object], ...]
    input_b: Tuple[Tuple[str, object], ...]
    output: object

    def to_dict(self) -> dict:
        return {
            "entries": [self.first, self.second],
            "inputs": [dict(self.input_a), dict(self.input_b)],
            "output": self.output,
        }


def audit_log(entries: Sequence[Tuple[Mapping, object]]) -> List[Breach]:
    """Pairs of entries with equal output but different inputs.

    Each such pair shows that more was collected than the output needed.
    """
    groups: Dict[str, List[int]] = {}
    for k, (_, output) in enumerate(entries):
        groups.setdefault(json.dumps(output), []).append(k)
    out = []
    for key in groups:
        for a, b in itertools.combinations(groups[key], 2):
            ia = tuple(sorted(dict(entries[a][0]).items()))
            ib = tuple(sorted(dict(entries[b][0]).items()))
            if ia != ib:
                out.append(Breach(a, b, ia, ib, entries[a][1]))
    out.sort(key=lambda w: (w.first, w.second))
    return out


def read_log(lines: Iterable[str]) -> List[Tuple[dict, object]]:
    """Parse JSON lines of the form {"input": {...}, "output": value}."""
    entries = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            entries.append((dict(doc["input"]), doc["output"]))
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"log line {n}: expected {{\"input\": {{...}}, \"output\": v}} ({exc})") from None
    return entries


def projection(program: Program, name: str) -> Program:
    """A hidden use that simply returns input `name` of `program`."""
    params = {p.name: p for p in program.params}
    if name not in params:
        raise SignatureMismatch(f"{program.name} has no input {name!r}")
    out = Program(f"{program.name}_{name}", program.params, params[name].domain.kind,
                  (Return(Var(name)),), program.requires)
    check_program(out)
    return out
