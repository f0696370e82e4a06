"""Brute-force ground truth by running the program on every input.

Nothing here touches the symbolic executor or the formula engine: outputs
come from the compiled interpreter, so agreement between this module and
:mod:`datamin.synth` is a genuine cross-check.
"""
from __future__ import annotations

import itertools
import threading
import weakref
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .dsl.ast import Domain, Program
from .dsl.interp import DEFAULT_LOOP_BOUND, compile_program
from .errors import BudgetExceeded, SynthesisError
from .logic.boxes import BoxUnion
from .synth import DISTRIBUTED, MONOLITHIC, GuardedRepresentative, Minimiser, Table

DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True)
class Partition:
    names: Tuple[str, ...]
    universe: Tuple[Tuple, ...]
    classes: Tuple[frozenset, ...]

    def class_of(self, point) -> frozenset:
        for c in self.classes:
            if point in c:
                return c
        raise KeyError(point)

    def as_set(self) -> frozenset:
        return frozenset(self.classes)


@dataclass(frozen=True)
class CoordinateRelation:
    index: int
    name: str
    classes: Tuple[frozenset, ...]


class Enumeration:
    """Outputs of a program over its whole input product.

    `valid` marks precondition-satisfying points; `outputs` holds the output
    there (booleans as 0/1) and 0 elsewhere.
    """

    def __init__(self, program: Program, budget: int = DEFAULT_BUDGET, loop_bound: int = DEFAULT_LOOP_BOUND):
        size = program.space_size
        if size > budget:
            raise BudgetExceeded(f"{program.name}: {size} input points exceed the enumeration budget {budget}")
        self.names = program.input_names
        self.domains: Tuple[Domain, ...] = tuple(p.domain for p in program.params)
        self.values = [list(d.values()) for d in self.domains]
        compiled = compile_program(program, loop_bound)
        body, pre = compiled.body, compiled.precondition
        flat_valid = np.zeros(size, dtype=bool)
        flat_out = np.zeros(size, dtype=np.int64)
        for k, point in enumerate(itertools.product(*self.values)):
            if pre(*point):
                flat_valid[k] = True
                flat_out[k] = int(body(*point))
        shape = tuple(d.size for d in self.domains)
        self.valid = flat_valid.reshape(shape)
        self.outputs = flat_out.reshape(shape)

    def points(self):
        """Precondition-satisfying valuations as tuples, in lexicographic order."""
        for idx in zip(*np.nonzero(self.valid)):
            yield tuple(self.values[a][int(i)] for a, i in enumerate(idx))

    def index(self, point) -> tuple:
        return tuple(d.index(v) for d, v in zip(self.domains, point))

    def output(self, point) -> int:
        idx = self.index(point)
        if not self.valid[idx]:
            raise KeyError(f"{point} violates the precondition")
        return int(self.outputs[idx])

    def is_admissible(self, point) -> bool:
        return all(d.contains(v) for d, v in zip(self.domains, point)) and bool(self.valid[self.index(point)])


_lock = threading.Lock()
_memo: Dict[tuple, tuple] = {}


def _drop(key, ref):
    with _lock:
        entry = _memo.get(key)
        if entry is not None and entry[0] is ref:
            del _memo[key]


def enumerate_program(program: Program, budget: int = DEFAULT_BUDGET) -> Enumeration:
    """Memoised per program object; the result is read-only by convention."""
    key = (id(program), budget)
    with _lock:
        entry = _memo.get(key)
        if entry is not None and entry[0]() is program:
            return entry[1]
    enum = Enumeration(program, budget)
    with _lock:
        _memo[key] = (weakref.ref(program, lambda r, k=key: _drop(k, r)), enum)
    return enum


def _group(keys: Sequence, items: Sequence) -> List[frozenset]:
    groups: Dict[object, list] = {}
    for k, item in zip(keys, items):
        groups.setdefault(k, []).append(item)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def kernel(program: Program, budget: int = DEFAULT_BUDGET) -> Partition:
    """Precondition-satisfying valuations grouped by equal output."""
    enum = enumerate_program(program, budget)
    universe = tuple(enum.points())
    outs = [enum.output(p) for p in universe]
    return Partition(enum.names, universe, tuple(_group(outs, universe)))


def _signatures(enum: Enumeration, axis: int):
    """Per in-scope value of one coordinate: its outputs in every context."""
    valid = np.moveaxis(enum.valid, axis, 0).reshape(enum.valid.shape[axis], -1)
    outs = np.moveaxis(enum.outputs, axis, 0).reshape(enum.valid.shape[axis], -1)
    sigs = {}
    for k, value in enumerate(enum.values[axis]):
        if valid[k].any():
            sigs[value] = (valid[k].tobytes(), np.where(valid[k], outs[k], 0).tobytes())
    return sigs


def coordinate_relations(program: Program, budget: int = DEFAULT_BUDGET) -> List[CoordinateRelation]:
    """The coarsest per-coordinate equivalences whose product stays inside the kernel.

    Two values of coordinate i are related when, in every context, they are
    either both inadmissible or both admissible with equal outputs.
    """
    enum = enumerate_program(program, budget)
    out = []
    for axis, name in enumerate(enum.names):
        sigs = _signatures(enum, axis)
        values = list(sigs)
        out.append(CoordinateRelation(axis, name, tuple(_group([sigs[v] for v in values], values))))
    return out


def is_rectangular(program: Program, budget: int = DEFAULT_BUDGET) -> bool:
    enum = enumerate_program(program, budget)
    product = np.ones(enum.valid.shape, dtype=bool)
    for axis in range(enum.valid.ndim):
        other = tuple(a for a in range(enum.valid.ndim) if a != axis)
        product = product & enum.valid.any(axis=other, keepdims=True)
    return bool(np.array_equal(product, enum.valid))


def relation_contained_in_kernel(program: Program, relations: Sequence[CoordinateRelation],
                                 budget: int = DEFAULT_BUDGET) -> bool:
    """Whether the product of the coordinate relations lies inside ker(program).

    Any two related valuations are joined by a chain that changes one
    coordinate at a time within its class, so it suffices that every
    single-coordinate change inside a class keeps the output in every
    context. With a rectangular precondition the chain stays admissible.
    """
    enum = enumerate_program(program, budget)
    for rel in relations:
        axis = rel.index
        valid = np.moveaxis(enum.valid, axis, 0).reshape(enum.valid.shape[axis], -1)
        outs = np.moveaxis(enum.outputs, axis, 0).reshape(enum.valid.shape[axis], -1)
        dom = enum.domains[axis]
        for cls in rel.classes:
            rows = [dom.index(v) for v in cls]
            first = rows[0]
            for r in rows[1:]:
                if not np.array_equal(valid[r], valid[first]):
                    return False
                both = valid[r]
                if not np.array_equal(outs[r][both], outs[first][both]):
                    return False
    return True


def merges(relations: Sequence[CoordinateRelation]):
    """Every relation obtained by fusing two classes of one coordinate."""
    for k, rel in enumerate(relations):
        for a, b in itertools.combinations(range(len(rel.classes)), 2):
            fused = [c for j, c in enumerate(rel.classes) if j not in (a, b)]
            fused.append(rel.classes[a] | rel.classes[b])
            merged = list(relations)
            merged[k] = CoordinateRelation(rel.index, rel.name, tuple(sorted(fused, key=min)))
            yield (rel.name, rel.classes[a], rel.classes[b]), merged


def _from_masks(program: Program, mode: str, tables) -> Minimiser:
    """Minimiser whose rows are given as masks; representative = least member."""
    built = []
    for scope, domains, masks in tables:
        values = [list(d.values()) for d in domains]
        rows = []
        for mask in masks:
            first = np.unravel_index(int(np.argmax(mask)), mask.shape)
            rep = tuple(values[a][int(i)] for a, i in enumerate(first))
            rows.append(GuardedRepresentative(BoxUnion.from_mask(scope, domains, mask), rep))
        rows.sort(key=lambda r: r.representative)
        built.append(Table(tuple(scope), tuple(domains), tuple(rows)))
    return Minimiser(mode, program.name, tuple((p.name, p.domain) for p in program.params), tuple(built))


def reference_best_distributed(program: Program, budget: int = DEFAULT_BUDGET) -> Minimiser:
    """Tables read off the coordinate relations, least member representing each class."""
    if not is_rectangular(program, budget):
        raise SynthesisError("distributed minimisation needs a per-input precondition")
    tables = []
    for rel in coordinate_relations(program, budget):
        dom = program.params[rel.index].domain
        masks = []
        for cls in rel.classes:
            mask = np.zeros(dom.size, dtype=bool)
            mask[[dom.index(v) for v in cls]] = True
            masks.append(mask)
        tables.append(((rel.name,), (dom,), masks))
    return _from_masks(program, DISTRIBUTED, tables)


def reference_best_monolithic(program: Program, budget: int = DEFAULT_BUDGET) -> Minimiser:
    """One row per kernel class."""
    enum = enumerate_program(program, budget)
    outs = np.unique(enum.outputs[enum.valid])
    masks = [enum.valid & (enum.outputs == o) for o in outs]
    return _from_masks(program, MONOLITHIC, [(enum.names, enum.domains, masks)])


def reference_best(program: Program, mode: str, budget: int = DEFAULT_BUDGET) -> Minimiser:
    if mode == DISTRIBUTED:
        return reference_best_distributed(program, budget)
    if mode == MONOLITHIC:
        return reference_best_monolithic(program, budget)
    raise ValueError(f"unknown mode {mode!r}")


def partitions_of(m: Minimiser) -> Tuple[Tuple[Tuple[str, ...], frozenset], ...]:
    return tuple((t.scope, frozenset(t.classes())) for t in m.tables)


def same_partition(a: Minimiser, b: Minimiser) -> bool:
    """Equal induced partitions, whichever member each class discloses."""
    if a.mode != b.mode:
        raise ValueError(f"cannot compare a {a.mode} minimiser with a {b.mode} one")
    return a.inputs == b.inputs and partitions_of(a) == partitions_of(b)


# -- property checks --------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    prop: str
    message: str
    witness: Tuple = ()


def image_indices(m: Minimiser, enum: Enumeration) -> np.ndarray:
    """Domain indices of apply(m, v) for every grid point v, stacked on the last axis.

    -1 marks points no guard covers.
    """
    shape = enum.valid.shape
    out = np.full(shape + (len(shape),), -1, dtype=np.int64)
    axis_of = {name: k for k, name in enumerate(enum.names)}
    for t in m.tables:
        axes = [axis_of[n] for n in t.scope]
        rep_idx = np.array([[d.index(v) for d, v in zip(t.domains, row.representative)] for row in t.rows]
                           + [[-1] * len(t.scope)], dtype=np.int64).reshape(len(t.rows) + 1, len(t.scope))
        ri = t.row_index()  # -1 selects the trailing sentinel row
        # lay the scope axes of the table out along the program's axes
        order = np.argsort(axes)
        ri = np.transpose(ri, order)
        view = [1] * len(shape)
        for a in sorted(axes):
            view[a] = shape[a]
        ri = np.broadcast_to(ri.reshape(view), shape)
        for j, a in enumerate(axes):
            out[..., a] = rep_idx[ri, j]
    return out


def check_minimiser(program: Program, m: Minimiser, budget: int = DEFAULT_BUDGET,
                    best: bool = True) -> List[Violation]:
    """Exhaustively check totality, correctness, idempotency and (optionally)
    best-ness; returns the violations found, first witness per property."""
    enum = enumerate_program(program, budget)
    names = enum.names
    if m.input_names != names or tuple(d for _, d in m.inputs) != enum.domains:
        return [Violation("signature", f"minimiser inputs {m.input_names} differ from {names}")]
    found: List[Violation] = []

    def point(idx):
        return tuple(enum.values[a][int(i)] for a, i in enumerate(idx))

    def first(mask):
        return tuple(int(i) for i in np.unravel_index(int(np.argmax(mask)), mask.shape))

    img = image_indices(m, enum)
    uncovered = enum.valid & (img < 0).any(axis=-1)
    if uncovered.any():
        w = point(first(uncovered))
        found.append(Violation("totality", f"no guard covers {dict(zip(names, w))}", (w,)))
        return found
    where = tuple(np.where(enum.valid, img[..., a], 0) for a in range(len(names)))
    img_valid = enum.valid[where] & enum.valid
    bad = enum.valid & ~img_valid
    if not bad.any():
        bad = enum.valid & (enum.outputs[where] != enum.outputs)
    if bad.any():
        idx = first(bad)
        w, r = point(idx), point(img[idx])
        found.append(Violation("correctness", f"{dict(zip(names, w))} maps to {dict(zip(names, r))}, "
                               "which changes the output or violates the precondition", (w, r)))
    again = img[where]  # image of the image, same layout as img
    moved = enum.valid & (again != img).any(axis=-1)
    if moved.any():
        idx = first(moved)
        r = point(img[idx])
        found.append(Violation("idempotency", f"representative {dict(zip(names, r))} is not a fixed point",
                               (r, point(again[idx]))))
    if best and not found:
        image = {point(img[idx]) for idx in zip(*np.nonzero(enum.valid))} if m.mode == MONOLITHIC else None
        found.extend(best_ness_violations(program, m, budget, image))
    return found


def best_ness_violations(program: Program, m: Minimiser, budget: int = DEFAULT_BUDGET,
                         image=None) -> List[Violation]:
    """Pairs of disclosed values that the purpose cannot tell apart."""
    enum = enumerate_program(program, budget)
    out: List[Violation] = []
    if m.mode == MONOLITHIC:
        seen: Dict[int, tuple] = {}
        if image is None:
            img = image_indices(m, enum)
            image = {tuple(enum.values[a][int(i)] for a, i in enumerate(img[idx]))
                     for idx in zip(*np.nonzero(enum.valid))}
        for rp in sorted(image):
            o = enum.output(rp)
            if o in seen:
                out.append(Violation("best", f"{seen[o]} and {rp} give the same output {o}", (seen[o], rp)))
                break
            seen[o] = rp
        return out
    rels = {rel.name: rel for rel in coordinate_relations(program, budget)}
    for t in m.tables:
        (name,) = t.scope
        cls_of = {v: c for c in rels[name].classes for v in c}
        reps = [row.value for row in t.rows]
        for a, b in itertools.combinations(reps, 2):
            if cls_of.get(a) is not None and cls_of.get(a) is cls_of.get(b):
                out.append(Violation("best", f"{name}: {a} and {b} are interchangeable in every context",
                                     ((name, a), (name, b))))
                break
    return out


def proper_distribution(program: Program, m: Minimiser, budget: int = DEFAULT_BUDGET) -> bool:
    """Values sharing a guard are interchangeable in every fixed context."""
    rels = [CoordinateRelation(k, t.scope[0], tuple(frozenset(v for (v,) in c) for c in t.classes()))
            for k, t in enumerate(m.tables)]
    return relation_contained_in_kernel(program, rels, budget)


def best_distributed_characterisation(program: Program, m: Minimiser, budget: int = DEFAULT_BUDGET) -> bool:
    """Every two distinct representatives of a coordinate are told apart by
    some context drawn from the minimiser's range."""
    enum = enumerate_program(program, budget)
    reps = [[row.value for row in t.rows] for t in m.tables]
    for i, t in enumerate(m.tables):
        for v1, v2 in itertools.combinations(reps[i], 2):
            separated = False
            for ctx in itertools.product(*(reps[j] for j in range(len(reps)) if j != i)):
                u1 = ctx[:i] + (v1,) + ctx[i:]
                u2 = ctx[:i] + (v2,) + ctx[i:]
                a1, a2 = enum.is_admissible(u1), enum.is_admissible(u2)
                if a1 != a2 or (a1 and enum.output(u1) != enum.output(u2)):
                    separated = True
                    break
            if not separated:
                return False
    return True


def injective_on_representatives(program: Program, m: Minimiser, budget: int = DEFAULT_BUDGET) -> bool:
    enum = enumerate_program(program, budget)
    outs = [enum.output(row.representative) for t in m.tables for row in t.rows]
    return len(outs) == len(set(outs))
