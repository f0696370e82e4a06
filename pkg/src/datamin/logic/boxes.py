"""Canonical quantifier-free form: a union of interval boxes.

A box fixes an interval per variable. The decomposition of a truth table
into boxes is deterministic, so two equivalent formulas over the same
variables produce equal ``BoxUnion`` values.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from ..dsl.ast import BOOL, TRUE, Binary, Domain, Expr, IntLit, Var
from .formula import conj, disj, neg

Interval = Tuple[object, object]


def _axis_values(domain: Domain):
    return list(domain.values())


def _decompose(mask: np.ndarray, domains, depth: int):
    """Yield boxes (tuples of index intervals) covering exactly the True cells."""
    if mask.ndim == 0:
        if mask:
            yield ()
        return
    n = mask.shape[0]
    flat = mask.reshape(n, -1)
    nonempty = flat.any(axis=1)
    # a new run starts wherever a slice differs from its predecessor
    starts = np.ones(n, dtype=bool)
    starts[1:] = (flat[1:] != flat[:-1]).any(axis=1)
    bounds = list(np.flatnonzero(starts)) + [n]
    for j, nxt in zip(bounds[:-1], bounds[1:]):
        if not nonempty[j]:
            continue
        for rest in _decompose(mask[j], domains, depth + 1):
            yield ((int(j), int(nxt) - 1),) + rest


@dataclass(frozen=True)
class BoxUnion:
    names: Tuple[str, ...]
    domains: Tuple[Domain, ...]
    boxes: Tuple[Tuple[Interval, ...], ...]

    @classmethod
    def from_mask(cls, names, domains, mask: np.ndarray) -> "BoxUnion":
        mask = np.asarray(mask, dtype=bool)
        shape = tuple(d.size for d in domains)
        if mask.shape != shape:
            mask = np.broadcast_to(mask, shape)
        values = [_axis_values(d) for d in domains]
        boxes = []
        for idx_box in _decompose(mask, domains, 0):
            boxes.append(tuple((values[a][lo], values[a][hi]) for a, (lo, hi) in enumerate(idx_box)))
        return cls(tuple(names), tuple(domains), tuple(boxes))

    @classmethod
    def from_members(cls, names, domains, members) -> "BoxUnion":
        mask = np.zeros(tuple(d.size for d in domains), dtype=bool)
        for point in members:
            mask[tuple(d.index(v) for d, v in zip(domains, point))] = True
        return cls.from_mask(names, domains, mask)

    def contains(self, point) -> bool:
        for box in self.boxes:
            if all(lo <= v <= hi for (lo, hi), v in zip(box, point)):
                return True
        return False

    def to_mask(self) -> np.ndarray:
        mask = np.zeros(tuple(d.size for d in self.domains), dtype=bool)
        for box in self.boxes:
            sl = tuple(slice(d.index(lo), d.index(hi) + 1) for d, (lo, hi) in zip(self.domains, box))
            mask[sl] = True
        return mask

    def count(self) -> int:
        return int(self.to_mask().sum())

    def members(self) -> Iterator[tuple]:
        """Points in lexicographic order (first variable most significant)."""
        mask = self.to_mask()
        values = [_axis_values(d) for d in self.domains]
        for idx in zip(*np.nonzero(mask)):
            yield tuple(values[a][int(i)] for a, i in enumerate(idx))

    def minus(self, other: "BoxUnion") -> "BoxUnion":
        if (self.names, self.domains) != (other.names, other.domains):
            raise ValueError("box unions over different variables")
        return BoxUnion.from_mask(self.names, self.domains, self.to_mask() & ~other.to_mask())

    def least(self) -> tuple:
        """The lexicographically least member."""
        mask = self.to_mask()
        if not mask.any():
            raise ValueError("empty box union has no least member")
        idx = np.unravel_index(int(np.argmax(mask)), mask.shape)
        return tuple(_axis_values(d)[int(i)] for d, i in zip(self.domains, idx))

    @property
    def is_empty(self) -> bool:
        return not self.boxes

    def to_formula(self) -> Expr:
        return disj(*(self._box_formula(box) for box in self.boxes))

    def _box_formula(self, box) -> Expr:
        parts = []
        for name, dom, (lo, hi) in zip(self.names, self.domains, box):
            v = Var(name)
            if dom.kind == BOOL:
                if lo == hi:
                    parts.append(v if hi else neg(v))
                continue
            parts.append(Binary("<=", IntLit(lo), v))
            parts.append(Binary("<=", v, IntLit(hi)))
        return conj(*parts) if parts else TRUE

    def intervals(self):
        """For a single variable: the maximal intervals, ascending."""
        if len(self.names) != 1:
            raise ValueError("intervals() needs a one-variable union")
        return [box[0] for box in self.boxes]
