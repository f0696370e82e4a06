"""Abstract syntax for minimiser-input programs.

Expressions double as the term language of :mod:`datamin.logic`; the logic
module only adds quantifier nodes on top of these.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

INT = "int"
BOOL = "bool"

ARITH_OPS = ("+", "-", "*", "/", "%")
COMPARE_OPS = ("<", "<=", ">", ">=")
EQUALITY_OPS = ("==", "!=")
LOGIC_OPS = ("&&", "||")
BINARY_OPS = ARITH_OPS + COMPARE_OPS + EQUALITY_OPS + LOGIC_OPS
UNARY_OPS = ("-", "!")

Value = Union[int, bool]


@dataclass(frozen=True)
class Domain:
    kind: str
    lo: int = 0
    hi: int = 1

    def __post_init__(self):
        if self.kind not in (INT, BOOL):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == BOOL and (self.lo, self.hi) != (0, 1):
            raise ValueError("bool domains carry no bounds")
        if self.lo > self.hi:
            raise ValueError(f"empty domain [{self.lo}..{self.hi}]")

    @classmethod
    def int_range(cls, lo: int, hi: int) -> "Domain":
        return cls(INT, lo, hi)

    @classmethod
    def boolean(cls) -> "Domain":
        return cls(BOOL)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def values(self):
        if self.kind == BOOL:
            return (False, True)
        return range(self.lo, self.hi + 1)

    def contains(self, value) -> bool:
        if self.kind == BOOL:
            return isinstance(value, bool)
        return isinstance(value, int) and not isinstance(value, bool) and self.lo <= value <= self.hi

    def index(self, value) -> int:
        return int(value) - self.lo

    def __str__(self):
        return "bool" if self.kind == BOOL else f"int[{self.lo}..{self.hi}]"


# Source positions are diagnostics only; they never take part in equality.
def _pos():
    return field(default=None, compare=False, repr=False)


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Var(Expr):
    name: str
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    arg: Expr
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    pos: Optional[Tuple[int, int]] = _pos()


TRUE = BoolLit(True)
FALSE = BoolLit(False)


class Stmt:
    __slots__ = ()


@dataclass(frozen=True)
class VarDecl(Stmt):
    name: str
    init: Expr
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Assign(Stmt):
    name: str
    expr: Expr
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Tuple[Stmt, ...]
    orelse: Tuple[Stmt, ...] = ()
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Tuple[Stmt, ...]
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Return(Stmt):
    expr: Expr
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Param:
    name: str
    domain: Domain
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Program:
    name: str
    params: Tuple[Param, ...]
    output: str
    body: Tuple[Stmt, ...]
    requires: Optional[Expr] = None

    @property
    def input_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.params)

    @property
    def domains(self) -> dict:
        """Input name -> Domain, in declaration order."""
        return {p.name: p.domain for p in self.params}

    @property
    def precondition(self) -> Expr:
        """The `requires` clause only; domain bounds are kept separately."""
        return self.requires if self.requires is not None else TRUE

    @property
    def space_size(self) -> int:
        n = 1
        for p in self.params:
            n *= p.domain.size
        return n

    def signature(self):
        return tuple((p.name, p.domain) for p in self.params)


def domain_bounds(name: str, domain: Domain) -> Expr:
    """`lo <= name && name <= hi` for integer domains, `true` for booleans."""
    if domain.kind == BOOL:
        return TRUE
    v = Var(name)
    return Binary("&&", Binary("<=", IntLit(domain.lo), v), Binary("<=", v, IntLit(domain.hi)))
