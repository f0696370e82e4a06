"""Seeded random programs for property tests and the oracle comparison.

Programs stay small: few inputs, shallow branching, literal divisors and
loops whose trip count is bounded by a small modulus. Results are usually
divided by a small constant or compared, so the number of output
classes stays low and synthesis finishes quickly even on 10^5-point spaces.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Optional, Sequence

from ..dsl import Domain, Param, Program, format_program, parse
from ..dsl.ast import BOOL, INT, Assign, Binary, If, IntLit, Return, Unary, Var, VarDecl, While


@dataclass
class GenConfig:
    max_inputs: int = 3
    max_space: int = 100_000
    max_domain: int = 256
    bool_inputs: bool = True
    loops: bool = True
    depth: int = 2
    coarse: bool = True


def random_params(rng: random.Random, config: GenConfig = GenConfig()) -> List[Param]:
    n = rng.randint(1, config.max_inputs)
    params = []
    space = 1
    for k in range(n):
        if config.bool_inputs and rng.random() < 0.25:
            dom = Domain.boolean()
        else:
            room = max(1, min(config.max_domain, config.max_space // space // (2 ** (n - k - 1))))
            size = rng.randint(1, room) if rng.random() < 0.3 else rng.randint(1, min(room, 16))
            lo = rng.choice([0, 0, 0, 1, -3])
            dom = Domain.int_range(lo, lo + size - 1)
        space *= dom.size
        params.append(Param(f"x{k + 1}", dom))
    return params


class _Builder:
    def __init__(self, rng: random.Random, ints: Sequence[str], bools: Sequence[str], config: GenConfig):
        self.rng = rng
        self.ints = list(ints)
        self.bools = list(bools)
        self.config = config
        self.locals = 0

    def int_expr(self, depth=2):
        rng = self.rng
        if depth == 0 or rng.random() < 0.3:
            if self.ints and rng.random() < 0.75:
                return Var(rng.choice(self.ints))
            return IntLit(rng.randint(-3, 9))
        op = rng.choice(["+", "-", "*", "/", "%", "+", "-"])
        left = self.int_expr(depth - 1)
        if op in ("/", "%"):
            return Binary(op, left, IntLit(rng.randint(1, 5)))
        if op == "*":
            return Binary(op, left, IntLit(rng.randint(-2, 3)))
        return Binary(op, left, self.int_expr(depth - 1))

    def bool_expr(self, depth=1):
        rng = self.rng
        roll = rng.random()
        if self.bools and roll < 0.25:
            v = Var(rng.choice(self.bools))
            return Unary("!", v) if rng.random() < 0.3 else v
        if depth > 0 and roll < 0.4:
            return Binary(rng.choice(["&&", "||"]), self.bool_expr(depth - 1), self.bool_expr(depth - 1))
        op = rng.choice(["<", "<=", ">", ">=", "==", "!="])
        return Binary(op, self.int_expr(1), self.int_expr(1))

    def block(self, acc: str, depth: int):
        rng = self.rng
        out = []
        for _ in range(rng.randint(1, 2)):
            roll = rng.random()
            if depth > 0 and roll < 0.45:
                out.append(If(self.bool_expr(), self.block(acc, depth - 1),
                              self.block(acc, depth - 1) if rng.random() < 0.7 else ()))
            elif self.config.loops and depth > 0 and roll < 0.55 and self.ints:
                self.locals += 1
                i = f"i{self.locals}"
                bound = Binary("%", Var(rng.choice(self.ints)), IntLit(rng.randint(2, 4)))
                out.append(VarDecl(i, IntLit(0)))
                out.append(While(Binary("<", Var(i), bound), (
                    Assign(acc, Binary("+", Var(acc), self.int_expr(1))),
                    Assign(i, Binary("+", Var(i), IntLit(1))),
                )))
            else:
                out.append(Assign(acc, self.int_expr()))
        return tuple(out)


def random_program(rng: random.Random, name: str = "rand", params: Optional[Sequence[Param]] = None,
                   config: GenConfig = GenConfig(), output: Optional[str] = None) -> Program:
    """A well-formed program; built as an AST, printed and parsed back."""
    params = list(params) if params is not None else random_params(rng, config)
    ints = [p.name for p in params if p.domain.kind == INT]
    bools = [p.name for p in params if p.domain.kind == BOOL]
    b = _Builder(rng, ints, bools, config)
    body = [VarDecl("acc", b.int_expr())]
    b.ints.append("acc")
    body.extend(b.block("acc", config.depth))
    output = output or (BOOL if rng.random() < 0.3 else INT)
    if output == BOOL:
        op = rng.choice(["<", "<=", "==", "!=", ">"])
        body.append(Return(Binary(op, Var("acc"), IntLit(rng.randint(-2, 10)))))
    elif config.coarse:
        # remainders split large spaces into many small boxes, so they are
        # kept to small spaces; quotients give interval-shaped classes
        space = 1
        for p in params:
            space *= p.domain.size
        op = rng.choice(["%", "/"]) if space <= 2000 else "/"
        k = rng.randint(2, 7) if op == "%" else rng.randint(3, 40)
        body.append(Return(Binary(op, Var("acc"), IntLit(k))))
    else:
        body.append(Return(Var("acc")))
    program = Program(name, tuple(params), output, tuple(body))
    return parse(format_program(program))


def random_corpus(seed: int, count: int, config: GenConfig = GenConfig()) -> List[Program]:
    rng = random.Random(seed)
    return [random_program(rng, f"rand{k}", config=config) for k in range(count)]
