"""Shared checks for the disclosure-ordering properties."""
import itertools
import random
from dataclasses import dataclass

from datamin.corpus.randprog import GenConfig, random_params, random_program
from datamin.dsl import BOOL, Domain, Param, evaluate
from datamin.knowledge import (
    AttackerPair,
    attacker_compose,
    compose_sequential,
    discloses_leq,
    knowledge_equivalent,
    range_size,
)

SMALL = GenConfig(max_inputs=2, max_space=256, max_domain=256)


def outputs(p):
    """Point -> output through plain `evaluate`, independent of the array oracle."""
    table = {}
    for values in itertools.product(*(d.values() for d in p.domains.values())):
        table[values] = evaluate(p, dict(zip(p.input_names, values)))
    return table


def kernel_inside(fine, coarse):
    """ker(fine) ⊆ ker(coarse), from two output tables over the same points."""
    seen = {}
    for point, o in fine.items():
        if seen.setdefault(o, coarse[point]) != coarse[point]:
            return False
    return True


def family(rng, count=3):
    params = random_params(rng, SMALL)
    return [random_program(rng, f"r{k}", params, SMALL) for k in range(count)]


def post_processor(rng, g):
    """A random one-input program accepting every output of g."""
    if g.output == BOOL:
        dom = Domain.boolean()
    else:
        outs = set(outputs(g).values())
        dom = Domain.int_range(min(outs), max(outs))
    return random_program(rng, "post", [Param("y", dom)], SMALL)


@dataclass
class Outcome:
    name: str
    holds: bool


def disclosure_properties(rng: random.Random):
    """One random triple checked against every ordering property; yields outcomes."""
    f, g, h = family(rng)
    tf, tg = outputs(f), outputs(g)

    yield Outcome("kernel characterisation",
                  discloses_leq(f, g) == kernel_inside(tg, tf) and discloses_leq(g, f) == kernel_inside(tf, tg))

    fg = compose_sequential(post_processor(rng, g), g)
    yield Outcome("composition", discloses_leq(fg, g) and kernel_inside(tg, outputs(fg)))

    ff = attacker_compose(AttackerPair(f, f))
    yield Outcome("self pair", discloses_leq(ff, f) and knowledge_equivalent(ff, f))

    pair = attacker_compose(AttackerPair(f, g))
    yield Outcome("pair dominates", discloses_leq(f, pair) and kernel_inside(outputs(pair), tf))

    for a, b in itertools.permutations([(f, tf), (g, tg), (fg, outputs(fg)), (pair, outputs(pair))], 2):
        if discloses_leq(a[0], b[0]):
            if not (range_size(a[0]) <= range_size(b[0]) and len(set(a[1].values())) <= len(set(b[1].values()))):
                yield Outcome("range size", False)
                break
    else:
        yield Outcome("range size", True)

    chain = [(x, y, z) for x, y, z in itertools.permutations([f, g, h, fg, pair], 3)]
    transitive = all(
        discloses_leq(x, z) for x, y, z in chain if discloses_leq(x, y) and discloses_leq(y, z)
    )
    yield Outcome("preorder", transitive and all(discloses_leq(x, x) for x in (f, g, h)))
