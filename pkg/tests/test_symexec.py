import itertools
import json

import numpy as np
import pytest

from datamin import corpus
from datamin.dsl import evaluate, parse
from datamin.errors import SymbolicExecutionError, UnrollBoundExceeded
from datamin.logic import check, conj, equivalent, neg, disj
from datamin.oracle import enumerate_program
from datamin.symexec import OUTPUT_VAR, concretise, symbolic_execute, tabulate

from conftest import gamma, program

LEAF_COUNTS = {"benefits": 2, "credit": 3, "const": 1, "identity": 1, "bool_or": 1}


def test_benefits_leaves():
    g = gamma("benefits")
    env = g.input_env
    assert len(g.leaves) == 2
    below, above = g.leaves
    assert equivalent(conj(g.precondition, below.path_condition), parse_formula("salary < 10000"), env)
    assert equivalent(conj(g.precondition, above.path_condition), parse_formula("salary >= 10000"), env)
    assert below.store[OUTPUT_VAR].value is True
    assert above.store[OUTPUT_VAR].value is False
    assert equivalent(g.precondition, parse_formula("0 <= salary && salary <= 100000"), env)


def parse_formula(text):
    from datamin.dsl import parse_expr

    return parse_expr(text, {"salary": "int"})


def test_constant_program():
    g = gamma("const")
    (leaf,) = g.leaves
    assert leaf.path_condition.value is True
    assert leaf.output.value == 7
    assert {concretise(g, {"x": x}) for x in range(10)} == {7}


@pytest.mark.parametrize("name, count", sorted(LEAF_COUNTS.items()))
def test_leaf_counts(name, count):
    assert len(gamma(name).leaves) == count


@pytest.mark.parametrize(
    "name, valuation, expected",
    [
        ("benefits", {"salary": 8000}, True),
        ("credit", {"incidents": 2, "tax": 1}, 0),
        ("credit", {"incidents": 0, "tax": 3}, 2),
        ("loyalty", {"flights": 25}, 150),
    ],
)
def test_concretise(name, valuation, expected):
    assert concretise(gamma(name), valuation) == expected


def test_loyalty_concretise_matches_evaluate():
    p, g = program("loyalty"), gamma("loyalty")
    for flights in range(101):
        assert concretise(g, {"flights": flights}) == evaluate(p, {"flights": flights})


def test_concretise_outside_precondition():
    with pytest.raises(SymbolicExecutionError):
        concretise(gamma("shipping"), {"weight": 0, "zone": 1, "express": False})


def check_commutativity(p):
    g = symbolic_execute(p)
    enum = enumerate_program(p)
    valid, hits, outputs = tabulate(g)
    assert np.array_equal(valid, enum.valid)
    # exactly one leaf per admissible point and none elsewhere
    assert np.array_equal(hits, valid.astype(np.int64))
    assert np.array_equal(outputs[valid], enum.outputs[valid])


@pytest.mark.parametrize("name", corpus.names())
def test_commutativity_corpus(name):
    check_commutativity(program(name))


def test_commutativity_random(random_programs):
    for p in random_programs:
        check_commutativity(p)


@pytest.mark.parametrize("name", ["credit", "shipping", "syntactic"])
def test_leaves_exclusive_and_covering(name):
    g = gamma(name)
    env = g.input_env
    for a, b in itertools.combinations(g.leaves, 2):
        assert not check(conj(g.precondition, a.path_condition, b.path_condition), env)
    covered = disj(*(leaf.path_condition for leaf in g.leaves))
    assert not check(conj(g.precondition, neg(covered)), env)


def test_pointwise_concretise_on_small_programs(small_programs):
    for p in small_programs[:10]:
        g = symbolic_execute(p)
        enum = enumerate_program(p)
        for point in enum.points():
            v = dict(zip(enum.names, point))
            assert concretise(g, v) == enum.output(point)


def test_unroll_bound_exceeded():
    p = parse("program f(x: int[0..50]) -> int { var i = 0; while (i < x) { i = i + 1; } return i; }")
    assert len(symbolic_execute(p, unroll=50).leaves) == 51
    with pytest.raises(UnrollBoundExceeded) as info:
        symbolic_execute(p, unroll=10)
    assert info.value.path_condition is not None


def test_reachable_division_by_zero():
    p = parse("program f(x: int[0..3]) -> int { return 12 / (x - 1); }")
    with pytest.raises(SymbolicExecutionError):
        symbolic_execute(p)


def test_guarded_division_is_fine():
    p = parse("program f(x: int[0..3]) -> int { if (x != 1) { return 12 / (x - 1); } return 0; }")
    g = symbolic_execute(p)
    assert [concretise(g, {"x": x}) for x in range(4)] == [-12, 0, 12, 6]


def test_infeasible_paths_pruned():
    p = parse("program f(x: int[0..9]) -> int { if (x > 5) { if (x < 3) { return 1; } } return 2; }")
    g = symbolic_execute(p)
    assert all(concretise(g, {"x": x}) == 2 for x in range(10))
    assert len(g.leaves) == 2


def test_unsatisfiable_precondition_has_no_leaves():
    p = parse("program f(x: int[0..9]) -> int requires x > 20; { return x; }")
    assert symbolic_execute(p).leaves == ()


def test_deterministic_and_dumpable():
    a, b = symbolic_execute(program("loyalty")), symbolic_execute(program("loyalty"))
    assert a == b and a.to_json() == b.to_json()
    doc = json.loads(a.to_json())
    assert doc["program"] == "loyalty"
    assert len(doc["leaves"]) == len(a.leaves)
