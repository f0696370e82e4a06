import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from datamin.corpus.randprog import random_program
from datamin.dsl import evaluate, parse
from datamin.errors import SignatureMismatch
from datamin.knowledge import (
    AttackerPair,
    PairEncoding,
    attacker_compose,
    audit_log,
    compare,
    compose_sequential,
    discloses_leq,
    kernel_size,
    knowledge_equivalent,
    knowledge_set,
    pair_encoding,
    projection,
    read_log,
    hidden_use_safe,
)
from datamin.oracle import kernel, reference_best_monolithic
from datamin.synth import MONOLITHIC, identity_minimiser

from conftest import program
from helpers import SMALL, disclosure_properties, family, outputs

CONST_BL = "program c(salary: int[0..100000]) -> int { return 0; }"


def test_knowledge_set_benefits():
    k = knowledge_set(program("benefits"), {"salary": 8000})
    assert k.members == frozenset((v,) for v in range(10000))
    assert (8000,) in k


def test_knowledge_set_identity_and_credit():
    assert knowledge_set(program("identity"), {"x": 2}).members == {(2,)}
    assert knowledge_set(program("credit"), {"incidents": 0, "tax": 3}).members == {(0, 3)}


def test_knowledge_set_is_kernel_class(small_programs):
    for p in small_programs[:10]:
        part = kernel(p)
        for cls in part.classes:
            point = min(cls)
            assert knowledge_set(p, dict(zip(p.input_names, point))).members == cls


@pytest.mark.parametrize(
    "f, g, expected",
    [
        ("mod2", "mod4", "f ⊑ g"),
        ("mod4", "mod2", "g ⊑ f"),
        ("pos", "mod2", "incomparable"),
        ("pos", "mod4", "incomparable"),
        ("mod2", "mod2", "f ≡ g"),
    ],
)
def test_compare(f, g, expected):
    assert compare(program(f), program(g)) == expected


def test_discloses_leq_examples():
    assert discloses_leq(program("mod2"), program("mod4"))
    assert not discloses_leq(program("pos"), program("mod2"))
    assert not discloses_leq(program("mod2"), program("pos"))
    assert knowledge_equivalent(program("pos"), program("pos"))


def test_signature_mismatch():
    with pytest.raises(SignatureMismatch):
        discloses_leq(program("mod2"), program("benefits"))
    with pytest.raises(SignatureMismatch):
        AttackerPair(program("credit"), program("benefits"))


def test_compose_with_identity():
    bl = program("benefits")
    pair = attacker_compose(AttackerPair(bl, projection(bl, "salary")))
    assert kernel_size(pair) == 100001


def test_compose_with_constant():
    bl = program("benefits")
    pair = attacker_compose(AttackerPair(bl, parse(CONST_BL)))
    assert kernel(pair).as_set() == kernel(bl).as_set()


def test_compose_parity_and_threshold():
    ge8 = parse("program ge8(x: int[0..15]) -> bool { return x >= 8; }")
    pair = attacker_compose(AttackerPair(program("mod2"), ge8))
    assert kernel_size(pair) == 4
    enc = pair_encoding(ge8)
    for x in range(16):
        assert enc.decode(evaluate(pair, {"x": x})) == (x % 2, int(x >= 8))


def test_compose_keeps_preconditions():
    p = parse("program p(x: int[0..9]) -> int requires x > 2; { return x / 3; }")
    h = parse("program h(x: int[0..9]) -> bool requires x > 2; { var t = x; while (t > 3) { t = t - 3; } return t == 3; }")
    pair = attacker_compose(AttackerPair(p, h))
    for x in range(3, 10):
        assert pair_encoding(h).decode(evaluate(pair, {"x": x})) == (x // 3, int(evaluate(h, {"x": x})))


@settings(max_examples=200)
@given(st.integers(-50, 50), st.integers(1, 40), st.integers(-1000, 1000), st.integers(0, 39))
def test_pair_encoding_round_trip(low, span, o1, offset):
    enc = PairEncoding(low, span)
    o2 = low + offset % span
    assert enc.decode(enc.encode(o1, o2)) == (o1, o2)


def test_sequential_composition():
    g = parse("program g(x: int[0..15]) -> int { return x % 4; }")
    f = parse("program f(y: int[0..3]) -> int { return y % 2; }")
    fg = compose_sequential(f, g)
    assert [evaluate(fg, {"x": x}) for x in range(16)] == [x % 2 for x in range(16)]
    assert compare(fg, program("mod4")) == "f ⊑ g"
    with pytest.raises(SignatureMismatch):
        compose_sequential(program("mod2"), program("benefits"))
    with pytest.raises(SignatureMismatch):
        compose_sequential(program("credit"), program("mod2"))


@pytest.mark.parametrize("name", ["benefits", "credit", "loyalty", "bool_or", "shipping"])
def test_hidden_use_with_identity_use(name):
    p = program(name)
    m = reference_best_monolithic(p)
    for n in p.input_names:
        assert hidden_use_safe(p, projection(p, n), m)


def test_hidden_use_constant_use_holds_for_any_minimiser():
    bl = program("benefits")
    assert hidden_use_safe(bl, parse(CONST_BL), identity_minimiser(bl, MONOLITHIC))


def test_hidden_use_needs_a_best_minimiser():
    bl = program("benefits")
    assert not hidden_use_safe(bl, projection(bl, "salary"), identity_minimiser(bl, MONOLITHIC))


def test_hidden_use_random_hidden_uses(rng):
    for p in family(rng, 4):
        m = reference_best_monolithic(p)
        for k in range(5):
            # hidden uses must read the same inputs as p
            h = random_program(rng, f"h{k}", p.params, SMALL)
            assert hidden_use_safe(p, h, m)


def test_disclosure_properties(rng):
    for _ in range(40):
        for outcome in disclosure_properties(rng):
            assert outcome.holds, outcome.name


def test_audit_examples():
    (breach,) = audit_log([({"salary": 7000}, True), ({"salary": 8000}, True)])
    assert (breach.first, breach.second) == (0, 1)
    assert dict(breach.input_a) == {"salary": 7000} and dict(breach.input_b) == {"salary": 8000}
    assert audit_log([({"salary": 0}, True), ({"salary": 10000}, False)]) == []
    assert audit_log([({"x": 5}, "A"), ({"x": 5}, "A")]) == []
    assert audit_log([]) == []


def test_audit_witnesses_are_ordered():
    entries = [({"x": v}, v % 2) for v in range(4)]
    assert [(b.first, b.second) for b in audit_log(entries)] == [(0, 2), (1, 3)]


def test_read_log():
    lines = [json.dumps({"input": {"salary": 7000}, "output": True}), "", '{"input": {"salary": 1}, "output": true}']
    assert read_log(lines) == [({"salary": 7000}, True), ({"salary": 1}, True)]
    with pytest.raises(ValueError, match="log line 1"):
        read_log(["[1, 2]"])


def test_outputs_helper_matches_evaluate():
    table = outputs(program("credit"))
    assert table[(0, 3)] == 2 and len(table) == 12
