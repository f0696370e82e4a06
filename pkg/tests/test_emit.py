import itertools
import json

import jsonschema
import pytest

from datamin import corpus, emit
from datamin.dsl import evaluate, parse, parse_programs
from datamin.errors import PreconditionViolated, SignatureMismatch
from datamin.oracle import same_partition
from datamin.symexec import symbolic_execute
from datamin.synth import DISTRIBUTED, MODES, MONOLITHIC, apply, identity_minimiser, synthesize

from conftest import gamma, program


def synth(name, mode):
    return synthesize(program(name), gamma(name), mode)


def emitted_agrees(p, m):
    """Every emitted program returns its coordinate of apply(m, ·) at every point."""
    text = emit.to_source(m, p)
    emitted = {q.name: q for q in parse_programs(text)}
    assert sorted(emitted) == sorted(f"{p.name}_min_{n}" for n in p.input_names)
    for values in itertools.product(*(d.values() for d in p.domains.values())):
        v = dict(zip(p.input_names, values))
        try:
            evaluate(p, v)
        except PreconditionViolated:
            continue
        expected = apply(m, v)
        for name in p.input_names:
            q = emitted[f"{p.name}_min_{name}"]
            args = {k: v[k] for k in q.input_names}
            assert evaluate(q, args) == expected[name]


def test_benefits_json():
    doc = json.loads(emit.to_json(synth("benefits", MONOLITHIC), program("benefits")))
    (table,) = doc["tables"]
    assert [r["representative"] for r in table["rows"]] == [{"salary": 0}, {"salary": 10000}]
    assert [r["guard"] for r in table["rows"]] == ["salary <= 9999", "salary >= 10000"]
    assert table["domain_size"] == 100001
    assert doc["program"]["inputs"] == [{"name": "salary", "domain": "int[0..100000]"}]


def test_credit_json():
    doc = json.loads(emit.to_json(synth("credit", DISTRIBUTED), program("credit")))
    assert [t["inputs"] for t in doc["tables"]] == [["incidents"], ["tax"]]
    assert [len(t["rows"]) for t in doc["tables"]] == [3, 2]


def test_constant_json():
    doc = json.loads(emit.to_json(synth("const", MONOLITHIC), program("const")))
    assert [len(t["rows"]) for t in doc["tables"]] == [1]
    assert doc["tables"][0]["rows"][0]["guard"] == "true"


@pytest.mark.parametrize("name", corpus.names())
@pytest.mark.parametrize("mode", MODES)
def test_json_valid_stable_and_loadable(name, mode):
    p = program(name)
    first = emit.to_json(synthesize(p, symbolic_execute(p), mode), p)
    second = emit.to_json(synthesize(p, symbolic_execute(p), mode), p)
    assert first == second
    jsonschema.validate(json.loads(first), emit.schema("minimiser"))
    back = emit.from_json(first, p)
    original = synth(name, mode)
    assert back == original
    assert same_partition(back, original)


def test_from_json_rejects_other_program_version():
    text = emit.to_json(synth("benefits", MONOLITHIC), program("benefits"))
    edited = parse(corpus.source("benefits").replace("10000", "12000"))
    with pytest.raises(SignatureMismatch):
        emit.from_json(text, edited)
    # without a program to check against, the document still loads
    assert emit.from_json(text) == synth("benefits", MONOLITHIC)


def test_to_json_rejects_wrong_program():
    with pytest.raises(SignatureMismatch):
        emit.to_json(synth("benefits", MONOLITHIC), program("credit"))


def test_benefits_source_shape():
    text = emit.to_source(synth("benefits", MONOLITHIC), program("benefits"))
    (q,) = parse_programs(text)
    assert "if (salary <= 9999) {\n        return 0;\n    } else {\n        return 10000;" in text
    assert q.requires is None


def test_loyalty_source_has_17_branches():
    text = emit.to_source(synth("loyalty", MONOLITHIC), program("loyalty"))
    assert text.count("return ") == 17
    assert text.count("if (") == 16
    first = text.index("return ")
    assert text[first:first + 9] == "return 0;"


def test_identity_source_two_branches():
    p = corpus.load("identity")
    small = p.__class__(p.name, (p.params[0].__class__("x", p.params[0].domain.int_range(0, 1)),), p.output, p.body)
    text = emit.to_source(identity_minimiser(small, DISTRIBUTED), small)
    (q,) = parse_programs(text)
    assert [evaluate(q, {"x": x}) for x in (0, 1)] == [0, 1]
    assert text.count("return ") == 2


def test_requires_when_coverage_is_partial():
    text = emit.to_source(synth("shipping", DISTRIBUTED), program("shipping"))
    weight = next(q for q in parse_programs(text) if q.name.endswith("weight"))
    assert weight.requires is not None
    with pytest.raises(PreconditionViolated):
        evaluate(weight, {"weight": 0})


@pytest.mark.parametrize("name", corpus.names())
@pytest.mark.parametrize("mode", MODES)
def test_source_round_trip(name, mode):
    emitted_agrees(program(name), synth(name, mode))


def test_source_round_trip_random(random_programs):
    for p in random_programs[:6]:
        m = synthesize(p, symbolic_execute(p), MONOLITHIC)
        emitted_agrees(p, m)


def test_digest_tracks_normalised_source():
    p = program("credit")
    again = corpus.load("credit")
    assert emit.program_digest(p) == emit.program_digest(again)
    assert emit.program_digest(p) != emit.program_digest(program("benefits"))
    assert emit.program_digest(p).startswith("sha256:")


@pytest.mark.parametrize("text", ["bool", "int[0..3]", "int[-5..-1]"])
def test_domain_text_round_trip(text):
    assert emit.domain_text(emit.parse_domain(text)) == text


def test_shipped_schemas_are_valid():
    for name in ("minimiser", "report"):
        jsonschema.Draft202012Validator.check_schema(emit.schema(name))


@pytest.mark.parametrize(
    "text, expected",
    [
        ("x <= 2", [(0, 2)]),
        ("x >= 3 && x <= 5", [(3, 5)]),
        ("x == 1 || x >= 8", [(1, 1), (8, 9)]),
        ("x <= 4 || x >= 3", [(0, 9)]),
        ("true", [(0, 9)]),
        ("x >= 5 && x <= 4", []),
    ],
)
def test_guard_text_read_directly(text, expected):
    from datamin.dsl import Domain, parse_expr
    from datamin.logic import project

    dom = Domain.int_range(0, 9)
    expr = parse_expr(text, {"x": "int"})
    direct = emit.guard_union(expr, ("x",), (dom,))
    assert direct.intervals() == expected
    assert direct == project(expr, {"x": dom}, ["x"])


def test_other_guard_shapes_fall_back_to_enumeration():
    from datamin.dsl import Domain, parse_expr

    expr = parse_expr("x % 2 == 0", {"x": "int"})
    assert emit.guard_union(expr, ("x",), (Domain.int_range(0, 9),)) is None
    doc = json.loads(emit.to_json(synth("mod2", MONOLITHIC), program("mod2")))
    doc["tables"][0]["rows"][0]["guard"] = "x % 2 == 0"
    doc["tables"][0]["rows"][1]["guard"] = "x % 2 != 0"
    assert same_partition(emit.from_document(doc, program("mod2")), synth("mod2", MONOLITHIC))
