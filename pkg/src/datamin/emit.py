"""Minimisers as JSON decision tables and as mini-language source."""
from __future__ import annotations

import hashlib
import json
from typing import List, Optional

from . import __version__
from .dsl.ast import BOOL, Binary, BoolLit, Domain, Expr, If, IntLit, Param, Program, Return, Unary, Var
from .dsl.parser import check_program, parse_expr
from .dsl.printer import format_expr, format_program
from .errors import SignatureMismatch
from .logic import engine
from .logic.boxes import BoxUnion
from .logic.formula import conj, disj, neg
from .synth import GuardedRepresentative, Minimiser, Table

FORMAT = "datamin-minimiser"
FORMAT_VERSION = 1


def program_digest(program: Program) -> str:
    """sha256 of the normalised (pretty-printed) source."""
    text = format_program(program)
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def domain_text(domain: Domain) -> str:
    return "bool" if domain.kind == BOOL else f"int[{domain.lo}..{domain.hi}]"


def parse_domain(text: str) -> Domain:
    if text == "bool":
        return Domain.boolean()
    if text.startswith("int[") and text.endswith("]") and ".." in text:
        lo, hi = text[4:-1].split("..")
        return Domain.int_range(int(lo), int(hi))
    raise ValueError(f"bad domain {text!r}")


def _plain(value):
    return bool(value) if isinstance(value, (bool,)) else int(value)


def _box_formula(names, domains, box) -> Expr:
    """Interval conditions, leaving out bounds that coincide with the domain's."""
    parts = []
    for name, dom, (lo, hi) in zip(names, domains, box):
        v = Var(name)
        if dom.kind == BOOL:
            if lo == hi:
                parts.append(v if hi else neg(v))
            continue
        if lo == hi:
            parts.append(Binary("==", v, IntLit(lo)))
            continue
        if lo != dom.lo:
            parts.append(Binary(">=", v, IntLit(lo)))
        if hi != dom.hi:
            parts.append(Binary("<=", v, IntLit(hi)))
    return conj(*parts)


def guard_expr(guard: BoxUnion) -> Expr:
    """Compact condition for a guard: domain-end bounds dropped, points as equalities."""
    return disj(*(_box_formula(guard.names, guard.domains, box) for box in guard.boxes))


def _atom_bounds(atom: Expr, index, domains):
    """(axis, lo, hi) for one emitted interval atom, or None for other shapes."""
    if isinstance(atom, Var) and atom.name in index:
        return index[atom.name], 1, 1
    if isinstance(atom, Unary) and atom.op == "!" and isinstance(atom.arg, Var) and atom.arg.name in index:
        return index[atom.arg.name], 0, 0
    if not (isinstance(atom, Binary) and isinstance(atom.left, Var) and isinstance(atom.right, IntLit)):
        return None
    axis = index.get(atom.left.name)
    if axis is None or domains[axis].kind == BOOL:
        return None
    c, dom = atom.right.value, domains[axis]
    bounds = {"==": (c, c), ">=": (c, dom.hi), "<=": (dom.lo, c)}.get(atom.op)
    return None if bounds is None else (axis, *bounds)


def _split(e: Expr, op: str):
    if isinstance(e, Binary) and e.op == op:
        return _split(e.left, op) + _split(e.right, op)
    return [e]


def guard_union(expr: Expr, names, domains) -> Optional[BoxUnion]:
    """Read a guard in the emitted interval form straight into boxes.

    Returns None when the text has some other shape; callers then fall
    back to enumeration. Multi-box guards are re-canonicalised.
    """
    index = {n: k for k, n in enumerate(names)}
    boxes = []
    for part in _split(expr, "||"):
        box = [(d.lo, d.hi) if d.kind != BOOL else (False, True) for d in domains]
        for atom in _split(part, "&&"):
            if isinstance(atom, BoolLit) and atom.value:
                continue
            found = _atom_bounds(atom, index, domains)
            if found is None:
                return None
            axis, lo, hi = found
            if domains[axis].kind == BOOL:
                lo, hi = bool(lo), bool(hi)
            old_lo, old_hi = box[axis]
            box[axis] = (max(old_lo, lo), min(old_hi, hi))
        if all(lo <= hi for lo, hi in box):
            boxes.append(tuple(box))
    union = BoxUnion(tuple(names), tuple(domains), tuple(boxes))
    if len(boxes) > 1:
        union = BoxUnion.from_mask(names, domains, union.to_mask())
    return union


def to_document(m: Minimiser, program: Program) -> dict:
    if m.input_names != program.input_names:
        raise SignatureMismatch(f"minimiser for {m.program_name} does not fit {program.name}")
    tables = []
    for t in m.tables:
        tables.append({
            "inputs": list(t.scope),
            "domain_size": t.domain_size,
            "classes": len(t.rows),
            "rows": [
                {
                    "guard": format_expr(guard_expr(row.guard)),
                    "representative": {n: _plain(v) for n, v in zip(t.scope, row.representative)},
                }
                for row in t.rows
            ],
        })
    return {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "tool": {"name": "datamin", "version": __version__},
        "program": {
            "name": program.name,
            "digest": program_digest(program),
            "inputs": [{"name": p.name, "domain": domain_text(p.domain)} for p in program.params],
        },
        "mode": m.mode,
        "tables": tables,
    }


def to_json(m: Minimiser, program: Program) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(to_document(m, program), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def from_document(doc: dict, program: Optional[Program] = None,
                  budget: int = engine.DEFAULT_BUDGET) -> Minimiser:
    """Rebuild a minimiser; guards are re-derived by evaluating their text.

    When `program` is given its digest must match the document.
    """
    if doc.get("format") != FORMAT:
        raise ValueError(f"not a {FORMAT} document")
    if program is not None and doc["program"]["digest"] != program_digest(program):
        raise SignatureMismatch(
            f"document was produced for a different version of {doc['program']['name']}"
        )
    params = tuple(Param(i["name"], parse_domain(i["domain"])) for i in doc["program"]["inputs"])
    env = {p.name: p.domain for p in params}
    types = {p.name: p.domain.kind for p in params}
    tables = []
    for t in doc["tables"]:
        scope = tuple(t["inputs"])
        rows = []
        for row in t["rows"]:
            expr = parse_expr(row["guard"], types)
            doms = [env[n] for n in scope]
            guard = guard_union(expr, scope, doms)
            if guard is None:
                guard = engine.project(expr, env, list(scope), budget)
            rep = tuple(row["representative"][n] for n in scope)
            rows.append(GuardedRepresentative(guard, rep))
        tables.append(Table(scope, tuple(env[n] for n in scope), tuple(rows)))
    return Minimiser(doc["mode"], doc["program"]["name"], tuple((p.name, p.domain) for p in params), tuple(tables))


def from_json(text: str, program: Optional[Program] = None, budget: int = engine.DEFAULT_BUDGET) -> Minimiser:
    return from_document(json.loads(text), program, budget)


# -- source emission ---------------------------------------------------------


def _literal(domain: Domain, value) -> Expr:
    return BoolLit(bool(value)) if domain.kind == BOOL else IntLit(int(value))


def _chain(rows: List[GuardedRepresentative], position: int, dom: Domain):
    """if (g1) return r1; else if (g2) ... else return rn; as nested blocks."""
    last = (Return(_literal(dom, rows[-1].representative[position])),)
    body = last
    for row in reversed(rows[:-1]):
        body = (If(guard_expr(row.guard), (Return(_literal(dom, row.representative[position])),), body),)
    return body


def table_programs(m: Minimiser, program: Program, t: Table) -> List[Program]:
    params = tuple(p for p in program.params if p.name in t.scope)
    union = BoxUnion.from_mask(t.scope, t.domains, t.row_index() >= 0)
    requires = None if union.count() == t.domain_size else guard_expr(union)
    out = []
    for position, name in enumerate(t.scope):
        dom = t.domains[position]
        body = _chain(list(t.rows), position, dom) if t.rows else (Return(_literal(dom, dom.values()[0])),)
        emitted = Program(f"{program.name}_min_{name}", params, dom.kind, body, requires)
        check_program(emitted)
        out.append(emitted)
    return out


def minimiser_programs(m: Minimiser, program: Program) -> List[Program]:
    """One program per input, named `<program>_min_<input>`.

    In distributed mode each takes only its own input; in monolithic mode
    each takes every input and returns one coordinate of the representative.
    A `requires` clause appears when the table does not cover the whole
    domain, which is what lets the last branch be a plain `else`.
    """
    out: List[Program] = []
    for t in m.tables:
        out.extend(table_programs(m, program, t))
    order = {n: k for k, n in enumerate(program.input_names)}
    out.sort(key=lambda p: order[p.name[len(program.name) + len("_min_"):]])
    return out


def to_source(m: Minimiser, program: Program) -> str:
    header = f"// minimiser for {program.name} ({m.mode}), {program_digest(program)}\n"
    return header + "\n".join(format_program(p) for p in minimiser_programs(m, program))


def schema(name: str = "minimiser") -> dict:
    """A shipped JSON schema: 'minimiser' or 'report'."""
    from importlib import resources

    text = resources.files("datamin").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
