"""Command-line entry point: ``datamin <command> ...``.

Exit codes: 0 success, 1 unreadable or invalid input, 2 synthesis or
enumeration failure (cap, budget, unroll bound), 3 a verified property
failed, 4 the audited log shows over-collection.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .dsl import parse_file
from .dsl.ast import BOOL, Program
from .errors import (
    BudgetExceeded,
    DataminError,
    DslError,
    SignatureMismatch,
    SymbolicExecutionError,
    SynthesisError,
)
from .logic import engine
from .symexec import DEFAULT_UNROLL, symbolic_execute
from .synth import DEFAULT_CLASS_CAP, MODES, MONOLITHIC, DISTRIBUTED, online_representative, smt_certify, synthesize

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SYNTHESIS = 2
EXIT_VERIFY = 3
EXIT_BREACH = 4

log = logging.getLogger("datamin")


class UsageError(Exception):
    """Bad flags or files; reported with exit code 1."""


@dataclass
class RunConfig:
    command: str
    inputs: List[Path]
    mode: str = MONOLITHIC
    unroll: int = DEFAULT_UNROLL
    budget: int = engine.DEFAULT_BUDGET
    class_cap: int = DEFAULT_CLASS_CAP
    output: Optional[Path] = None
    smt_solver: Optional[str] = None
    verbosity: int = 0
    extra: dict = field(default_factory=dict)

    def validate(self):
        for name in ("unroll", "budget", "class_cap"):
            if getattr(self, name) <= 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        for path in self.inputs:
            if not path.is_file():
                raise UsageError(f"no such file: {path}")
        if self.mode not in MODES:
            raise UsageError(f"unknown mode {self.mode!r}")


def _config(args) -> RunConfig:
    inputs = [Path(getattr(args, d)) for d in ("first", "second") if getattr(args, d, None)]
    cfg = RunConfig(
        command=args.command,
        inputs=inputs,
        mode=getattr(args, "mode", MONOLITHIC),
        unroll=getattr(args, "unroll", DEFAULT_UNROLL),
        budget=getattr(args, "budget", engine.DEFAULT_BUDGET),
        class_cap=getattr(args, "class_cap", DEFAULT_CLASS_CAP),
        output=Path(args.output) if getattr(args, "output", None) else None,
        smt_solver=getattr(args, "smt_solver", None) or os.environ.get("DATAMIN_SMT") or None,
        verbosity=args.verbose,
    )
    cfg.validate()
    return cfg


def _load(path: Path) -> Program:
    return parse_file(path)


def _analyse(cfg: RunConfig, program: Program):
    started = time.perf_counter()
    gamma = symbolic_execute(program, cfg.unroll, cfg.budget)
    log.info("symbolic execution of %s: %d leaves in %.3fs", program.name, len(gamma.leaves),
             time.perf_counter() - started)
    return gamma


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


# -- commands ----------------------------------------------------------------


def cmd_synth(cfg: RunConfig, out=sys.stdout) -> int:
    from .emit import to_json, to_source

    program = _load(cfg.inputs[0])
    gamma = _analyse(cfg, program)
    started = time.perf_counter()
    m = synthesize(program, gamma, cfg.mode, class_cap=cfg.class_cap, budget=cfg.budget)
    log.info("synthesis: %.3fs", time.perf_counter() - started)
    if cfg.smt_solver:
        problems = smt_certify(gamma, m, cfg.smt_solver)
        for p in problems:
            print(f"smt: {p}", file=sys.stderr)
        if problems:
            raise SynthesisError("external solver rejected some classes")
        log.info("external solver confirmed every class")
    doc = to_json(m, program)
    if cfg.output is not None:
        stem = f"{program.name}.{cfg.mode}"
        _write(cfg.output / f"{stem}.json", doc)
        if cfg.extra.get("emit_source", True):
            _write(cfg.output / f"{stem}.dm", to_source(m, program))
        if cfg.extra.get("dump_tree"):
            _write(cfg.output / f"{program.name}.tree.json", gamma.to_json())
        metrics = out
    else:
        out.write(doc)
        if cfg.extra.get("dump_tree"):
            sys.stderr.write(gamma.to_json())
        metrics = sys.stderr
    if cfg.mode == MONOLITHIC:
        (t,) = m.tables
        print(f"classes={len(t.rows)} domain={t.domain_size}", file=metrics)
    else:
        for t in m.tables:
            print(f"{t.scope[0]}: classes={len(t.rows)}/{t.domain_size}", file=metrics)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out=sys.stdout) -> int:
    from .emit import from_json, program_digest
    from .oracle import check_minimiser

    program = _load(cfg.inputs[0])
    text = cfg.inputs[1].read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise UsageError(f"{cfg.inputs[1]}: not JSON ({exc})") from None
    report = {"program": program.name, "minimiser": str(cfg.inputs[1]), "ok": True, "properties": []}
    if doc.get("program", {}).get("digest") != program_digest(program):
        report["properties"].append({"name": "digest", "ok": False,
                                     "message": "minimiser was produced for a different program text"})
    else:
        m = from_json(text, program, cfg.budget)
        violations = {v.prop: v for v in check_minimiser(program, m, cfg.budget)}
        for name in ("totality", "correctness", "idempotency", "best"):
            v = violations.get(name)
            entry = {"name": name, "ok": v is None}
            if v is not None:
                entry["message"] = v.message
                entry["witness"] = [list(w) if isinstance(w, tuple) else w for w in v.witness]
            report["properties"].append(entry)
    report["ok"] = all(p["ok"] for p in report["properties"])
    for p in report["properties"]:
        line = f"{'PASS' if p['ok'] else 'FAIL'} {p['name']}"
        if not p["ok"]:
            line += f": {p['message']}"
        print(line, file=out)
    if cfg.output is not None:
        _write(cfg.output, json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n")
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def _json_default(value):
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    raise TypeError(f"cannot serialise {value!r}")


def _parse_value(program: Program, name: str, text: str):
    domains = program.domains
    if name not in domains:
        raise UsageError(f"{program.name} has no input {name!r}")
    dom = domains[name]
    if dom.kind == BOOL:
        if text not in ("true", "false"):
            raise UsageError(f"{name} expects true or false, got {text!r}")
        return text == "true"
    try:
        value = int(text)
    except ValueError:
        raise UsageError(f"{name} expects an integer, got {text!r}") from None
    if not dom.contains(value):
        raise UsageError(f"{name}={value} is outside {dom}")
    return value


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def cmd_online(cfg: RunConfig, out=sys.stdout) -> int:
    program = _load(cfg.inputs[0])
    valuation = {}
    for item in cfg.extra.get("assignments", []):
        if "=" not in item:
            raise UsageError(f"--in expects name=value, got {item!r}")
        name, text = item.split("=", 1)
        valuation[name.strip()] = _parse_value(program, name.strip(), text.strip())
    missing = [n for n in program.input_names if n not in valuation]
    if missing:
        raise UsageError(f"missing --in for {', '.join(missing)}")
    gamma = _analyse(cfg, program)
    rep = online_representative(program, gamma, valuation, cfg.mode, cfg.budget)
    print(" ".join(f"{n}={_format_value(rep[n])}" for n in program.input_names), file=out)
    return EXIT_OK


def cmd_audit(cfg: RunConfig, out=sys.stdout) -> int:
    from .knowledge import audit_log, read_log

    try:
        with open(cfg.inputs[0], encoding="utf-8") as fh:
            entries = read_log(fh)
    except ValueError as exc:
        raise UsageError(f"{cfg.inputs[0]}: {exc}") from None
    breaches = audit_log(entries)
    for b in breaches:
        print(f"breach: entries {b.first + 1} and {b.second + 1} disclose "
              f"{json.dumps(dict(b.input_a), sort_keys=True)} and {json.dumps(dict(b.input_b), sort_keys=True)} "
              f"for the same output {json.dumps(b.output)}", file=out)
    print(f"entries={len(entries)} breaches={len(breaches)}", file=out)
    if cfg.output is not None:
        _write(cfg.output, json.dumps([b.to_dict() for b in breaches], indent=2, sort_keys=True) + "\n")
    return EXIT_BREACH if breaches else EXIT_OK


def cmd_knowledge(cfg: RunConfig, out=sys.stdout) -> int:
    from .knowledge import compare, kernel_size

    f, g = _load(cfg.inputs[0]), _load(cfg.inputs[1])
    print(compare(f, g, cfg.budget), file=out)
    print(f"f: {f.name} classes={kernel_size(f, cfg.budget)}", file=out)
    print(f"g: {g.name} classes={kernel_size(g, cfg.budget)}", file=out)
    return EXIT_OK


def cmd_smt(cfg: RunConfig, out=sys.stdout) -> int:
    from .logic.smtlib import run_solver, to_smtlib

    program = _load(cfg.inputs[0])
    gamma = _analyse(cfg, program)
    from .symexec import OUTPUT_VAR

    booleans = (OUTPUT_VAR,) if gamma.output_kind == BOOL else ()
    script = to_smtlib(gamma.formula(), gamma.env, booleans)
    if cfg.output is not None:
        _write(cfg.output, script)
    else:
        out.write(script)
    if cfg.smt_solver:
        print(f"solver: {run_solver(script, cfg.smt_solver)}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "verify": cmd_verify,
    "online": cmd_online,
    "audit": cmd_audit,
    "knowledge": cmd_knowledge,
    "smt": cmd_smt,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="datamin", description="Synthesise and check data minimisers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log progress (repeat for more)")
    sub = parser.add_subparsers(dest="command", required=True)

    def limits(p, mode_default=MONOLITHIC):
        p.add_argument("--mode", choices=MODES, default=mode_default)
        p.add_argument("--unroll", type=int, default=DEFAULT_UNROLL, help="loop unrolling bound")
        p.add_argument("--budget", type=int, default=engine.DEFAULT_BUDGET, help="enumeration budget in points")
        p.add_argument("--smt-solver", default=None,
                       help="external SMT-LIB solver binary for cross-checks (or set DATAMIN_SMT)")

    p = sub.add_parser("synth", help="synthesise a best minimiser")
    p.add_argument("first", metavar="PROGRAM")
    limits(p)
    p.add_argument("--class-cap", type=int, default=DEFAULT_CLASS_CAP, help="maximum classes per table")
    p.add_argument("-o", "--output", help="output directory (default: JSON on stdout)")
    p.add_argument("--no-source", action="store_true", help="do not write the emitted .dm source")
    p.add_argument("--dump-tree", action="store_true", help="also write the symbolic execution leaves")

    p = sub.add_parser("verify", help="check a minimiser document against its program")
    p.add_argument("first", metavar="PROGRAM")
    p.add_argument("second", metavar="MINIMISER")
    p.add_argument("--budget", type=int, default=engine.DEFAULT_BUDGET)
    p.add_argument("-o", "--output", help="write the JSON report here")

    p = sub.add_parser("online", help="representative of one concrete input")
    p.add_argument("first", metavar="PROGRAM")
    limits(p, DISTRIBUTED)
    p.add_argument("--in", dest="assignments", action="append", default=[], metavar="NAME=VALUE")

    p = sub.add_parser("audit", help="look for over-collection in a JSON-lines log")
    p.add_argument("first", metavar="LOG")
    p.add_argument("-o", "--output", help="write the breach list as JSON here")

    p = sub.add_parser("knowledge", help="compare what two programs disclose")
    p.add_argument("first", metavar="F")
    p.add_argument("second", metavar="G")
    p.add_argument("--budget", type=int, default=engine.DEFAULT_BUDGET)

    p = sub.add_parser("smt", help="export the symbolic characterisation as SMT-LIB2")
    p.add_argument("first", metavar="PROGRAM")
    limits(p)
    p.add_argument("-o", "--output", help="write the script here (default: stdout)")
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _config(args)
        cfg.extra = {
            "emit_source": not getattr(args, "no_source", False),
            "dump_tree": getattr(args, "dump_tree", False),
            "assignments": getattr(args, "assignments", []),
        }
        return COMMANDS[args.command](cfg, out)
    except (UsageError, DslError, SignatureMismatch, OSError) as exc:
        print(f"datamin: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SynthesisError, BudgetExceeded, SymbolicExecutionError) as exc:
        print(f"datamin: synthesis failed: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS
    except DataminError as exc:
        print(f"datamin: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS


if __name__ == "__main__":
    sys.exit(main())
