"""Recursive-descent parser and static checker for `.dm` programs.

Token set::

    keywords     program requires int bool var if else while return true false
    punctuation  ( ) { } [ ] , : ; -> ..
    operators    = + - * / % < <= > >= == != && || !
    literals     decimal integers; identifiers [A-Za-z_][A-Za-z0-9_]*
    comments     // to end of line

Binary operator precedence, loosest first: ``||``, ``&&``, ``== !=``,
``< <= > >=``, ``+ -``, ``* / %``; all left-associative. Unary ``-`` and
``!`` bind tightest.
"""
from __future__ import annotations

import re
from typing import List, Optional

from ..errors import ParseError, TypeCheckError
from .ast import (
    ARITH_OPS,
    BOOL,
    COMPARE_OPS,
    EQUALITY_OPS,
    INT,
    LOGIC_OPS,
    Assign,
    Binary,
    BoolLit,
    Domain,
    Expr,
    If,
    IntLit,
    Param,
    Program,
    Return,
    Stmt,
    Unary,
    Var,
    VarDecl,
    While,
)

KEYWORDS = frozenset(
    "program requires int bool var if else while return true false".split()
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|\.\.|==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){}\[\],:;])
    """,
    re.VERBOSE,
)

# (operators, precedence) from loosest to tightest
_LEVELS = (("||",), ("&&",), EQUALITY_OPS, COMPARE_OPS, ("+", "-"), ("*", "/", "%"))


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(source: str) -> List[Token]:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise ParseError(f"unexpected character {source[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = i - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident" and text in KEYWORDS:
            tokens.append(Token("kw", text, line, col))
        elif kind in ("int", "ident", "op"):
            tokens.append(Token(kind, text, line, col))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def at(self, text) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def accept(self, text) -> Optional[Token]:
        if self.at(text):
            tok = self.tok
            self.i += 1
            return tok
        return None

    def expect(self, text) -> Token:
        tok = self.accept(text)
        if tok is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return tok

    def ident(self) -> Token:
        tok = self.tok
        if tok.kind != "ident":
            found = tok.text or "end of input"
            raise self.error(f"expected identifier, found {found!r}")
        self.i += 1
        return tok

    def signed_int(self) -> int:
        neg = self.accept("-") is not None
        tok = self.tok
        if tok.kind != "int":
            raise self.error("expected integer literal")
        self.i += 1
        return -int(tok.text) if neg else int(tok.text)

    # program := "program" IDENT "(" params ")" "->" type ("requires" expr ";")? block
    def program(self) -> Program:
        self.expect("program")
        name = self.ident().text
        self.expect("(")
        params = [self.param()]
        while self.accept(","):
            params.append(self.param())
        self.expect(")")
        self.expect("->")
        if self.accept("int"):
            output = INT
        elif self.accept("bool"):
            output = BOOL
        else:
            raise self.error("expected output type 'int' or 'bool'")
        requires = None
        if self.accept("requires"):
            requires = self.expr()
            self.expect(";")
        body = self.block()
        return Program(name, tuple(params), output, body, requires)

    def end(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after program body")

    def param(self) -> Param:
        tok = self.ident()
        self.expect(":")
        if self.accept("bool"):
            return Param(tok.text, Domain.boolean(), (tok.line, tok.col))
        int_tok = self.expect("int")
        if not self.accept("["):
            raise ParseError(
                f"input {tok.text!r} has an unbounded domain; declare int[lo..hi]",
                int_tok.line,
                int_tok.col,
            )
        lo = self.signed_int()
        self.expect("..")
        hi = self.signed_int()
        self.expect("]")
        if lo > hi:
            raise ParseError(f"empty domain [{lo}..{hi}] for {tok.text!r}", tok.line, tok.col)
        return Param(tok.text, Domain.int_range(lo, hi), (tok.line, tok.col))

    def block(self):
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.stmt())
        self.expect("}")
        return tuple(stmts)

    def stmt(self) -> Stmt:
        tok = self.tok
        pos = (tok.line, tok.col)
        if self.accept("var"):
            name = self.ident().text
            self.expect("=")
            init = self.expr()
            self.expect(";")
            return VarDecl(name, init, pos)
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            orelse = self.block() if self.accept("else") else ()
            return If(cond, then, orelse, pos)
        if self.accept("while"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(cond, self.block(), pos)
        if self.accept("return"):
            e = self.expr()
            self.expect(";")
            return Return(e, pos)
        if tok.kind == "ident":
            self.i += 1
            self.expect("=")
            e = self.expr()
            self.expect(";")
            return Assign(tok.text, e, pos)
        raise self.error(f"expected statement, found {tok.text or 'end of input'!r}")

    def expr(self, level=0) -> Expr:
        if level == len(_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _LEVELS[level]:
            tok = self.tok
            self.i += 1
            right = self.expr(level + 1)
            left = Binary(tok.text, left, right, (tok.line, tok.col))
        return left

    def unary(self) -> Expr:
        tok = self.tok
        if self.accept("-") or self.accept("!"):
            return Unary(tok.text, self.unary(), (tok.line, tok.col))
        return self.atom()

    def atom(self) -> Expr:
        tok = self.tok
        pos = (tok.line, tok.col)
        if tok.kind == "int":
            self.i += 1
            return IntLit(int(tok.text), pos)
        if self.accept("true"):
            return BoolLit(True, pos)
        if self.accept("false"):
            return BoolLit(False, pos)
        if tok.kind == "ident":
            self.i += 1
            return Var(tok.text, pos)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        raise self.error(f"expected expression, found {tok.text or 'end of input'!r}")


def parse(source: str) -> Program:
    """Parse and statically check a program; raises ParseError/TypeCheckError."""
    parser = _Parser(source)
    program = parser.program()
    parser.end()
    check_program(program)
    return program


def parse_programs(source: str) -> List[Program]:
    """Parse a file holding one or more programs, such as emitted minimisers."""
    parser = _Parser(source)
    programs = [parser.program()]
    while parser.tok.kind != "eof":
        programs.append(parser.program())
    names = [p.name for p in programs]
    for p in programs:
        if names.count(p.name) > 1:
            raise ParseError(f"program {p.name!r} is defined twice")
        check_program(p)
    return programs


def parse_expr(source: str, types: Optional[dict] = None) -> Expr:
    """Parse a standalone expression, type-checking it when `types` is given."""
    p = _Parser(source)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after expression")
    if types is not None:
        type_of(e, types)
    return e


def parse_file(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# ---------------------------------------------------------------------------
# static checks


def _err(message, node):
    pos = getattr(node, "pos", None) or (None, None)
    return TypeCheckError(message, *pos)


def _is_static_zero(e: Expr) -> bool:
    while isinstance(e, Unary) and e.op == "-":
        e = e.arg
    return isinstance(e, IntLit) and e.value == 0


def type_of(e: Expr, types) -> str:
    """Type of `e` given a name -> 'int'/'bool' lookup; raises TypeCheckError."""
    if isinstance(e, IntLit):
        return INT
    if isinstance(e, BoolLit):
        return BOOL
    if isinstance(e, Var):
        t = types.get(e.name)
        if t is None:
            raise _err(f"use of {e.name!r} before assignment", e)
        return t
    if isinstance(e, Unary):
        t = type_of(e.arg, types)
        want = INT if e.op == "-" else BOOL
        if t != want:
            raise _err(f"operator {e.op!r} expects {want}, got {t}", e)
        return want
    if isinstance(e, Binary):
        lt = type_of(e.left, types)
        rt = type_of(e.right, types)
        if e.op in ARITH_OPS:
            if lt != INT or rt != INT:
                raise _err(f"operator {e.op!r} expects int operands", e)
            if e.op in ("/", "%") and _is_static_zero(e.right):
                raise _err("division by literal zero", e)
            return INT
        if e.op in COMPARE_OPS:
            if lt != INT or rt != INT:
                raise _err(f"operator {e.op!r} expects int operands", e)
            return BOOL
        if e.op in EQUALITY_OPS:
            if lt != rt:
                raise _err(f"operator {e.op!r} compares {lt} with {rt}", e)
            return BOOL
        if e.op in LOGIC_OPS:
            if lt != BOOL or rt != BOOL:
                raise _err(f"operator {e.op!r} expects bool operands", e)
            return BOOL
    raise TypeError(f"not an expression: {e!r}")


def _contains_return(stmts) -> bool:
    for s in stmts:
        if isinstance(s, Return):
            return True
        if isinstance(s, If) and (_contains_return(s.then) or _contains_return(s.orelse)):
            return True
        if isinstance(s, While) and _contains_return(s.body):
            return True
    return False


def definitely_returns(stmts) -> bool:
    for s in stmts:
        if isinstance(s, Return):
            return True
        if isinstance(s, If) and definitely_returns(s.then) and definitely_returns(s.orelse):
            return True
    return False


class _Checker:
    def __init__(self, program: Program):
        self.program = program
        self.scopes = [{p.name: p.domain.kind for p in program.params}]

    def lookup(self):
        merged = {}
        for scope in self.scopes:
            merged.update(scope)
        return merged

    def block(self, stmts, new_scope=True):
        if new_scope:
            self.scopes.append({})
        try:
            for k, s in enumerate(stmts):
                self.stmt(s)
                if definitely_returns([s]) and k + 1 < len(stmts):
                    raise _err("unreachable statement after return", stmts[k + 1])
        finally:
            if new_scope:
                self.scopes.pop()

    def stmt(self, s):
        types = self.lookup()
        if isinstance(s, VarDecl):
            if s.name in types:
                raise _err(f"redeclaration of {s.name!r}", s)
            self.scopes[-1][s.name] = type_of(s.init, types)
        elif isinstance(s, Assign):
            if s.name not in types:
                raise _err(f"assignment to undeclared variable {s.name!r}", s)
            t = type_of(s.expr, types)
            if t != types[s.name]:
                raise _err(f"cannot assign {t} to {types[s.name]} variable {s.name!r}", s)
        elif isinstance(s, If):
            if type_of(s.cond, types) != BOOL:
                raise _err("if condition must be bool", s)
            self.block(s.then)
            self.block(s.orelse)
        elif isinstance(s, While):
            if type_of(s.cond, types) != BOOL:
                raise _err("while condition must be bool", s)
            if _contains_return(s.body):
                raise _err("return inside loop body", s)
            self.block(s.body)
        elif isinstance(s, Return):
            t = type_of(s.expr, types)
            if t != self.program.output:
                raise _err(f"returning {t} from a program declared -> {self.program.output}", s)
        else:
            raise TypeError(f"not a statement: {s!r}")


def check_program(program: Program) -> None:
    """Validate a Program built by the parser or by AST construction."""
    seen = set()
    for p in program.params:
        if p.name in seen:
            raise _err(f"duplicate input {p.name!r}", p)
        if p.name in KEYWORDS:
            raise _err(f"{p.name!r} is a keyword", p)
        seen.add(p.name)
    if program.output not in (INT, BOOL):
        raise TypeCheckError(f"unknown output type {program.output!r}")
    if program.requires is not None:
        inputs = {p.name: p.domain.kind for p in program.params}
        if type_of(program.requires, inputs) != BOOL:
            raise _err("precondition must be bool", program.requires)
    checker = _Checker(program)
    checker.block(program.body, new_scope=False)
    if not definitely_returns(program.body):
        message = f"program {program.name!r} does not return on every path"
        if program.body:
            raise _err(message, program.body[-1])
        raise TypeCheckError(message)

