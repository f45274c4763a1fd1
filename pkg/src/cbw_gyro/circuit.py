"""A small line-oriented netlist language for two-port optical chains.

Example::

    # one MZI with the Sagnac phase on the lower arm
    chain mzi : bs(0.5) -> phase lower (psi) -> bs(0.5)
    chain ring : mzi -> phase upper (phi) -> mzi

Each ``chain`` line lists elements in propagation order, so the leftmost
element acts first on the input field and the compiled matrix is the product
of the element matrices in reverse textual order. Elements are::

    bs(EXPR)                      beam splitter, power reflectance EXPR
    phase upper|lower|both (EXPR) arm phase in radians
    mirror [ (EXPR) ]             amplitude factor, default 1
    NAME                          a chain defined on an earlier line

Expressions use ``+ - * /``, parentheses, numeric literals, ``pi`` and free
symbols that are bound at compile time.
"""

from __future__ import annotations

import dataclasses
import math
import re
from importlib import resources
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .optics import ARMS, bs_matrix, phase_matrix

__all__ = [
    "BS",
    "Chain",
    "ChainRef",
    "CircuitAst",
    "CircuitError",
    "CompileError",
    "Diagnostic",
    "Mirror",
    "Phase",
    "check",
    "compile_chain",
    "evaluate",
    "fig1c_path",
    "fig1c_source",
    "free_symbols",
    "load",
    "parse",
    "pretty_print",
]

KEYWORDS = {"chain", "bs", "phase", "mirror", "pi"} | set(ARMS)


@dataclasses.dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int
    column: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class CircuitError(Exception):
    """Raised with one or more error diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class CompileError(CircuitError):
    pass


# ---------------------------------------------------------------------------
# AST

_pos = dict(compare=False, repr=False, default=0)


@dataclasses.dataclass(frozen=True)
class Num:
    value: float
    line: int = dataclasses.field(**_pos)
    column: int = dataclasses.field(**_pos)


@dataclasses.dataclass(frozen=True)
class Sym:
    name: str
    line: int = dataclasses.field(**_pos)
    column: int = dataclasses.field(**_pos)


@dataclasses.dataclass(frozen=True)
class Neg:
    operand: "Expr"
    line: int = dataclasses.field(**_pos)
    column: int = dataclasses.field(**_pos)


@dataclasses.dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    line: int = dataclasses.field(**_pos)
    column: int = dataclasses.field(**_pos)


Expr = Union[Num, Sym, Neg, BinOp]


@dataclasses.dataclass(frozen=True)
class BS:
    reflectance: Expr
    line: int = dataclasses.field(**_pos)
    column: int = dataclasses.field(**_pos)


@dataclasses.dataclass(frozen=True)
class Phase:
    arm: str
    angle: Expr
    line: int = dataclasses.field(**_pos)
    column: int = dataclasses.field(**_pos)


@dataclasses.dataclass(frozen=True)
class Mirror:
    amplitude: Expr | None = None
    line: int = dataclasses.field(**_pos)
    column: int = dataclasses.field(**_pos)


@dataclasses.dataclass(frozen=True)
class ChainRef:
    name: str
    target: int  # index into CircuitAst.chains of the definition referenced
    line: int = dataclasses.field(**_pos)
    column: int = dataclasses.field(**_pos)


Element = Union[BS, Phase, Mirror, ChainRef]


@dataclasses.dataclass(frozen=True)
class Chain:
    name: str
    elements: tuple
    line: int = dataclasses.field(**_pos)
    column: int = dataclasses.field(**_pos)


@dataclasses.dataclass(frozen=True)
class CircuitAst:
    """Chains in definition order. Later definitions shadow earlier ones."""

    chains: tuple

    @property
    def names(self) -> list:
        return list(dict.fromkeys(c.name for c in self.chains))

    def index_of(self, name: str) -> int:
        for k in range(len(self.chains) - 1, -1, -1):
            if self.chains[k].name == name:
                return k
        raise KeyError(name)

    def chain(self, name: str) -> Chain:
        return self.chains[self.index_of(name)]


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#.*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<op>[-+*/():])
    """,
    re.VERBOSE,
)


@dataclasses.dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize_line(text: str, lineno: int) -> list:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise CircuitError(
                [Diagnostic("error", lineno, pos + 1, f"unexpected character {text[pos]!r}")]
            )
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tok_text = m.group()
            if kind == "op" or kind == "arrow":
                kind = tok_text
            tokens.append(_Token(kind, tok_text, lineno, pos + 1))
        pos = m.end()
    tokens.append(_Token("eol", "", lineno, len(text) + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _LineParser:
    def __init__(self, tokens, defined: dict):
        self.tokens = tokens
        self.pos = 0
        self.defined = defined  # name -> index of the latest definition
        self.current = None

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.tok
        return CircuitError([Diagnostic("error", tok.line, tok.column, message)])

    def advance(self) -> _Token:
        tok = self.tok
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> _Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of line"
            raise self.error(f"expected {what or repr(kind)}, found {found!r}")
        return self.advance()

    def keyword(self, word: str) -> _Token:
        if self.tok.kind != "name" or self.tok.text != word:
            found = self.tok.text or "end of line"
            raise self.error(f"expected {word!r}, found {found!r}")
        return self.advance()

    def chain(self) -> Chain:
        head = self.keyword("chain")
        name_tok = self.expect("name", "chain name")
        if name_tok.text in KEYWORDS:
            raise self.error(f"{name_tok.text!r} is a reserved word", name_tok)
        self.expect(":", "':'")
        self.current = name_tok.text
        elements = [self.element()]
        while self.tok.kind == "->":
            self.advance()
            elements.append(self.element())
        if self.tok.kind != "eol":
            raise self.error(f"expected '->' or end of line, found {self.tok.text!r}")
        return Chain(name_tok.text, tuple(elements), head.line, head.column)

    def element(self) -> Element:
        tok = self.tok
        if tok.kind != "name":
            found = tok.text or "end of line"
            raise self.error(f"expected an element, found {found!r}")
        word = tok.text
        if word == "bs":
            self.advance()
            return BS(self.paren_expr(), tok.line, tok.column)
        if word == "phase":
            self.advance()
            arm_tok = self.tok
            if arm_tok.kind != "name" or arm_tok.text not in ARMS:
                found = arm_tok.text or "end of line"
                raise self.error(
                    f"unknown arm keyword {found!r}; expected one of {', '.join(ARMS)}"
                )
            self.advance()
            return Phase(arm_tok.text, self.paren_expr(), tok.line, tok.column)
        if word == "mirror":
            self.advance()
            amp = self.paren_expr() if self.tok.kind == "(" else None
            return Mirror(amp, tok.line, tok.column)
        if word in KEYWORDS:
            raise self.error(f"{word!r} is not an element")
        self.advance()
        if word not in self.defined:
            if word == self.current:
                raise self.error(f"chain {word!r} refers to itself (cycle)", tok)
            raise self.error(f"undefined chain {word!r}", tok)
        return ChainRef(word, self.defined[word], tok.line, tok.column)

    def paren_expr(self) -> Expr:
        self.expect("(", "'('")
        expr = self.expr()
        self.expect(")", "')'")
        return expr

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.advance()
            node = BinOp(op.text, node, self.term(), op.line, op.column)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind in ("*", "/"):
            op = self.advance()
            node = BinOp(op.text, node, self.unary(), op.line, op.column)
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "-":
            op = self.advance()
            return Neg(self.unary(), op.line, op.column)
        if self.tok.kind == "+":
            self.advance()
            return self.unary()
        return self.atom()

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text), tok.line, tok.column)
        if tok.kind == "name":
            if tok.text in KEYWORDS - {"pi"}:
                raise self.error(f"{tok.text!r} cannot appear in an expression")
            self.advance()
            return Sym(tok.text, tok.line, tok.column)
        if tok.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")", "')'")
            return node
        found = tok.text or "end of line"
        raise self.error(f"expected an expression, found {found!r}")


def parse(source: str) -> CircuitAst:
    """Parse netlist text; raises :class:`CircuitError` listing every bad line."""
    chains, diagnostics, defined = [], [], {}
    for lineno, text in enumerate(source.splitlines(), start=1):
        try:
            tokens = _tokenize_line(text, lineno)
            if tokens[0].kind == "eol":
                continue
            chain = _LineParser(tokens, defined).chain()
        except CircuitError as exc:
            diagnostics.extend(exc.diagnostics)
            continue
        defined[chain.name] = len(chains)
        chains.append(chain)
    if diagnostics:
        raise CircuitError(diagnostics)
    return CircuitAst(tuple(chains))


def load(path) -> CircuitAst:
    return parse(Path(path).read_text(encoding="utf-8"))


def fig1c_path() -> Path:
    """Path of the bundled ``fig1c.cir`` netlist."""
    return Path(str(resources.files("cbw_gyro") / "data" / "fig1c.cir"))


def fig1c_source() -> str:
    return fig1c_path().read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# Evaluation and compilation


def evaluate(expr: Expr, bindings: Mapping[str, float]) -> float:
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Sym):
        if expr.name == "pi":
            return math.pi
        try:
            return float(bindings[expr.name])
        except KeyError:
            raise CompileError(
                [Diagnostic("error", expr.line, expr.column, f"unbound symbol {expr.name!r}")]
            ) from None
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, bindings)
    left, right = evaluate(expr.left, bindings), evaluate(expr.right, bindings)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if right == 0.0:
        raise CompileError([Diagnostic("error", expr.line, expr.column, "division by zero")])
    return left / right


def _expr_symbols(expr: Expr | None, out: set):
    if isinstance(expr, Sym) and expr.name != "pi":
        out.add(expr.name)
    elif isinstance(expr, Neg):
        _expr_symbols(expr.operand, out)
    elif isinstance(expr, BinOp):
        _expr_symbols(expr.left, out)
        _expr_symbols(expr.right, out)


def _element_exprs(el: Element):
    if isinstance(el, BS):
        return [el.reflectance]
    if isinstance(el, Phase):
        return [el.angle]
    if isinstance(el, Mirror) and el.amplitude is not None:
        return [el.amplitude]
    return []


def free_symbols(ast: CircuitAst, chain: str) -> set:
    """Symbols that must be bound to compile `chain`."""
    out: set = set()

    def visit(index):
        for el in ast.chains[index].elements:
            if isinstance(el, ChainRef):
                visit(el.target)
            for e in _element_exprs(el):
                _expr_symbols(e, out)

    visit(ast.index_of(chain))
    return out


def _element_matrix(ast: CircuitAst, el: Element, bindings) -> np.ndarray:
    if isinstance(el, BS):
        value = evaluate(el.reflectance, bindings)
        try:
            return bs_matrix(value)
        except ValueError as exc:
            raise CompileError([Diagnostic("error", el.line, el.column, str(exc))]) from None
    if isinstance(el, Phase):
        return phase_matrix(el.arm, evaluate(el.angle, bindings))
    if isinstance(el, Mirror):
        amp = 1.0 if el.amplitude is None else evaluate(el.amplitude, bindings)
        return amp * np.eye(2, dtype=complex)
    return _chain_matrix(ast, el.target, bindings)


def _chain_matrix(ast: CircuitAst, index: int, bindings) -> np.ndarray:
    total = np.eye(2, dtype=complex)
    for el in ast.chains[index].elements:
        total = _element_matrix(ast, el, bindings) @ total
    return total


def compile_chain(
    ast: CircuitAst, chain: str, bindings: Mapping[str, float] | None = None
) -> np.ndarray:
    """Transfer matrix of `chain` with symbols substituted from `bindings`."""
    bindings = dict(bindings or {})
    try:
        index = ast.index_of(chain)
    except KeyError:
        raise CompileError([Diagnostic("error", 0, 0, f"no chain named {chain!r}")]) from None
    missing = sorted(free_symbols(ast, chain) - bindings.keys())
    if missing:
        raise CompileError(
            [Diagnostic("error", 0, 0, "unbound symbol(s): " + ", ".join(missing))]
        )
    return _chain_matrix(ast, index, bindings)


# ---------------------------------------------------------------------------
# Static checks


def _constant(expr: Expr):
    try:
        return evaluate(expr, {})
    except CompileError:
        return None


def check(ast: CircuitAst, entry: str | None = None) -> list:
    """Warnings for suspicious but parseable netlists.

    Reports beam-splitter reflectances outside [0, 1], mirrors with
    amplitude gain, chains not reachable from `entry` (default: the last
    chain defined) and redefined names.
    """
    warnings = []
    seen = {}
    for k, ch in enumerate(ast.chains):
        if ch.name in seen:
            first = ast.chains[seen[ch.name]]
            warnings.append(Diagnostic(
                "warning", ch.line, ch.column,
                f"chain {ch.name!r} shadows the definition on line {first.line}",
            ))
        seen[ch.name] = k
        for el in ch.elements:
            if isinstance(el, BS):
                value = _constant(el.reflectance)
                if value is not None and not 0.0 <= value <= 1.0:
                    warnings.append(Diagnostic(
                        "warning", el.line, el.column,
                        f"beam splitter reflectance {value:g} out of range [0, 1]",
                    ))
            elif isinstance(el, Mirror) and el.amplitude is not None:
                value = _constant(el.amplitude)
                if value is not None and abs(value) > 1.0:
                    warnings.append(Diagnostic(
                        "warning", el.line, el.column,
                        f"mirror amplitude {value:g} exceeds 1 (gain)",
                    ))

    if ast.chains:
        root = len(ast.chains) - 1 if entry is None else ast.index_of(entry)
        reachable, stack = set(), [root]
        while stack:
            k = stack.pop()
            if k in reachable:
                continue
            reachable.add(k)
            stack.extend(el.target for el in ast.chains[k].elements if isinstance(el, ChainRef))
        for k, ch in enumerate(ast.chains):
            if k not in reachable:
                warnings.append(Diagnostic(
                    "warning", ch.line, ch.column,
                    f"chain {ch.name!r} is not reachable from {ast.chains[root].name!r}",
                ))
    return sorted(warnings, key=lambda d: (d.line, d.column))


# ---------------------------------------------------------------------------
# Pretty printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _format_expr(expr: Expr, parent: int = 0, right_side: bool = False) -> str:
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Sym):
        return expr.name
    if isinstance(expr, Neg):
        return "-" + _format_expr(expr.operand, 3)
    prec = _PREC[expr.op]
    text = f"{_format_expr(expr.left, prec)} {expr.op} {_format_expr(expr.right, prec, True)}"
    if prec < parent or (right_side and prec == parent):
        return f"({text})"
    return text


def _format_element(el: Element) -> str:
    if isinstance(el, BS):
        return f"bs({_format_expr(el.reflectance)})"
    if isinstance(el, Phase):
        return f"phase {el.arm} ({_format_expr(el.angle)})"
    if isinstance(el, Mirror):
        return "mirror" if el.amplitude is None else f"mirror({_format_expr(el.amplitude)})"
    return el.name


def pretty_print(ast: CircuitAst) -> str:
    lines = [
        f"chain {ch.name} : " + " -> ".join(_format_element(el) for el in ch.elements)
        for ch in ast.chains
    ]
    return "\n".join(lines) + "\n"
