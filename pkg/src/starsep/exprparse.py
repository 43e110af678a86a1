"""Tiny expression language for potentials and test functions.

Grammar:

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' uint)?
    atom   := rational | 'i' | 'z'uint | 'zbar'uint | '(' expr ')' | builtin

Rationals are written `p/q` or as plain integers; `i` is the imaginary
unit; variables are 1-based (`z1`, `zbar2`); builtin names (`flat`,
`fubini-study`, `hyperbolic`) may appear as atoms and expand to the
corresponding potential jet at evaluation time.  A leading '-' (at the
start of an expression or right after '(') is accepted as a convenience
on top of the grammar above.

Syntax errors carry a character position; index-range errors name the
offending variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .jets import BUILTIN_POTENTIALS, GaussRational, Jet, MultiIndex, builtin_potential


class ExpressionError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        suffix = f" (at position {position})" if position is not None else ""
        super().__init__(message + suffix)


# ------------------------------------------------------------------ AST nodes


@dataclass(frozen=True)
class Lit:
    value: Fraction


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Var:
    kind: str  # 'z' or 'zbar'
    index: int


@dataclass(frozen=True)
class Builtin:
    name: str


@dataclass(frozen=True)
class Sum:
    terms: tuple  # of (sign, node) with sign in {+1, -1}


@dataclass(frozen=True)
class Prod:
    factors: tuple


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


ExpressionAST = "Lit | Imag | Var | Builtin | Sum | Prod | Pow"


# ------------------------------------------------------------------ lexer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:/\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ExpressionError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
        if m.group("number"):
            raw = m.group("number")
            if "/" in raw:
                p, q = raw.split("/")
                if int(q) == 0:
                    raise ExpressionError("zero denominator", m.start("number"))
                value = Fraction(int(p), int(q))
            else:
                value = Fraction(int(raw))
            tokens.append(("number", value, m.start("number")))
        elif m.group("ident"):
            ident = m.group("ident")
            end = m.end("ident")
            # allow the hyphenated builtin name despite '-' being an operator
            if ident == "fubini" and text[end : end + 6] == "-study":
                tokens.append(("ident", "fubini-study", m.start("ident")))
                pos = end + 6
                continue
            tokens.append(("ident", ident, m.start("ident")))
        else:
            tokens.append((m.group("op"), None, m.start("op")))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


# ------------------------------------------------------------------ parser


class _Parser:
    def __init__(self, tokens, n: int | None):
        self.tokens = tokens
        self.i = 0
        self.n = n

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str):
        tok = self.advance()
        if tok[0] != kind:
            raise ExpressionError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        return tok

    def parse_expr(self):
        sign = 1
        if self.peek()[0] == "-":  # unary minus extension
            self.advance()
            sign = -1
        terms = [(sign, self.parse_term())]
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            terms.append((1 if op == "+" else -1, self.parse_term()))
        if len(terms) == 1 and terms[0][0] == 1:
            return terms[0][1]
        return Sum(tuple(terms))

    def parse_term(self):
        factors = [self.parse_factor()]
        while self.peek()[0] == "*":
            self.advance()
            factors.append(self.parse_factor())
        if len(factors) == 1:
            return factors[0]
        return Prod(tuple(factors))

    def parse_factor(self):
        atom = self.parse_atom()
        if self.peek()[0] == "^":
            self.advance()
            tok = self.advance()
            if tok[0] != "number" or tok[1].denominator != 1 or tok[1] < 0:
                raise ExpressionError("exponent must be a non-negative integer", tok[2])
            return Pow(atom, int(tok[1]))
        return atom

    def parse_atom(self):
        tok = self.advance()
        kind, value, pos = tok
        if kind == "number":
            return Lit(value)
        if kind == "(":
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if kind == "ident":
            if value == "i":
                return Imag()
            if value in BUILTIN_POTENTIALS or value == "fubini_study":
                return Builtin("fubini-study" if value == "fubini_study" else value)
            m = re.fullmatch(r"(zbar|z)(\d+)", value)
            if m:
                index = int(m.group(2))
                if index < 1:
                    raise ExpressionError(f"variable index must be >= 1: {value}", pos)
                if self.n is not None and index > self.n:
                    raise ExpressionError(
                        f"index {index} exceeds dimension {self.n}", pos
                    )
                return Var(m.group(1), index)
            raise ExpressionError(f"unknown identifier {value!r}", pos)
        raise ExpressionError(f"unexpected token {kind!r}", pos)


def parse_expression(text: str, n: int | None = None):
    """Parse an expression; validates variable indices when `n` is given."""
    parser = _Parser(_tokenize(text), n)
    ast = parser.parse_expr()
    parser.expect("end")
    return ast


# ------------------------------------------------------------------ evaluation


def ast_to_jet(ast, n: int, order: int) -> Jet:
    """Evaluate an expression AST into a jet of the given chart and order."""
    if isinstance(ast, Lit):
        return Jet.constant(n, order, ast.value)
    if isinstance(ast, Imag):
        return Jet.constant(n, order, GaussRational(0, 1))
    if isinstance(ast, Var):
        if ast.index > n:
            raise ExpressionError(f"index {ast.index} exceeds dimension {n}")
        idx = (
            MultiIndex.make([ast.index])
            if ast.kind == "z"
            else MultiIndex.make([], [ast.index])
        )
        return Jet.monomial(n, order, idx)
    if isinstance(ast, Builtin):
        return builtin_potential(ast.name, n, order)
    if isinstance(ast, Sum):
        total = Jet.zero(n, order)
        for sign, node in ast.terms:
            jet = ast_to_jet(node, n, order)
            total = total + (jet if sign > 0 else -jet)
        return total
    if isinstance(ast, Prod):
        total = Jet.constant(n, order, 1)
        for node in ast.factors:
            total = total * ast_to_jet(node, n, order)
        return total
    if isinstance(ast, Pow):
        return ast_to_jet(ast.base, n, order) ** ast.exponent
    raise TypeError(f"not an expression node: {ast!r}")


def expression_jet(text: str, n: int, order: int) -> Jet:
    return ast_to_jet(parse_expression(text, n), n, order)
