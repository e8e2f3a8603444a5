"""
Recursive-descent parser for free expressions.

Grammar::

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' uint)?
    atom   := number | 'i' | 'x' uint | 'x' uint "'" | '(' expr ')'
            | 'inv(' expr ')' | 'exp(' expr ')'
            | 'series(' expr ';' expr (',' expr)* ')'

``exp`` and the ``series`` coefficients must be constant. The parser
normalizes while it builds, so ``parse(e.render()) == e`` for every parsed
expression ``e``.
"""
import logging
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from ..exceptions import ArityError, ExpressionSyntaxError
from .nodes import AdjVar, Const, FreeExpr, Inv, Prod, Scale, Series, Sum, Var

logger = logging.getLogger(__name__)

TOKEN_PATTERN = re.compile(
    r"(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<var>x\d+)"
    r"|(?P<name>[A-Za-z_]+)"
    r"|(?P<symbol>[-+*^()';,])"
    r")"
)

FUNCTIONS = ("inv", "exp", "series")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(source: str) -> List[Token]:
    """Split ``source`` into tokens, each tagged with its start position."""
    tokens: List[Token] = []
    pos = 0
    while pos < len(source):
        if source[pos].isspace():
            pos += 1
            continue
        match = TOKEN_PATTERN.match(source, pos)
        if match is None:
            raise ExpressionSyntaxError(
                f"Unexpected character {source[pos]!r}", pos, source
            )
        kind = match.lastgroup or ""
        text = match.group(kind)
        tokens.append(Token(kind, text, match.start(kind)))
        pos = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


def make_sum(terms: Iterable[FreeExpr]) -> FreeExpr:
    """Flatten nested sums and fold the constant terms into one."""
    flat: List[FreeExpr] = []
    constant: Optional[complex] = None
    constant_at = 0
    for term in terms:
        parts = term.terms if isinstance(term, Sum) else (term,)
        for part in parts:
            if isinstance(part, Const):
                if constant is None:
                    constant, constant_at = complex(part.value), len(flat)
                else:
                    constant += complex(part.value)
            else:
                flat.append(part)
    if not flat:
        return Const(constant if constant is not None else 0j)
    if constant is not None and constant != 0:
        flat.insert(constant_at, Const(constant))
    return flat[0] if len(flat) == 1 else Sum(tuple(flat))


def make_prod(factors: Iterable[FreeExpr]) -> FreeExpr:
    """Flatten nested products and pull scalar coefficients to the front."""
    coeff = 1 + 0j
    flat: List[FreeExpr] = []
    for factor in factors:
        if isinstance(factor, Const):
            coeff *= complex(factor.value)
        elif isinstance(factor, Scale):
            coeff *= complex(factor.coeff)
            inner = factor.expr
            flat.extend(inner.factors if isinstance(inner, Prod) else (inner,))
        elif isinstance(factor, Prod):
            flat.extend(factor.factors)
        else:
            flat.append(factor)
    if not flat:
        return Const(coeff)
    core = flat[0] if len(flat) == 1 else Prod(tuple(flat))
    return core if coeff == 1 else Scale(coeff, core)


def negate(expr: FreeExpr) -> FreeExpr:
    return make_prod((Const(-1 + 0j), expr))


def make_inv(expr: FreeExpr) -> FreeExpr:
    if isinstance(expr, Const) and expr.value != 0:
        return Const(1 / complex(expr.value))
    return Inv(expr)


class Parser:
    """Parses one expression string for a declared arity."""

    def __init__(self, source: str, arity: int):
        if arity < 1:
            raise ArityError(f"Arity must be positive, got {arity}")
        self.source = source
        self.arity = arity
        self.tokens = tokenize(source)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        if token.kind != "end":
            self.index += 1
        return token

    def error(
        self, message: str, token: Optional[Token] = None
    ) -> ExpressionSyntaxError:
        token = token or self.current
        return ExpressionSyntaxError(message, token.position, self.source)

    def expect(self, text: str) -> Token:
        token = self.current
        if token.text != text or token.kind not in ("symbol",):
            found = token.text or "end of input"
            raise self.error(f"Expected {text!r}, found {found!r}")
        return self.advance()

    def parse(self) -> FreeExpr:
        expr = self.parse_expr()
        if self.current.kind != "end":
            raise self.error(f"Unexpected {self.current.text!r}")
        return expr

    def parse_expr(self) -> FreeExpr:
        terms: List[FreeExpr] = []
        if self.current.text == "-":
            self.advance()
            terms.append(negate(self.parse_term()))
        else:
            terms.append(self.parse_term())
        while self.current.text in ("+", "-") and self.current.kind == "symbol":
            op = self.advance().text
            term = self.parse_term()
            terms.append(term if op == "+" else negate(term))
        return make_sum(terms)

    def parse_term(self) -> FreeExpr:
        factors = [self.parse_factor()]
        while self.current.text == "*":
            self.advance()
            factors.append(self.parse_factor())
        return make_prod(factors)

    def parse_factor(self) -> FreeExpr:
        atom = self.parse_atom()
        if self.current.text != "^":
            return atom
        self.advance()
        token = self.current
        if token.kind != "number" or not token.text.isdigit():
            raise self.error("Exponent must be a non-negative integer")
        self.advance()
        return make_prod([atom] * int(token.text))

    def parse_atom(self) -> FreeExpr:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Const(complex(float(token.text)))
        if token.kind == "var":
            self.advance()
            index = int(token.text[1:])
            if not 1 <= index <= self.arity:
                raise ArityError(
                    f"Variable {token.text} out of range for arity {self.arity} "
                    f"at position {token.position}"
                )
            if self.current.text == "'":
                self.advance()
                return AdjVar(index)
            return Var(index)
        if token.kind == "name":
            return self.parse_name(token)
        if token.text == "(":
            self.advance()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        found = token.text or "end of input"
        raise self.error(f"Unexpected {found!r}")

    def parse_name(self, token: Token) -> FreeExpr:
        self.advance()
        if token.text == "i":
            return Const(1j)
        if token.text not in FUNCTIONS:
            raise self.error(f"Unknown name {token.text!r}", token)
        self.expect("(")
        argument = self.parse_expr()
        if token.text == "inv":
            self.expect(")")
            return make_inv(argument)
        if token.text == "exp":
            self.expect(")")
            if not isinstance(argument, Const):
                raise self.error("exp() is only allowed on constants", token)
            return Const(complex(np.exp(complex(argument.value))))
        self.expect(";")
        coeffs = [self.parse_constant()]
        while self.current.text == ",":
            self.advance()
            coeffs.append(self.parse_constant())
        self.expect(")")
        return Series(tuple(coeffs), argument)

    def parse_constant(self) -> complex:
        token = self.current
        expr = self.parse_expr()
        if not isinstance(expr, Const):
            raise self.error("Series coefficients must be constants", token)
        return complex(expr.value)


def parse(source: str, arity: int) -> FreeExpr:
    """Parse ``source`` into a normalized expression over ``x1..x{arity}``.

    Raises:
        ExpressionSyntaxError: If ``source`` does not match the grammar
        ArityError: If a variable index is outside ``1..arity``
    """
    expr = Parser(source, arity).parse()
    logger.debug("Parsed %r as %s", source, expr.render())
    return expr


def parse_many(sources: Iterable[str], arity: int) -> Tuple[FreeExpr, ...]:
    return tuple(parse(src, arity) for src in sources)
