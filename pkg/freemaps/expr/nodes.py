"""
AST nodes for free (non-commutative) expressions.

Every node is an immutable dataclass with three operations: ``evaluate`` on a
:class:`~freemaps.linalg.MatrixTuple`, ``render`` back to grammar text and
``substitute`` of variables by other expressions. Scalars act as multiples of
the identity.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Set, Tuple

import numpy as np

from ..exceptions import ArityError, EvaluationError, SingularMatrixError
from ..linalg import ComplexMatrix, MatrixTuple, adjoint, identity, inverse


def format_scalar(value: complex) -> str:
    """Render a scalar so that parsing the text gives back the same float bits."""
    value = complex(value)
    if value.imag == 0.0:
        text = repr(value.real)
        return text if value.real >= 0 else f"({text})"
    return f"({value.real!r}{'+' if value.imag >= 0 else '-'}{abs(value.imag)!r}*i)"


class FreeExpr:
    """Base class of all expression nodes."""

    def evaluate(self, x: MatrixTuple) -> ComplexMatrix:
        raise NotImplementedError("Subclasses must implement evaluate")

    def render(self) -> str:
        raise NotImplementedError("Subclasses must implement render")

    def substitute(self, mapping: Dict[int, "FreeExpr"]) -> "FreeExpr":
        raise NotImplementedError("Subclasses must implement substitute")

    def children(self) -> Tuple["FreeExpr", ...]:
        return ()

    def variables(self) -> Set[int]:
        found: Set[int] = set()
        for child in self.children():
            found |= child.variables()
        return found

    def has_adjoint(self) -> bool:
        return any(child.has_adjoint() for child in self.children())

    def has_inverse(self) -> bool:
        return any(child.has_inverse() for child in self.children())

    def is_constant(self) -> bool:
        return not self.variables()

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class Const(FreeExpr):
    value: complex

    def evaluate(self, x: MatrixTuple) -> ComplexMatrix:
        return complex(self.value) * identity(x.size)

    def render(self) -> str:
        return format_scalar(self.value)

    def substitute(self, mapping: Dict[int, FreeExpr]) -> FreeExpr:
        return self


@dataclass(frozen=True)
class Var(FreeExpr):
    index: int

    def evaluate(self, x: MatrixTuple) -> ComplexMatrix:
        return x[self.index - 1]

    def render(self) -> str:
        return f"x{self.index}"

    def substitute(self, mapping: Dict[int, FreeExpr]) -> FreeExpr:
        return mapping.get(self.index, self)

    def variables(self) -> Set[int]:
        return {self.index}


@dataclass(frozen=True)
class AdjVar(FreeExpr):
    index: int

    def evaluate(self, x: MatrixTuple) -> ComplexMatrix:
        return adjoint(x[self.index - 1])

    def render(self) -> str:
        return f"x{self.index}'"

    def substitute(self, mapping: Dict[int, FreeExpr]) -> FreeExpr:
        if self.index in mapping:
            raise EvaluationError(
                "Cannot substitute into an adjoint variable", node=self
            )
        return self

    def variables(self) -> Set[int]:
        return {self.index}

    def has_adjoint(self) -> bool:
        return True


def _wrap(expr: FreeExpr) -> str:
    text = expr.render()
    if isinstance(expr, (Sum, Scale)):
        return f"({text})"
    return text


@dataclass(frozen=True)
class Sum(FreeExpr):
    terms: Tuple[FreeExpr, ...]

    def evaluate(self, x: MatrixTuple) -> ComplexMatrix:
        total = self.terms[0].evaluate(x)
        for term in self.terms[1:]:
            total = total + term.evaluate(x)
        return total

    def render(self) -> str:
        parts = []
        for position, term in enumerate(self.terms):
            negated = isinstance(term, Scale) and term.coeff == -1
            body = _wrap(term.expr) if negated else term.render()
            if position == 0:
                parts.append(f"-{body}" if negated else body)
            else:
                parts.append(f" - {body}" if negated else f" + {body}")
        return "".join(parts)

    def substitute(self, mapping: Dict[int, FreeExpr]) -> FreeExpr:
        return Sum(tuple(t.substitute(mapping) for t in self.terms))

    def children(self) -> Tuple[FreeExpr, ...]:
        return self.terms


@dataclass(frozen=True)
class Prod(FreeExpr):
    factors: Tuple[FreeExpr, ...]

    def evaluate(self, x: MatrixTuple) -> ComplexMatrix:
        result = self.factors[0].evaluate(x)
        for factor in self.factors[1:]:
            result = result @ factor.evaluate(x)
        return result

    def render(self) -> str:
        return "*".join(_wrap(f) for f in self.factors)

    def substitute(self, mapping: Dict[int, FreeExpr]) -> FreeExpr:
        return Prod(tuple(f.substitute(mapping) for f in self.factors))

    def children(self) -> Tuple[FreeExpr, ...]:
        return self.factors


@dataclass(frozen=True)
class Scale(FreeExpr):
    coeff: complex
    expr: FreeExpr

    def evaluate(self, x: MatrixTuple) -> ComplexMatrix:
        return complex(self.coeff) * self.expr.evaluate(x)

    def render(self) -> str:
        if self.coeff == -1:
            return f"-{_wrap(self.expr)}"
        return f"{format_scalar(self.coeff)}*{_wrap(self.expr)}"

    def substitute(self, mapping: Dict[int, FreeExpr]) -> FreeExpr:
        return Scale(self.coeff, self.expr.substitute(mapping))

    def children(self) -> Tuple[FreeExpr, ...]:
        return (self.expr,)


@dataclass(frozen=True)
class Inv(FreeExpr):
    expr: FreeExpr

    def evaluate(self, x: MatrixTuple) -> ComplexMatrix:
        inner = self.expr.evaluate(x)
        try:
            return inverse(inner)
        except SingularMatrixError as e:
            raise EvaluationError(
                f"singular at this point: {self.render()}", node=self
            ) from e

    def render(self) -> str:
        return f"inv({self.expr.render()})"

    def substitute(self, mapping: Dict[int, FreeExpr]) -> FreeExpr:
        return Inv(self.expr.substitute(mapping))

    def children(self) -> Tuple[FreeExpr, ...]:
        return (self.expr,)

    def has_inverse(self) -> bool:
        return True


DEFAULT_SERIES_ORDER = 8


@dataclass(frozen=True)
class Series(FreeExpr):
    """Truncated univariate power series sum_k c_k * arg^k."""

    coeffs: Tuple[complex, ...]
    arg: FreeExpr

    def evaluate(self, x: MatrixTuple) -> ComplexMatrix:
        a = self.arg.evaluate(x)
        result = np.zeros_like(a)
        for c in reversed(self.coeffs):
            result = result @ a + complex(c) * identity(x.size)
        return result

    def render(self) -> str:
        coeffs = ", ".join(format_scalar(c) for c in self.coeffs)
        return f"series({self.arg.render()}; {coeffs})"

    def substitute(self, mapping: Dict[int, FreeExpr]) -> FreeExpr:
        return Series(self.coeffs, self.arg.substitute(mapping))

    def children(self) -> Tuple[FreeExpr, ...]:
        return (self.arg,)


def check_arity(expr: FreeExpr, arity: int) -> None:
    for index in expr.variables():
        if not 1 <= index <= arity:
            raise ArityError(f"Variable x{index} out of range for arity {arity}")


def evaluate(
    expr: FreeExpr, x: MatrixTuple, arity: Optional[int] = None
) -> ComplexMatrix:
    """Evaluate ``expr`` at the tuple ``x``.

    Raises:
        ArityError: If the expression uses a variable the tuple does not have,
            or ``arity`` is given and differs from the tuple length
        EvaluationError: If an ``inv`` node is singular at ``x``
    """
    if arity is not None and arity != x.arity:
        raise ArityError(f"Expected a {arity}-tuple, got a {x.arity}-tuple")
    check_arity(expr, x.arity)
    return expr.evaluate(x)


@dataclass(frozen=True)
class FreeMapHandle:
    """A free map f: M(C)^g -> M(C)^h given by h component expressions."""

    arity: int
    components: Tuple[FreeExpr, ...]

    def __post_init__(self):
        if not self.components:
            raise ArityError("A free map needs at least one component")
        for component in self.components:
            check_arity(component, self.arity)

    @classmethod
    def from_strings(cls, sources: Sequence[str], arity: int) -> "FreeMapHandle":
        from .parser import parse

        return cls(arity, tuple(parse(src, arity) for src in sources))

    @classmethod
    def identity(cls, g: int) -> "FreeMapHandle":
        return cls(g, tuple(Var(j) for j in range(1, g + 1)))

    @property
    def co_arity(self) -> int:
        return len(self.components)

    def __call__(self, x: MatrixTuple) -> MatrixTuple:
        return evaluate_map(self, x)

    def compose(self, inner: "FreeMapHandle") -> "FreeMapHandle":
        """The map x -> self(inner(x)); self must be adjoint-free."""
        if inner.co_arity != self.arity:
            raise ArityError(
                f"Cannot compose: inner co-arity {inner.co_arity} != arity {self.arity}"
            )
        mapping = {j + 1: c for j, c in enumerate(inner.components)}
        return FreeMapHandle(
            inner.arity, tuple(c.substitute(mapping) for c in self.components)
        )

    def has_adjoint(self) -> bool:
        return any(c.has_adjoint() for c in self.components)

    def render(self) -> Tuple[str, ...]:
        return tuple(c.render() for c in self.components)


def evaluate_map(f: FreeMapHandle, x: MatrixTuple) -> MatrixTuple:
    """Componentwise evaluation, returning the co-arity tuple f(x)."""
    if x.arity != f.arity:
        raise ArityError(f"Map expects a {f.arity}-tuple, got a {x.arity}-tuple")
    return MatrixTuple(tuple(c.evaluate(x) for c in f.components))


def scalar_function(expr: FreeExpr) -> Callable[[complex], complex]:
    """View a univariate expression as a scalar function on 1x1 matrices."""

    def fn(z: complex) -> complex:
        return complex(expr.evaluate(MatrixTuple.scalars(z))[0, 0])

    return fn
