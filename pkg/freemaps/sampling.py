"""
Seeded random instances for the property suites: domain members, polynomial
maps and block witnesses. Every generator takes a ``numpy.random.Generator``
(PCG64 via ``default_rng``) so a seed reproduces the whole sample set.
"""
import logging
from typing import List, Optional

import numpy as np

from .calculus import BlockWitness
from .domains import NCDomain, boundary_scale
from .expr.nodes import Const, FreeExpr, FreeMapHandle, Var
from .expr.parser import make_prod, make_sum
from .linalg import MatrixTuple, random_matrix

logger = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_member(
    dom: NCDomain,
    rng: np.random.Generator,
    n: int,
    spread: float = 0.95,
    radius: float = 1.0,
) -> MatrixTuple:
    """A random member of ``dom`` at size n.

    A random direction is scaled to u * r*, where r* is the boundary crossing
    along it and u is uniform in (0, spread). Directions without a crossing
    are scaled by u * radius.
    """
    direction = MatrixTuple.random(rng, dom.arity, n)
    u = rng.uniform(0.0, spread)
    r_star: Optional[float] = boundary_scale(dom, direction, tolerance=1e-6)
    return direction.scaled(u * (r_star if r_star is not None else radius))


def random_members(
    dom: NCDomain, rng: np.random.Generator, count: int, max_size: int = 4
) -> List[MatrixTuple]:
    return [
        random_member(dom, rng, int(rng.integers(1, max_size + 1)))
        for _ in range(count)
    ]


def random_coefficient(rng: np.random.Generator, scale: float = 0.5) -> complex:
    re, im = rng.normal(0.0, scale, size=2)
    return complex(round(float(re), 6), round(float(im), 6))


def random_polynomial(
    rng: np.random.Generator,
    g: int,
    degree: int = 3,
    terms: int = 4,
    constant: bool = False,
) -> FreeExpr:
    """A random non-commutative polynomial in x1..xg of the given degree.

    The first term is linear so that the derivative at 0 is generic.
    """
    pieces: List[FreeExpr] = []
    if constant:
        pieces.append(Const(random_coefficient(rng)))
    for k in range(terms):
        length = 1 if k == 0 else int(rng.integers(1, degree + 1))
        word = [Var(int(rng.integers(1, g + 1))) for _ in range(length)]
        pieces.append(make_prod([Const(random_coefficient(rng))] + word))
    return make_sum(pieces)


def random_polynomial_map(
    rng: np.random.Generator,
    g: int,
    co_arity: Optional[int] = None,
    degree: int = 3,
    terms: int = 4,
) -> FreeMapHandle:
    """A random polynomial map fixing the origin."""
    h = co_arity or g
    return FreeMapHandle(
        g, tuple(random_polynomial(rng, g, degree, terms) for _ in range(h))
    )


def random_self_map(rng: np.random.Generator, g: int, degree: int = 3) -> FreeMapHandle:
    """A polynomial self-map fixing 0 with a random invertible linear part."""
    linear = random_matrix(rng, g) + 2 * np.eye(g)
    components = []
    for i in range(g):
        pieces: List[FreeExpr] = [
            make_prod([Const(complex(linear[i, j])), Var(j + 1)]) for j in range(g)
        ]
        length = int(rng.integers(2, degree + 1))
        word = [Var(int(rng.integers(1, g + 1))) for _ in range(length)]
        pieces.append(make_prod([Const(random_coefficient(rng))] + word))
        components.append(make_sum(pieces))
    return FreeMapHandle(g, tuple(components))


def random_witness(
    rng: np.random.Generator, g: int, n: int, m: int, scale: float = 1.0
) -> BlockWitness:
    """X, Y and Gamma with operator norm ``scale``."""
    gamma = random_matrix(rng, n, m)
    gamma = scale * gamma / np.linalg.norm(gamma, ord=2)
    return BlockWitness(
        MatrixTuple.random(rng, g, n, scale),
        MatrixTuple.random(rng, g, m, scale),
        gamma,
        complex(rng.uniform(0.1, 1.0)),
    )


def random_invertible(
    rng: np.random.Generator, n: int, strength: float = 0.3
) -> np.ndarray:
    """S = I + strength * R/||R||, whose condition number is at most (1+s)/(1-s)."""
    r = random_matrix(rng, n)
    return np.eye(n, dtype=np.complex128) + strength * r / np.linalg.norm(r, ord=2)
