"""
Non-commutative domains: epsilon-neighborhoods of 0, LMI domains of truly
linear pencils and domains cut out by I + q(X) + q(X)* > 0.

All domains answer the same queries at every matrix size n: the defining
matrix at a tuple, membership, the spectral gap used as boundary distance
and a three-valued classification.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import ArityError, DimensionError, EvaluationError
from .expr.nodes import FreeExpr, check_arity
from .expr.parser import parse
from .linalg import (
    ComplexMatrix,
    MatrixTuple,
    adjoint,
    as_matrix,
    cholesky_pd,
    identity,
    kron,
    min_eigenvalue,
    operator_norm,
)
from .models import (
    BoundednessReport,
    CircularityReport,
    Membership,
    MembershipReport,
    Verdict,
)

logger = logging.getLogger(__name__)

HOMOTOPY_STEPS = 64


@dataclass(frozen=True, eq=False)
class TrulyLinearPencil:
    """L(x) = sum A_j x_j with d x d coefficients; its LMI is I + L + L* > 0."""

    coefficients: Tuple[ComplexMatrix, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise DimensionError("A pencil needs at least one coefficient")
        mats = tuple(as_matrix(a) for a in self.coefficients)
        d = mats[0].shape[0]
        for a in mats:
            if a.shape != (d, d):
                raise DimensionError(
                    f"Pencil coefficients must be {d}x{d}, got {a.shape}"
                )
        object.__setattr__(self, "coefficients", mats)

    @property
    def d(self) -> int:
        return self.coefficients[0].shape[0]

    @property
    def g(self) -> int:
        return len(self.coefficients)

    def linear_part(self, x: MatrixTuple) -> ComplexMatrix:
        if x.arity != self.g:
            raise ArityError(f"Pencil has {self.g} variables, got a {x.arity}-tuple")
        return sum(kron(a, xj) for a, xj in zip(self.coefficients, x))

    def evaluate(self, x: MatrixTuple) -> ComplexMatrix:
        """I_d (x) I_n + sum A_j (x) X_j + sum A_j* (x) X_j*."""
        lin = self.linear_part(x)
        return identity(self.d * x.size) + lin + adjoint(lin)


class NCDomain:
    """Base class of non-commutative domains."""

    kind: str = ""
    # Star-shaped about 0: the segment homotopy cannot change the answer.
    star_shaped: bool = True

    @property
    def arity(self) -> int:
        raise NotImplementedError

    def _defining_matrix(self, x: MatrixTuple) -> ComplexMatrix:
        raise NotImplementedError

    def defining_matrix(self, x: MatrixTuple) -> ComplexMatrix:
        """The Hermitian matrix whose positivity defines the domain at ``x``.

        Raises:
            ArityError: If ``x`` does not have the domain's arity
            EvaluationError: If a polynomial domain's q is singular at ``x``
        """
        if x.arity != self.arity:
            raise ArityError(
                f"Domain has {self.arity} variables, got a {x.arity}-tuple"
            )
        return self._defining_matrix(x)

    def is_member(
        self, x: MatrixTuple, tolerances: Tolerances = DEFAULT_TOLERANCES
    ) -> bool:
        """Strict positivity of the defining matrix, plus the segment test.

        For domains that are not star-shaped, t*x must also satisfy the
        inequality on a uniform grid of HOMOTOPY_STEPS steps in (0, 1); this
        approximates the component of the origin.
        """
        if not cholesky_pd(self.defining_matrix(x), tolerances):
            return False
        if self.star_shaped:
            return True
        for k in range(1, HOMOTOPY_STEPS):
            t = k / HOMOTOPY_STEPS
            try:
                inside = cholesky_pd(self.defining_matrix(x.scaled(t)), tolerances)
            except EvaluationError:
                inside = False
            if not inside:
                logger.debug("Segment to origin leaves the domain at t=%g", t)
                return False
        return True

    def boundary_distance(self, x: MatrixTuple) -> float:
        """Smallest eigenvalue of the defining matrix (a spectral gap, not a metric)."""
        return min_eigenvalue(self.defining_matrix(x))

    def classify(
        self, x: MatrixTuple, tolerances: Tolerances = DEFAULT_TOLERANCES
    ) -> Membership:
        m = self.defining_matrix(x)
        gap = min_eigenvalue(m, tolerances)
        floor = tolerances.relative(tolerances.pivot_floor, operator_norm(m))
        if abs(gap) <= floor:
            return Membership.BOUNDARY
        if gap > 0 and self.is_member(x, tolerances):
            return Membership.INSIDE
        return Membership.OUTSIDE

    def membership_report(
        self, x: MatrixTuple, tolerances: Tolerances = DEFAULT_TOLERANCES
    ) -> MembershipReport:
        membership = self.classify(x, tolerances)
        verdict = Verdict.PASS if membership == Membership.INSIDE else Verdict.FAIL
        return MembershipReport(
            op="member",
            verdict=verdict,
            membership=membership,
            gap=self.boundary_distance(x),
        )


@dataclass(frozen=True)
class EpsNeighborhood(NCDomain):
    """N_eps: tuples with sum X_j X_j* < eps^2 I."""

    eps: float
    g: int = 1
    kind = "eps"

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.g < 1:
            raise ArityError(f"Arity must be positive, got {self.g}")

    @property
    def arity(self) -> int:
        return self.g

    def _defining_matrix(self, x: MatrixTuple) -> ComplexMatrix:
        gram = sum(xj @ adjoint(xj) for xj in x)
        return self.eps**2 * identity(x.size) - gram


@dataclass(frozen=True)
class PencilDomain(NCDomain):
    """The LMI domain {X : I + L(X) + L(X)* > 0} of a truly linear pencil."""

    pencil: TrulyLinearPencil
    kind = "pencil"

    @property
    def arity(self) -> int:
        return self.pencil.g

    def _defining_matrix(self, x: MatrixTuple) -> ComplexMatrix:
        return self.pencil.evaluate(x)


@dataclass(frozen=True)
class PolynomialDomain(NCDomain):
    """Component of 0 in {X : I + q(X) + q(X)* > 0}, q an r x r matrix with q(0) = 0."""

    entries: Tuple[Tuple[FreeExpr, ...], ...]
    g: int
    kind = "poly"
    star_shaped = False

    def __post_init__(self):
        rows = len(self.entries)
        if rows == 0 or any(len(row) != rows for row in self.entries):
            raise DimensionError(
                "Polynomial domain needs a square matrix of expressions"
            )
        for row in self.entries:
            for entry in row:
                check_arity(entry, self.g)
        at_zero = self._q(MatrixTuple.zeros(self.g, 1))
        if operator_norm(at_zero) > DEFAULT_TOLERANCES.absolute_floor:
            raise ValueError("Polynomial domain requires q(0) = 0")

    @classmethod
    def from_strings(cls, rows: Sequence[Sequence[str]], g: int) -> "PolynomialDomain":
        return cls(tuple(tuple(parse(src, g) for src in row) for row in rows), g)

    @classmethod
    def scalar(cls, source: str, g: int) -> "PolynomialDomain":
        return cls.from_strings([[source]], g)

    @property
    def arity(self) -> int:
        return self.g

    @property
    def r(self) -> int:
        return len(self.entries)

    def _q(self, x: MatrixTuple) -> ComplexMatrix:
        return np.block([[entry.evaluate(x) for entry in row] for row in self.entries])

    def _defining_matrix(self, x: MatrixTuple) -> ComplexMatrix:
        q = self._q(x)
        return identity(self.r * x.size) + q + adjoint(q)


def eps_neighborhood_pencil(g: int, eps: float) -> TrulyLinearPencil:
    """The (g+1) x (g+1) pencil whose LMI domain is N_eps.

    A_j = E_{g+1, j} / eps, so that the Schur complement of the LMI is
    I - sum X_j X_j* / eps^2.
    """
    if g < 1:
        raise ArityError(f"Arity must be positive, got {g}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    coeffs = []
    for j in range(g):
        a = np.zeros((g + 1, g + 1), dtype=np.complex128)
        a[g, j] = 1 / eps
        coeffs.append(a)
    return TrulyLinearPencil(tuple(coeffs))


def disk_pencil() -> TrulyLinearPencil:
    """The 2x2 pencil A = [[1, 1], [0, 0]] whose domain is ||X - 1|| < sqrt(2)."""
    return TrulyLinearPencil((np.array([[1, 1], [0, 0]], dtype=np.complex128),))


def disk_domain() -> PencilDomain:
    return PencilDomain(disk_pencil())


def disk_characterizations(x: MatrixTuple) -> Tuple[float, float, float]:
    """Spectral gaps of three equivalent descriptions of the disk domain.

    Returns the smallest eigenvalues of the pencil LMI, of 1 + X + X* - XX*
    and of 2 - (1 - X)(1 - X)*; their signs agree.
    """
    if x.arity != 1:
        raise ArityError(f"The disk domain has one variable, got a {x.arity}-tuple")
    xm = x[0]
    one = identity(x.size)
    pencil_gap = min_eigenvalue(disk_pencil().evaluate(x))
    quadratic_gap = min_eigenvalue(one + xm + adjoint(xm) - xm @ adjoint(xm))
    shifted = one - xm
    norm_gap = min_eigenvalue(2 * one - shifted @ adjoint(shifted))
    return pencil_gap, quadratic_gap, norm_gap


def boundedness_certificate(
    dom: NCDomain,
    bound: float,
    samples: Iterable[MatrixTuple],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> BoundednessReport:
    """Check C^2 I - sum X_j X_j* > 0 on the sampled members of ``dom``.

    Sampling evidence only; non-members are skipped.
    """
    if not bound > 0:
        raise ValueError(f"Bound must be positive, got {bound}")
    ball = EpsNeighborhood(bound, dom.arity)
    checked, skipped = 0, 0
    failures: List[int] = []
    details = []
    for index, x in enumerate(samples):
        if not dom.is_member(x, tolerances):
            skipped += 1
            continue
        checked += 1
        gap = ball.boundary_distance(x)
        if not cholesky_pd(ball.defining_matrix(x), tolerances):
            failures.append(index)
        details.append({"index": index, "gap": gap})
    if skipped:
        logger.warning("Skipped %d samples outside the domain", skipped)
    return BoundednessReport(
        op="boundedness_certificate",
        verdict=Verdict.FAIL if failures else Verdict.PASS,
        bound=bound,
        checked=checked,
        skipped=skipped,
        failures=failures,
        samples=details,
        notes=[f"{skipped} samples outside the domain skipped"] if skipped else [],
    )


def circularity_probe(
    dom: NCDomain,
    thetas: Sequence[float],
    samples: Iterable[MatrixTuple],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> CircularityReport:
    """Whether e^{i theta} X stays in ``dom`` for each sampled member X."""
    violations = 0
    details = []
    for index, x in enumerate(samples):
        if not dom.is_member(x, tolerances):
            continue
        for theta in thetas:
            if not dom.is_member(x.scaled(np.exp(1j * theta)), tolerances):
                violations += 1
                details.append({"index": index, "theta": float(theta)})
    return CircularityReport(
        op="circularity_probe",
        verdict=Verdict.FAIL if violations else Verdict.PASS,
        thetas=[float(t) for t in thetas],
        violations=violations,
        samples=details,
    )


def boundary_scale(
    dom: NCDomain,
    ray: MatrixTuple,
    tolerance: float = 1e-12,
    max_doublings: int = 60,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Optional[float]:
    """Largest r with r*ray in ``dom``, to relative ``tolerance``.

    The bracket is doubled until it leaves the domain and then bisected; the
    returned value is the inner endpoint. Returns None when no crossing is
    found within ``max_doublings`` doublings.
    """
    if ray.norm() == 0:
        raise ValueError("Ray direction must be nonzero")
    lo, hi = 0.0, 1.0
    doublings = 0
    while dom.is_member(ray.scaled(hi), tolerances):
        lo, hi = hi, 2 * hi
        doublings += 1
        if doublings > max_doublings:
            logger.warning("No boundary crossing along ray up to r=%g", hi)
            return None
    while hi - lo > tolerance * hi:
        mid = (lo + hi) / 2
        if dom.is_member(ray.scaled(mid), tolerances):
            lo = mid
        else:
            hi = mid
    logger.debug("Boundary crossing bracketed in [%.15g, %.15g]", lo, hi)
    return lo
