"""
Dense complex linear algebra kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` and are treated as
values: no function here mutates its arguments. Points of a non-commutative
set are :class:`MatrixTuple` instances, i.e. g-tuples of n x n matrices.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag

from .config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import DimensionError, NotHermitianError, SingularMatrixError

logger = logging.getLogger(__name__)

ComplexMatrix = np.ndarray


def as_matrix(data) -> ComplexMatrix:
    """Convert array-like data to a finite 2-D complex matrix.

    Raises:
        DimensionError: If the data is not two-dimensional, empty or not finite
    """
    m = np.array(data, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise DimensionError(f"Expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError("Matrix entries must be finite")
    return m


def _require_square(m: ComplexMatrix, what: str = "matrix") -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {m.shape}")


def identity(n: int) -> ComplexMatrix:
    return np.eye(n, dtype=np.complex128)


def adjoint(m: ComplexMatrix) -> ComplexMatrix:
    return np.conj(m).T


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product; block (i, j) of the result equals ``a[i, j] * b``."""
    return np.kron(a, b)


def direct_sum(*blocks: ComplexMatrix) -> ComplexMatrix:
    """Block-diagonal direct sum of the given matrices."""
    return np.asarray(block_diag(*blocks), dtype=np.complex128)


def operator_norm(m: ComplexMatrix) -> float:
    """Largest singular value of ``m``."""
    return float(np.linalg.norm(m, ord=2))


def hermitian_part(m: ComplexMatrix) -> ComplexMatrix:
    return (m + adjoint(m)) / 2


def is_hermitian(m: ComplexMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES) -> bool:
    if m.shape[0] != m.shape[1]:
        return False
    scale = operator_norm(m)
    return operator_norm(m - adjoint(m)) <= tolerances.relative(
        tolerances.hermitian, scale
    )


def _checked_hermitian(m: ComplexMatrix, tolerances: Tolerances) -> ComplexMatrix:
    _require_square(m)
    if not is_hermitian(m, tolerances):
        raise NotHermitianError("Matrix is not Hermitian within tolerance")
    return hermitian_part(m)


def hermitian_eigenvalues(
    m: ComplexMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in ascending order.

    The input is symmetrized before solving.

    Raises:
        DimensionError: If ``m`` is not square
        NotHermitianError: If ``m`` is not Hermitian within tolerance
    """
    return np.linalg.eigvalsh(_checked_hermitian(m, tolerances))


def min_eigenvalue(
    m: ComplexMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> float:
    return float(hermitian_eigenvalues(m, tolerances)[0])


def cholesky_pd(m: ComplexMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True iff a Cholesky factorization succeeds with all pivots above the floor.

    Pivots are the squared diagonal entries of the Cholesky factor, compared
    against ``pivot_floor * ||m||``.
    """
    h = _checked_hermitian(m, tolerances)
    try:
        factor = np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        return False
    pivots = np.abs(np.diag(factor)) ** 2
    floor = tolerances.relative(tolerances.pivot_floor, operator_norm(h))
    return bool(np.all(pivots > floor))


def inverse(
    m: ComplexMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> ComplexMatrix:
    """Inverse of a well-conditioned square matrix.

    Raises:
        DimensionError: If ``m`` is not square
        SingularMatrixError: If the smallest singular value is below
            ``pivot_floor * ||m||``
    """
    _require_square(m)
    singular_values = np.linalg.svd(m, compute_uv=False)
    floor = tolerances.relative(tolerances.pivot_floor, float(singular_values[0]))
    if singular_values[-1] <= floor:
        raise SingularMatrixError("Matrix is not invertible at this point")
    return np.linalg.inv(m)


def shift_matrix(n: int) -> ComplexMatrix:
    """Upper shift: ones on the first superdiagonal, nilpotent of order n."""
    return np.eye(n, k=1, dtype=np.complex128)


def random_matrix(rng: np.random.Generator, n: int, m: int = 0) -> ComplexMatrix:
    """Complex Gaussian matrix with unit-variance entries."""
    m = m or n
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)


def random_unitary(rng: np.random.Generator, n: int) -> ComplexMatrix:
    """Haar-distributed unitary from the QR factorization of a Gaussian matrix."""
    q, r = np.linalg.qr(random_matrix(rng, n))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


@dataclass(frozen=True, eq=False)
class MatrixTuple:
    """A g-tuple of n x n complex matrices, a point of M_n(C)^g."""

    components: Tuple[ComplexMatrix, ...]

    def __post_init__(self):
        if len(self.components) == 0:
            raise DimensionError("A matrix tuple needs at least one component")
        mats = tuple(as_matrix(c) for c in self.components)
        n = mats[0].shape[0]
        for mat in mats:
            _require_square(mat, "tuple component")
            if mat.shape[0] != n:
                raise DimensionError(
                    f"All components must be {n}x{n}, got {mat.shape[0]}x{mat.shape[1]}"
                )
        object.__setattr__(self, "components", mats)

    @classmethod
    def of(cls, *components) -> "MatrixTuple":
        return cls(tuple(components))

    @classmethod
    def zeros(cls, g: int, n: int) -> "MatrixTuple":
        return cls(tuple(np.zeros((n, n), dtype=np.complex128) for _ in range(g)))

    @classmethod
    def scalars(cls, *values: complex) -> "MatrixTuple":
        """A 1x1 tuple built from scalars."""
        return cls(tuple(np.array([[v]], dtype=np.complex128) for v in values))

    @classmethod
    def random(
        cls, rng: np.random.Generator, g: int, n: int, radius: float = 1.0
    ) -> "MatrixTuple":
        """Random tuple whose components have operator norm ``radius``."""
        mats = []
        for _ in range(g):
            m = random_matrix(rng, n)
            mats.append(radius * m / operator_norm(m))
        return cls(tuple(mats))

    @property
    def size(self) -> int:
        return self.components[0].shape[0]

    @property
    def arity(self) -> int:
        return len(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[ComplexMatrix]:
        return iter(self.components)

    def __getitem__(self, index: int) -> ComplexMatrix:
        return self.components[index]

    def norm(self) -> float:
        """Largest operator norm among the components."""
        return max(operator_norm(c) for c in self.components)

    def row_norm(self) -> float:
        """Square root of the largest eigenvalue of sum X_j X_j*."""
        gram = sum(c @ adjoint(c) for c in self.components)
        return float(np.sqrt(max(np.linalg.eigvalsh(hermitian_part(gram))[-1], 0.0)))

    def scaled(self, factor: complex) -> "MatrixTuple":
        return MatrixTuple(tuple(factor * c for c in self.components))

    def __add__(self, other: "MatrixTuple") -> "MatrixTuple":
        self._require_same_shape(other)
        return MatrixTuple(tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other: "MatrixTuple") -> "MatrixTuple":
        self._require_same_shape(other)
        return MatrixTuple(tuple(a - b for a, b in zip(self, other)))

    def direct_sum(self, other: "MatrixTuple") -> "MatrixTuple":
        if self.arity != other.arity:
            raise DimensionError("Direct sum needs tuples of the same arity")
        return MatrixTuple(tuple(direct_sum(a, b) for a, b in zip(self, other)))

    def similar(self, s: ComplexMatrix) -> "MatrixTuple":
        """Simultaneous similarity S X S^{-1}."""
        s_inv = inverse(s)
        return MatrixTuple(tuple(s @ c @ s_inv for c in self.components))

    def unitary_conjugate(self, u: ComplexMatrix) -> "MatrixTuple":
        """Simultaneous unitary similarity U* X U."""
        return MatrixTuple(tuple(adjoint(u) @ c @ u for c in self.components))

    def distance(self, other: "MatrixTuple") -> float:
        self._require_same_shape(other)
        return max(operator_norm(a - b) for a, b in zip(self, other))

    def _require_same_shape(self, other: "MatrixTuple") -> None:
        if self.arity != other.arity or self.size != other.size:
            raise DimensionError(
                f"Tuple shapes differ: ({self.arity}, {self.size}) vs "
                f"({other.arity}, {other.size})"
            )


def block_tuple(
    upper_left: MatrixTuple,
    upper_right: Sequence[ComplexMatrix],
    lower_right: MatrixTuple,
) -> MatrixTuple:
    """Assemble the block upper-triangular tuple [[X_j, B_j], [0, Y_j]]."""
    if not (upper_left.arity == lower_right.arity == len(upper_right)):
        raise DimensionError("Block tuple parts must share the same arity")
    n, m = upper_left.size, lower_right.size
    comps = []
    for x, b, y in zip(upper_left, upper_right, lower_right):
        if b.shape != (n, m):
            raise DimensionError(f"Off-diagonal block must be {n}x{m}, got {b.shape}")
        comps.append(np.block([[x, b], [np.zeros((m, n), dtype=np.complex128), y]]))
    return MatrixTuple(tuple(comps))


def upper_right_block(m: ComplexMatrix, n: int) -> ComplexMatrix:
    return m[:n, n:]
