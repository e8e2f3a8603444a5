"""
Elliptic integrals of the first kind and the non-commutative ellipse.

``K(z, t)`` is the incomplete integral with modulus ``t`` (``t**2`` inside the
integrand); internally it goes through Carlson's symmetric form
``K(z, t) = z * RF(1 - z**2, 1 - t**2 z**2, 1)``.

The ellipse pipeline maps the unit disk onto an ellipse with the elliptic
sine construction, composes it with a quarter turn and shows that the
resulting free map, evaluated at a nilpotent point on the boundary of the
ellipse's LMI domain, lands strictly inside the domain. A proper self-map
would have sent it to the boundary.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import elliprf

from .config import DEFAULT_TOLERANCES, Tolerances
from .domains import PencilDomain, TrulyLinearPencil, boundary_scale
from .exceptions import (
    BranchCutError,
    ConvergenceError,
    FreeMapsError,
    WitnessStageError,
)
from .expr.nodes import DEFAULT_SERIES_ORDER, FreeMapHandle
from .expr.series import evaluate_on_nilpotent, series_from_samples, series_map
from .linalg import MatrixTuple, min_eigenvalue, shift_matrix
from .models import ReferenceValue, Verdict, WitnessReport, complex_pair, complex_pairs

logger = logging.getLogger(__name__)

ELLIPSE_MODULUS = 2 / 3
NEWTON_TOLERANCE = 1e-12
NEWTON_MAX_ITERATIONS = 50
NEWTON_RESIDUAL = 1e-11
TAYLOR_RADIUS = 0.5
TAYLOR_ORDER = 6
RADIUS_TOLERANCE = 1e-7
NILPOTENT_SIZE = 4

# Published constants and the tolerances they are reproduced to.
ELLIPSE_REFERENCE: Dict[str, Tuple[float, float]] = {
    "r0": (1.00033, 2e-4),
    "min_eig": (0.0114903, 5e-4),
    "c3_over_c1": (0.30572, 1e-4),
    "c5_over_c1": (0.140197, 1e-4),
}


def _is_negative_real(v: complex) -> bool:
    return v.imag == 0 and v.real < 0


def carlson_rf(x: complex, y: complex, z: complex) -> complex:
    """Carlson's symmetric integral R_F on the principal branch.

    Raises:
        BranchCutError: If an argument is a negative real or more than one
            argument is zero
    """
    args = [complex(v) for v in (x, y, z)]
    if any(_is_negative_real(v) for v in args):
        raise BranchCutError(f"R_F arguments on the branch cut: {args}")
    if sum(1 for v in args if v == 0) > 1:
        raise BranchCutError("R_F needs at most one zero argument")
    return complex(elliprf(*args))


@dataclass(frozen=True)
class EllipticConvention:
    """Modulus ``t`` of K(z, t); Carlson calls use the parameter m = t**2."""

    t: float

    def __post_init__(self):
        if not 0 <= self.t < 1:
            raise ValueError(f"Modulus must lie in [0, 1), got {self.t}")

    @property
    def m(self) -> float:
        return self.t**2

    @property
    def complementary(self) -> float:
        return float(np.sqrt(1 - self.m))

    def complete(self) -> float:
        """K(t) = K(1, t)."""
        return complete_k(self.t)


def complete_k(t: float) -> float:
    return carlson_rf(0, 1 - t * t, 1).real


def elliptic_k_incomplete(z: complex, t: float) -> complex:
    """K(z, t) = integral from 0 to z of dx / sqrt((1 - x^2)(1 - t^2 x^2)).

    Valid on the plane cut along the real axis beyond +-1.

    Raises:
        BranchCutError: If ``z`` is real with |z| > 1
    """
    z = complex(z)
    if z.imag == 0 and abs(z.real) > 1:
        raise BranchCutError(f"K(z, t) is ambiguous on the cut at z={z.real}")
    if z == 0:
        return 0j
    return z * carlson_rf(1 - z * z, 1 - t * t * z * z, 1)


def elliptic_k_upper_edge(x: float, t: float) -> complex:
    """Value of K(x + i0, t) for real 1 < |x| < 1/t, approached from above.

    Equal to sign(x) K(t) + i F(s, t') with t' = sqrt(1 - t^2) and
    s = sqrt(x^2 - 1) / (t' |x|).
    """
    x = float(x)
    if not 1 < abs(x) < 1 / t:
        raise BranchCutError(f"Upper-edge value needs 1 < |x| < 1/t, got x={x}")
    t_prime = np.sqrt(1 - t * t)
    s = np.sqrt(x * x - 1) / (t_prime * abs(x))
    tail = elliptic_k_incomplete(s, t_prime).real
    return complex(np.sign(x) * complete_k(t), tail)


def mu(t: float) -> float:
    """mu(t) = (pi/2) K(sqrt(1 - t^2)) / K(t)."""
    if not 0 < t < 1:
        raise ValueError(f"mu needs 0 < t < 1, got {t}")
    return float(np.pi / 2 * complete_k(np.sqrt(1 - t * t)) / complete_k(t))


def _sqrt_one_minus_square(w: complex) -> complex:
    """sqrt(1 - w^2) on the principal branch, continued to the upper edge of the cut."""
    if w.imag == 0 and abs(w.real) > 1:
        return -1j * np.sign(w.real) * np.sqrt(w.real**2 - 1)
    return complex(np.sqrt(1 - w * w))


class Orientation(str, Enum):
    """Which axis of the ellipse is the major one."""

    IMAGINARY = "imaginary"
    REAL = "real"


@dataclass(frozen=True, eq=False)
class EllipseModel:
    """The ellipse, its LMI pencil and the conformal map of the disk onto it."""

    orientation: Orientation
    convention: EllipticConvention
    mu: float
    a: float
    b: float
    c1: complex
    c2: complex
    pencil: TrulyLinearPencil
    scale: float

    @property
    def t(self) -> float:
        return self.convention.t

    @property
    def rotation(self) -> complex:
        return 1j if self.orientation == Orientation.IMAGINARY else 1 + 0j

    @property
    def domain(self) -> PencilDomain:
        return PencilDomain(self.pencil)

    def sine_map(self, z: complex) -> complex:
        """f(z) = sin(pi/(2K) * K(z/sqrt(t), t)).

        Maps the unit disk onto u^2/a^2 + v^2/b^2 < 1.
        """
        w = complex(z) / np.sqrt(self.t)
        if w.imag == 0 and abs(w.real) > 1:
            k = elliptic_k_upper_edge(w.real, self.t)
        else:
            k = elliptic_k_incomplete(w, self.t)
        return complex(np.sin(self.scale * k))

    def sine_map_derivative(self, z: complex) -> complex:
        w = complex(z) / np.sqrt(self.t)
        if w.imag == 0 and abs(w.real) > 1:
            k = elliptic_k_upper_edge(w.real, self.t)
        else:
            k = elliptic_k_incomplete(w, self.t)
        integrand = 1 / (_sqrt_one_minus_square(w) * np.sqrt(1 - self.t**2 * w * w))
        outer = np.cos(self.scale * k) * self.scale / np.sqrt(self.t)
        return complex(outer * integrand)

    def forward(self, z: complex) -> complex:
        """The conformal map of the unit disk onto the ellipse of the pencil."""
        return self.rotation * self.sine_map(z)

    def derivative(self, z: complex) -> complex:
        return self.rotation * self.sine_map_derivative(z)

    def inverse(self, w: complex) -> complex:
        return invert_f(self, w)


def build_ellipse(
    orientation: Orientation = Orientation.IMAGINARY, t: float = ELLIPSE_MODULUS
) -> EllipseModel:
    """The ellipse with semi-axes a = cosh(mu/2), b = sinh(mu/2).

    The pencil is A = [[C1, C2], [0, -C1]] with C2 = 1/a. With the imaginary
    orientation the major axis is vertical, C1 = sqrt(1/b^2 - 1/a^2)/2 is real
    and the conformal map is i*f. With the real orientation C1 is the
    principal root sqrt(1/a^2 - 1/b^2)/2, which is imaginary, and the map is f.
    """
    orientation = Orientation(orientation)
    convention = EllipticConvention(t)
    m = mu(t)
    a, b = float(np.cosh(m / 2)), float(np.sinh(m / 2))
    c1 = complex(0.5 * np.sqrt(complex(1 / a**2 - 1 / b**2)))
    if orientation == Orientation.IMAGINARY:
        c1 = complex(0.5 * np.sqrt(1 / b**2 - 1 / a**2))
    c2 = complex(1 / a)
    pencil = TrulyLinearPencil((np.array([[c1, c2], [0, -c1]], dtype=np.complex128),))
    scale = float(np.pi / (2 * convention.complete()))
    logger.debug(
        "Ellipse %s: mu=%.15g a=%.15g b=%.15g C1=%s", orientation.value, m, a, b, c1
    )
    return EllipseModel(orientation, convention, m, a, b, c1, c2, pencil, scale)


def invert_f(model: EllipseModel, w: complex) -> complex:
    """Solve forward(z) = w by Newton's method.

    The start is w / F'(0), with F'(0) from a central difference. Steps that
    increase the residual are halved.

    Raises:
        ConvergenceError: If the iteration does not reach a residual of
            NEWTON_RESIDUAL within NEWTON_MAX_ITERATIONS steps
    """
    w = complex(w)
    if w == 0:
        return 0j
    h = 1e-6
    slope = (model.forward(h) - model.forward(-h)) / (2 * h)
    z = w / slope
    try:
        residual = model.forward(z) - w
        for iteration in range(NEWTON_MAX_ITERATIONS):
            step = residual / model.derivative(z)
            candidate = z - step
            new_residual = model.forward(candidate) - w
            halvings = 0
            while abs(new_residual) > abs(residual) and halvings < 30:
                step /= 2
                candidate = z - step
                new_residual = model.forward(candidate) - w
                halvings += 1
            z, residual = candidate, new_residual
            if abs(step) <= NEWTON_TOLERANCE * max(1.0, abs(z)):
                break
    except (BranchCutError, ZeroDivisionError) as e:
        raise ConvergenceError(f"Newton iteration left the disk: {e}", last=z) from e
    if not np.isfinite(residual) or abs(residual) > NEWTON_RESIDUAL:
        raise ConvergenceError(
            f"Newton iteration did not converge for w={w} "
            f"(residual {abs(residual):.3e})",
            last=z,
        )
    logger.debug("Inverted w=%s in %d iterations", w, iteration + 1)
    return z


def b1(model: EllipseModel, z: complex) -> complex:
    """b[1](z) = F(i F^{-1}(z)), a quarter turn of the ellipse fixing 0."""
    return model.forward(1j * invert_f(model, z))


def b_series_map(
    model: EllipseModel, order: int = DEFAULT_SERIES_ORDER
) -> FreeMapHandle:
    """The truncated Taylor series of b[1] as a univariate free map."""
    return series_map(lambda z: b1(model, z), TAYLOR_RADIUS, order)


def _stage(name: str, fn: Callable[[], object]):
    try:
        return fn()
    except (FreeMapsError, ValueError, ArithmeticError) as e:
        logger.error("Witness stage %s failed: %s", name, e)
        raise WitnessStageError(name, e) from e


def nonexistence_witness(
    model: EllipseModel, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> WitnessReport:
    """Exhibit b(r0 N) strictly inside the ellipse for N on its boundary.

    Stages: ``taylor`` extracts the coefficients of b[1]; ``radius`` bisects
    r0 = max{r : L(rN) > 0} for the 4x4 shift N; ``nilpotent`` evaluates the
    series at r0 N exactly; ``gap`` takes the smallest eigenvalue of the
    defining matrix there.

    Raises:
        WitnessStageError: Tagged with the stage that failed
    """
    coeffs: List[complex] = _stage(
        "taylor",
        lambda: series_from_samples(
            lambda z: b1(model, z), TAYLOR_RADIUS, TAYLOR_ORDER
        ),
    )
    c1 = coeffs[1]
    ratio3 = coeffs[3] / c1
    ratio5 = coeffs[5] / c1

    n = shift_matrix(NILPOTENT_SIZE)
    ray = MatrixTuple.of(n)
    r0: Optional[float] = _stage(
        "radius",
        lambda: boundary_scale(
            model.domain, ray, RADIUS_TOLERANCE, tolerances=tolerances
        ),
    )
    if r0 is None:
        raise WitnessStageError("radius", ValueError("no boundary crossing along N"))

    image = _stage(
        "nilpotent", lambda: evaluate_on_nilpotent([0, c1, 0, coeffs[3]], r0, n)
    )
    gap: float = _stage(
        "gap",
        lambda: min_eigenvalue(
            model.pencil.evaluate(MatrixTuple.of(image)), tolerances
        ),
    )

    values = {
        "r0": r0,
        "min_eig": gap,
        "c3_over_c1": ratio3.real,
        "c5_over_c1": ratio5.real,
    }
    # The real orientation conjugates b[1] by a quarter turn, flipping the sign of c3.
    flipped = model.orientation != Orientation.IMAGINARY
    signs = {"c3_over_c1": -1.0 if flipped else 1.0}
    reference = {
        name: ReferenceValue(
            expected=signs.get(name, 1.0) * expected, tolerance=tol, actual=values[name]
        )
        for name, (expected, tol) in ELLIPSE_REFERENCE.items()
    }
    matched = all(ref.matches for ref in reference.values())
    verdict = Verdict.PASS if matched else Verdict.FAIL
    notes = []
    if gap > tolerances.terminal_gap:
        notes.append(
            "b(r0 N) is strictly inside the domain: the quarter turn is not proper"
        )
    logger.info("Witness: r0=%.8f gap=%.8f c3/c1=%.6f", r0, gap, ratio3.real)
    return WitnessReport(
        op="nonexistence_witness",
        verdict=verdict,
        max_deviation=max(abs(ref.actual - ref.expected) for ref in reference.values()),
        notes=notes,
        orientation=model.orientation.value,
        t=model.t,
        mu=model.mu,
        a=model.a,
        b=model.b,
        c1_entry=complex_pair(model.c1),
        c2_entry=complex_pair(model.c2),
        coefficients=complex_pairs(coeffs),
        r0=r0,
        c3_over_c1=ratio3.real,
        c5_over_c1=ratio5.real,
        min_eig=gap,
        tolerances={
            "taylor_radius": TAYLOR_RADIUS,
            "radius_bisection": RADIUS_TOLERANCE,
            "newton": NEWTON_TOLERANCE,
            "pivot_floor": tolerances.pivot_floor,
        },
        reference=reference,
    )
