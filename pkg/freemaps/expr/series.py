"""
Univariate power series: Taylor coefficients from samples on a circle, and
exact evaluation of a truncated series at a nilpotent matrix.
"""
import logging
from typing import Callable, List, Sequence

import numpy as np

from ..exceptions import DimensionError, NotNilpotentError
from ..linalg import ComplexMatrix, identity, operator_norm
from .nodes import DEFAULT_SERIES_ORDER, FreeMapHandle, Series, Var

logger = logging.getLogger(__name__)

NILPOTENT_TOLERANCE = 1e-12


def sample_count(order: int) -> int:
    return max(64, 8 * order)


def series_from_samples(
    fn: Callable[[complex], complex], radius: float, order: int
) -> List[complex]:
    """Taylor coefficients c_0..c_order of ``fn`` at 0 by the Cauchy integral.

    ``fn`` is sampled at M = max(64, 8*order) equally spaced points on the
    circle of the given radius and the coefficients are read off a discrete
    Fourier transform: c_k = fft(samples)[k] / (M * radius**k). For ``fn``
    analytic on a disc of radius R > radius the aliasing error is
    O((radius/R)**M).
    """
    if radius <= 0:
        raise ValueError(f"Sampling radius must be positive, got {radius}")
    if order < 0:
        raise ValueError(f"Series order must be non-negative, got {order}")
    m = sample_count(order)
    nodes = radius * np.exp(2j * np.pi * np.arange(m) / m)
    samples = np.array([fn(complex(z)) for z in nodes], dtype=np.complex128)
    spectrum = np.fft.fft(samples) / m
    coeffs = [complex(spectrum[k] / radius**k) for k in range(order + 1)]
    logger.debug(
        "Extracted %d coefficients from %d samples at r=%g", order + 1, m, radius
    )
    return coeffs


def nilpotency_index(n: ComplexMatrix, tolerance: float = NILPOTENT_TOLERANCE) -> int:
    """Smallest k with ||N^k|| <= tolerance.

    Raises:
        NotNilpotentError: If no power up to the matrix size vanishes
    """
    if n.ndim != 2 or n.shape[0] != n.shape[1]:
        raise DimensionError(f"Nilpotent argument must be square, got {n.shape}")
    power = identity(n.shape[0])
    for k in range(1, n.shape[0] + 1):
        power = power @ n
        if operator_norm(power) <= tolerance:
            return k
    raise NotNilpotentError(
        f"Matrix is not nilpotent: ||N^{n.shape[0]}|| = {operator_norm(power):.3e}"
    )


def evaluate_on_nilpotent(
    coeffs: Sequence[complex], scale: complex, n: ComplexMatrix
) -> ComplexMatrix:
    """Sum_{j<k} coeffs[j] * (scale*N)^j where k is the nilpotency index of N.

    Coefficients past k-1 do not contribute; missing ones count as zero.
    """
    k = nilpotency_index(n)
    size = n.shape[0]
    padded = list(coeffs[:k]) + [0j] * max(0, k - len(coeffs))
    step = complex(scale) * n
    result = np.zeros((size, size), dtype=np.complex128)
    power = identity(size)
    for c in padded:
        result = result + complex(c) * power
        power = power @ step
    return result


def series_map(
    fn: Callable[[complex], complex],
    radius: float,
    order: int = DEFAULT_SERIES_ORDER,
) -> FreeMapHandle:
    """The univariate free map x -> sum_k c_k x^k truncated at ``order``."""
    coeffs = series_from_samples(fn, radius, order)
    return FreeMapHandle(1, (Series(tuple(coeffs), Var(1)),))
