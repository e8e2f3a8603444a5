"""
Pytest configuration for freemaps tests.
"""

from pathlib import Path

import numpy as np
import pytest

from freemaps.domains import EpsNeighborhood, disk_domain
from freemaps.elliptic import Orientation, build_ellipse
from freemaps.expr.nodes import FreeMapHandle
from freemaps.linalg import MatrixTuple, shift_matrix

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    """Directory with the JSON input files."""
    return FIXTURES


@pytest.fixture
def rng():
    """Seeded generator; every test gets the same stream."""
    return np.random.default_rng(12345)


@pytest.fixture
def disk():
    """The disk domain ||X - 1|| < sqrt(2)."""
    return disk_domain()


@pytest.fixture
def eps_ball():
    """N_0.5 in two variables."""
    return EpsNeighborhood(0.5, 2)


@pytest.fixture
def shift2():
    """The 2x2 nilpotent shift as a 1-tuple."""
    return MatrixTuple.of(shift_matrix(2))


@pytest.fixture
def square_map():
    """f(x) = x^2."""
    return FreeMapHandle.from_strings(["x1*x1"], 1)


@pytest.fixture
def polynomial_pair_map():
    """A two-variable polynomial self-map fixing 0."""
    return FreeMapHandle.from_strings(["2*x1 + x1*x2", "x2 - 0.5*x2*x1*x2 + i*x1"], 2)


@pytest.fixture(scope="session")
def ellipse_model():
    """The ellipse with modulus 2/3 and a vertical major axis."""
    return build_ellipse(Orientation.IMAGINARY)


@pytest.fixture(scope="session")
def real_ellipse_model():
    """The same ellipse with a horizontal major axis."""
    return build_ellipse(Orientation.REAL)
