"""
freemaps - free maps on matrix tuples

Evaluates free (non-commutative) polynomial and rational maps on tuples of
matrices, decides membership in LMI domains, computes free derivatives and
runs rigidity probes for proper maps.
"""

__version__ = "0.3.0"
__author__ = "Tom Sapletta"
__email__ = "info@softreck.dev"

from .calculus import (
    BlockWitness,
    DerivativeMatrix,
    ampliation_check,
    check_block_formula,
    circular_linearity_check,
    derivative_matrix,
    directional_derivative,
    injectivity_probe,
    properness_probe,
    uniqueness_check,
)
from .config import DEFAULT_TOLERANCES, RunConfig, Settings, Tolerances
from .domains import (
    EpsNeighborhood,
    NCDomain,
    PencilDomain,
    PolynomialDomain,
    TrulyLinearPencil,
    disk_domain,
)
from .elliptic import EllipseModel, Orientation, build_ellipse, nonexistence_witness
from .exceptions import FreeMapsError
from .expr import FreeMapHandle, evaluate, evaluate_map, parse
from .linalg import MatrixTuple

__all__ = [
    "BlockWitness",
    "DEFAULT_TOLERANCES",
    "DerivativeMatrix",
    "EllipseModel",
    "EpsNeighborhood",
    "FreeMapHandle",
    "FreeMapsError",
    "MatrixTuple",
    "NCDomain",
    "Orientation",
    "PencilDomain",
    "PolynomialDomain",
    "RunConfig",
    "Settings",
    "Tolerances",
    "TrulyLinearPencil",
    "ampliation_check",
    "build_ellipse",
    "check_block_formula",
    "circular_linearity_check",
    "derivative_matrix",
    "directional_derivative",
    "disk_domain",
    "evaluate",
    "evaluate_map",
    "injectivity_probe",
    "nonexistence_witness",
    "parse",
    "properness_probe",
    "uniqueness_check",
]
