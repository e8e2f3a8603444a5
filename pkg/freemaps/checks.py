"""
Randomized property suites for free maps and the disk-domain Möbius report.

Each suite draws ``trials`` instances from a seeded generator, measures a
scale-relative deviation and compares the worst one against its tolerance.
"""
import logging
from typing import Callable, Dict, List, Tuple

import numpy as np

from .calculus import (
    ampliation_check,
    check_block_formula,
    derivative_matrix,
    directional_derivative,
    properness_probe,
)
from .config import DEFAULT_TOLERANCES, Tolerances
from .domains import disk_characterizations, disk_domain
from .expr.nodes import FreeMapHandle, evaluate_map
from .linalg import MatrixTuple, inverse, operator_norm
from .models import MobiusReport, Report, SuiteReport, Verdict
from .sampling import (
    make_rng,
    random_invertible,
    random_member,
    random_polynomial_map,
    random_self_map,
    random_witness,
)

logger = logging.getLogger(__name__)

FINITE_DIFFERENCE_STEP = 1e-5
MOBIUS_RAYS = 8


def mobius_map(theta: float) -> FreeMapHandle:
    """f_theta(x) = e^{i theta} x (1 + x - e^{i theta} x)^{-1} on the disk domain."""
    phase = f"exp(i*({float(theta)!r}))"
    return FreeMapHandle.from_strings([f"{phase}*x1*inv(1 + x1 - {phase}*x1)"], 1)


def _relative(a: MatrixTuple, b: MatrixTuple) -> float:
    scale = max(1.0, b.norm())
    return max(operator_norm(p - q) for p, q in zip(a, b)) / scale


def _sums_trial(rng: np.random.Generator) -> float:
    g = int(rng.integers(1, 3))
    f = random_polynomial_map(rng, g, degree=4)
    x = MatrixTuple.random(rng, g, int(rng.integers(1, 4)))
    y = MatrixTuple.random(rng, g, int(rng.integers(1, 4)))
    blocks = evaluate_map(f, x).direct_sum(evaluate_map(f, y))
    return _relative(evaluate_map(f, x.direct_sum(y)), blocks)


def _blocks_trial(rng: np.random.Generator) -> float:
    g = int(rng.integers(1, 3))
    f = random_polynomial_map(rng, g, degree=4)
    w = random_witness(rng, g, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    return check_block_formula(f, w).max_deviation or 0.0


def _similarity_trial(rng: np.random.Generator) -> float:
    g = int(rng.integers(1, 3))
    n = int(rng.integers(1, 5))
    f = random_polynomial_map(rng, g, degree=4)
    x = MatrixTuple.random(rng, g, n)
    s = random_invertible(rng, n)
    s_inv = inverse(s)
    expected = MatrixTuple(tuple(s @ c @ s_inv for c in evaluate_map(f, x)))
    return _relative(evaluate_map(f, x.similar(s)), expected)


def _derivative_trial(rng: np.random.Generator) -> float:
    g = int(rng.integers(1, 3))
    n = int(rng.integers(1, 5))
    f = random_polynomial_map(rng, g, degree=4)
    x = MatrixTuple.random(rng, g, n)
    h = MatrixTuple.random(rng, g, n)
    s = FINITE_DIFFERENCE_STEP
    forward = evaluate_map(f, x + h.scaled(s))
    backward = evaluate_map(f, x - h.scaled(s))
    central = MatrixTuple(tuple((p - q) / (2 * s) for p, q in zip(forward, backward)))
    block = directional_derivative(f, x, h)

    square = FreeMapHandle.from_strings(["x1*x1"], 1)
    x1, h1 = MatrixTuple.random(rng, 1, n), MatrixTuple.random(rng, 1, n)
    exact = MatrixTuple.of(x1[0] @ h1[0] + h1[0] @ x1[0])
    trick = directional_derivative(square, x1, h1)
    return max(_relative(block, central), _relative(trick, exact))


def _ampliation_trial(rng: np.random.Generator) -> float:
    n = int(rng.integers(2, 4))
    if rng.uniform() < 0.5:
        f = mobius_map(float(rng.uniform(0, 2 * np.pi)))
    else:
        f = random_self_map(rng, int(rng.integers(1, 3)))
    report = ampliation_check(f, n)
    return report.max_deviation or 0.0


SUITES: Dict[str, Tuple[Callable[[np.random.Generator], float], str]] = {
    "sums": (_sums_trial, "block_formula"),
    "blocks": (_blocks_trial, "block_formula"),
    "similarity": (_similarity_trial, "similarity"),
    "derivative": (_derivative_trial, "finite_difference"),
    "ampliation": (_ampliation_trial, "eigen_match"),
}


def run_suite(
    suite: str,
    seed: int = 0,
    trials: int = 50,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> SuiteReport:
    """Run one property suite; the seed fixes every random instance."""
    if suite not in SUITES:
        raise ValueError(f"Unknown suite {suite!r}; choose from {sorted(SUITES)}")
    trial, tolerance_name = SUITES[suite]
    tolerance = getattr(tolerances, tolerance_name)
    rng = make_rng(seed)
    deviations = [trial(rng) for _ in range(trials)]
    worst = max(deviations, default=0.0)
    violations = [i for i, d in enumerate(deviations) if d > tolerance]
    if violations:
        logger.warning(
            "Suite %s: %d of %d trials exceed %g",
            suite,
            len(violations),
            trials,
            tolerance,
        )
    return SuiteReport(
        op=f"check.{suite}",
        verdict=Verdict.FAIL if violations else Verdict.PASS,
        max_deviation=worst,
        samples=[{"trial": i, "deviation": d} for i, d in enumerate(deviations)],
        suite=suite,
        seed=seed,
        trials=trials,
        tolerance=tolerance,
    )


def mobius_report(
    theta: float,
    trials: int = 100,
    seed: int = 0,
    max_size: int = 4,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> MobiusReport:
    """Check that f_theta is a proper self-map of the disk domain ||X - 1|| < sqrt(2).

    Runs membership preservation and the inverse f_{-theta} on random members,
    the agreement of the three descriptions of the disk, the properness probe
    on MOBIUS_RAYS rays and the derivative at 0 against e^{i theta}.
    """
    rng = make_rng(seed)
    disk = disk_domain()
    f = mobius_map(theta)
    roundtrip = f.compose(mobius_map(-theta))
    members = [
        random_member(disk, rng, int(rng.integers(1, max_size + 1)))
        for _ in range(trials)
    ]

    outside: List[int] = []
    roundtrip_worst = 0.0
    disagreements: List[int] = []
    for index, x in enumerate(members):
        if not disk.is_member(evaluate_map(f, x), tolerances):
            outside.append(index)
        roundtrip_worst = max(roundtrip_worst, _relative(evaluate_map(roundtrip, x), x))
        signs = {gap > 0 for gap in disk_characterizations(x)}
        if len(signs) != 1:
            disagreements.append(index)

    checks: Dict[str, Report] = {
        "membership": Report(
            op="mobius.membership",
            verdict=Verdict.FAIL if outside else Verdict.PASS,
            samples=[{"index": i} for i in outside],
        ),
        "inverse": Report(
            op="mobius.inverse",
            verdict=(
                Verdict.PASS
                if roundtrip_worst <= tolerances.similarity
                else Verdict.FAIL
            ),
            max_deviation=roundtrip_worst,
            notes=[f"inverse is f_(-theta) with theta' = {float(theta)!r}"],
        ),
        "characterizations": Report(
            op="mobius.characterizations",
            verdict=Verdict.FAIL if disagreements else Verdict.PASS,
            samples=[{"index": i} for i in disagreements],
        ),
    }

    rays = [MatrixTuple.random(rng, 1, 1 + k % 2) for k in range(MOBIUS_RAYS)]
    checks["properness"] = properness_probe(f, disk, disk, rays, tolerances=tolerances)

    slope = derivative_matrix(f, MatrixTuple.zeros(1, 1)).matrix[0, 0]
    slope_error = float(abs(slope - np.exp(1j * theta)))
    checks["derivative"] = Report(
        op="mobius.derivative",
        verdict=(
            Verdict.PASS if slope_error <= tolerances.block_formula else Verdict.FAIL
        ),
        max_deviation=slope_error,
        samples=[{"derivative": [float(slope.real), float(slope.imag)]}],
    )

    passed = all(check.passed for check in checks.values())
    return MobiusReport(
        op="mobius",
        verdict=Verdict.PASS if passed else Verdict.FAIL,
        max_deviation=max(c.max_deviation or 0.0 for c in checks.values()),
        theta=float(theta),
        trials=trials,
        seed=seed,
        checks=checks,
    )
