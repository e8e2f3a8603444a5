"""
Free calculus and rigidity diagnostics.

Derivatives come from the block trick: evaluating a free map at the
upper-triangular tuple [[X, H], [0, X]] puts f'(X)[H] in the upper-right
block exactly, because such blocks multiply like dual numbers. The probes
built on top of it only ever report numerical evidence; verdicts are
three-valued where a hypothesis may fail to hold.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .domains import NCDomain, boundary_scale
from .exceptions import ArityError, DimensionError, FreeMapsError, PreconditionError
from .expr.nodes import FreeMapHandle, evaluate_map
from .linalg import (
    ComplexMatrix,
    MatrixTuple,
    as_matrix,
    block_tuple,
    operator_norm,
    upper_right_block,
)
from .models import (
    AmpliationReport,
    BlockFormulaReport,
    InjectivityReport,
    LinearityReport,
    PropernessReport,
    RankReport,
    RayReport,
    UniquenessReport,
    Verdict,
    complex_pairs,
)

logger = logging.getLogger(__name__)

INJECTIVITY_GRID_POINTS = 16
INJECTIVITY_GRID_SPAN = 1e3
PROPERNESS_DELTAS = (1e-1, 1e-9)


@dataclass(frozen=True, eq=False)
class BlockWitness:
    """X (n), Y (m), Gamma (n x m) and t, assembling Z(t) = [[X, t C], [0, Y]]."""

    x: MatrixTuple
    y: MatrixTuple
    gamma: ComplexMatrix
    t: complex = 1.0

    def __post_init__(self):
        gamma = as_matrix(self.gamma)
        if gamma.shape != (self.x.size, self.y.size):
            raise DimensionError(
                f"Gamma must be {self.x.size}x{self.y.size}, got {gamma.shape}"
            )
        if self.x.arity != self.y.arity:
            raise ArityError("X and Y must have the same arity")
        object.__setattr__(self, "gamma", gamma)

    def corrections(self) -> List[ComplexMatrix]:
        """C_j = X_j Gamma - Gamma Y_j."""
        return [xj @ self.gamma - self.gamma @ yj for xj, yj in zip(self.x, self.y)]

    def at(self, t: complex) -> "BlockWitness":
        return BlockWitness(self.x, self.y, self.gamma, t)

    def assemble(self) -> MatrixTuple:
        return block_tuple(self.x, [self.t * c for c in self.corrections()], self.y)


@dataclass(frozen=True, eq=False)
class DerivativeMatrix:
    """Matrix of H -> f'(X)[H] in the matrix-unit basis.

    Coordinates of a tuple H are ordered j*n^2 + a*n + b for entry (a, b) of
    component j, i.e. the row-major ravel of each component in turn.
    """

    base: MatrixTuple
    matrix: ComplexMatrix
    co_arity: int

    @property
    def size(self) -> int:
        return self.base.size

    def apply(self, h: MatrixTuple) -> MatrixTuple:
        n = self.size
        out = self.matrix @ vec(h)
        return MatrixTuple(
            tuple(
                out[k * n * n : (k + 1) * n * n].reshape(n, n)
                for k in range(self.co_arity)
            )
        )

    def eigenvalues(self) -> np.ndarray:
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise DimensionError("Eigenvalues need a map with equal arity and co-arity")
        return np.linalg.eigvals(self.matrix)

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    def smallest_singular_value(self) -> float:
        return float(self.singular_values()[-1])


def vec(h: MatrixTuple) -> np.ndarray:
    return np.concatenate([c.ravel() for c in h])


def _max_norm(a: MatrixTuple, b: MatrixTuple) -> float:
    return max(operator_norm(p - q) for p, q in zip(a, b))


def directional_derivative(
    f: FreeMapHandle, x: MatrixTuple, h: MatrixTuple
) -> MatrixTuple:
    """f'(X)[H] from the upper-right block of f([[X, sH], [0, X]]) / s.

    The scaling s = min(1, 0.1/||H||) keeps the block tuple close to the
    diagonal; the result does not depend on s.

    Raises:
        EvaluationError: If f cannot be evaluated at the block point
    """
    if h.arity != x.arity or h.size != x.size:
        raise DimensionError("Direction must have the shape of the base point")
    n = x.size
    norm = h.norm()
    if norm == 0:
        return MatrixTuple.zeros(f.co_arity, n)
    s = min(1.0, 0.1 / norm)
    fz = evaluate_map(f, block_tuple(x, [s * c for c in h], x))
    return MatrixTuple(tuple(upper_right_block(c, n) / s for c in fz))


def derivative_matrix(f: FreeMapHandle, x: MatrixTuple) -> DerivativeMatrix:
    """Assemble f'(X) column by column on the g*n^2 matrix-unit directions."""
    n, g = x.size, x.arity
    columns = []
    for j in range(g):
        for a in range(n):
            for b in range(n):
                h = [np.zeros((n, n), dtype=np.complex128) for _ in range(g)]
                h[j][a, b] = 1.0
                columns.append(vec(directional_derivative(f, x, MatrixTuple(tuple(h)))))
    return DerivativeMatrix(x, np.column_stack(columns), f.co_arity)


def check_block_formula(
    f: FreeMapHandle, w: BlockWitness, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> BlockFormulaReport:
    """Compare f(Z(t)) with [[f(X), t(f(X)G - G f(Y))], [0, f(Y)]] per component."""
    fz = evaluate_map(f, w.assemble())
    fx = evaluate_map(f, w.x)
    fy = evaluate_map(f, w.y)
    zeros = np.zeros((w.y.size, w.x.size), dtype=np.complex128)
    deviations = []
    for z_j, x_j, y_j in zip(fz, fx, fy):
        corner = w.t * (x_j @ w.gamma - w.gamma @ y_j)
        expected = np.block([[x_j, corner], [zeros, y_j]])
        scale = max(1.0, operator_norm(expected))
        deviations.append(operator_norm(z_j - expected) / scale)
    worst = max(deviations)
    return BlockFormulaReport(
        op="check_block_formula",
        verdict=Verdict.PASS if worst <= tolerances.block_formula else Verdict.FAIL,
        max_deviation=worst,
        deviations=deviations,
    )


def _witness_reach(
    dom: NCDomain, w: BlockWitness, tolerances: Tolerances, iterations: int = 60
) -> Optional[float]:
    """Largest t in (0, 1] with Z(t) in dom, or None if only t = 0 works."""
    if dom.is_member(w.at(1.0).assemble(), tolerances):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if dom.is_member(w.at(mid).assemble(), tolerances):
            lo = mid
        else:
            hi = mid
    return lo if lo > 0 else None


def injectivity_probe(
    f: FreeMapHandle,
    dom: NCDomain,
    x: MatrixTuple,
    y: MatrixTuple,
    gamma: ComplexMatrix,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> InjectivityReport:
    """Look for a failure of injectivity through the intertwining Gamma.

    When f(X)G = G f(Y), the tuples Z(t) = [[X, t(XG - GY)], [0, Y]] stay in
    the domain for small t and f(Z(t)) does not depend on t. A proper map is
    one-to-one, which forces XG = GY; a non-zero XG - GY is reported as a
    counterexample candidate.
    """
    fx, fy = evaluate_map(f, x), evaluate_map(f, y)
    w = BlockWitness(x, y, gamma)
    gamma = w.gamma
    g_norm = max(1.0, operator_norm(gamma))
    hyp_scale = g_norm * max(1.0, fx.norm(), fy.norm())
    hyp = max(operator_norm(a @ gamma - gamma @ b) for a, b in zip(fx, fy))
    inter_scale = g_norm * max(1.0, x.norm(), y.norm())
    inter = max(operator_norm(c) for c in w.corrections())
    report = dict(
        op="injectivity_probe",
        hypothesis_residual=hyp,
        intertwining_residual=inter,
    )
    if hyp > tolerances.relative(tolerances.probe, hyp_scale):
        return InjectivityReport(
            verdict=Verdict.INCONCLUSIVE,
            notes=["f(X)G != G f(Y); the probe hypothesis is not met"],
            **report,
        )

    t_max = _witness_reach(dom, w, tolerances)
    grid: List[float] = []
    constancy = None
    if t_max is None:
        logger.warning("Z(t) leaves the domain for every t > 0")
    else:
        grid = [
            float(t)
            for t in np.geomspace(
                t_max, t_max / INJECTIVITY_GRID_SPAN, INJECTIVITY_GRID_POINTS
            )
        ]
        reference = evaluate_map(f, w.at(grid[0]).assemble())
        constancy = 0.0
        for t in grid[1:]:
            moved = _max_norm(evaluate_map(f, w.at(t).assemble()), reference)
            constancy = max(constancy, moved)

    # f(Z(t)) moves by at most t * hyp along the grid
    constancy_bound = hyp + tolerances.relative(tolerances.probe, hyp_scale)
    if constancy is not None and constancy > constancy_bound:
        return InjectivityReport(
            verdict=Verdict.INCONCLUSIVE,
            t_max=t_max,
            t_grid=grid,
            constancy_deviation=constancy,
            max_deviation=constancy,
            notes=[f"f(Z(t)) is not constant in t (deviation {constancy:.3g})"],
            **report,
        )

    consistent = inter <= tolerances.relative(tolerances.probe, inter_scale)
    return InjectivityReport(
        verdict=Verdict.CONSISTENT if consistent else Verdict.COUNTEREXAMPLE,
        t_max=t_max,
        t_grid=grid,
        constancy_deviation=constancy,
        max_deviation=constancy,
        **report,
    )


def properness_probe(
    f: FreeMapHandle,
    dom: NCDomain,
    codom: NCDomain,
    rays: Sequence[MatrixTuple],
    steps: int = 20,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> PropernessReport:
    """Follow each ray to the boundary of ``dom`` and watch the codomain gap.

    Radii r*(1 - delta) use deltas log-spaced from 1e-1 down to 1e-9. A proper
    map must send the boundary to the boundary, so the terminal codomain gap
    should vanish; this tests the necessary condition only.
    """
    if steps < 1:
        raise ValueError(f"steps must be positive, got {steps}")
    deltas = np.geomspace(PROPERNESS_DELTAS[0], PROPERNESS_DELTAS[1], steps)
    results: List[RayReport] = []
    for index, ray in enumerate(rays):
        try:
            r_star = boundary_scale(dom, ray, tolerances=tolerances)
            if r_star is None:
                results.append(RayReport(index=index, error="no boundary crossing"))
                continue
            radii = [float(r_star * (1 - d)) for d in deltas]
            dom_gaps, codom_gaps = [], []
            for r in radii:
                point = ray.scaled(r)
                dom_gaps.append(dom.boundary_distance(point))
                codom_gaps.append(codom.boundary_distance(evaluate_map(f, point)))
            results.append(
                RayReport(
                    index=index,
                    r_star=r_star,
                    radii=radii,
                    domain_gaps=dom_gaps,
                    codomain_gaps=codom_gaps,
                    terminal_gap=codom_gaps[-1],
                )
            )
        except FreeMapsError as e:
            logger.warning("Ray %d failed: %s", index, e)
            results.append(RayReport(index=index, error=str(e)))

    terminal = [r.terminal_gap for r in results if r.terminal_gap is not None]
    worst = max((abs(g) for g in terminal), default=None)
    failed = (
        any(r.error for r in results)
        or worst is None
        or worst > tolerances.terminal_gap
    )
    return PropernessReport(
        op="properness_probe",
        verdict=Verdict.FAIL if failed else Verdict.PASS,
        max_deviation=worst,
        max_terminal_gap=worst,
        rays=results,
    )


def _require_zero_at_origin(
    f: FreeMapHandle, n: int, tolerances: Tolerances
) -> None:
    value = evaluate_map(f, MatrixTuple.zeros(f.arity, n))
    if value.norm() > tolerances.relative(tolerances.block_formula, 1.0):
        raise PreconditionError("The map must fix the origin: f(0) != 0")


def match_eigenvalues(expected: Sequence[complex], actual: Sequence[complex]) -> float:
    """Greedy nearest matching; returns the largest matched distance."""
    remaining = list(actual)
    worst = 0.0
    for value in expected:
        distances = [abs(value - a) for a in remaining]
        k = int(np.argmin(distances))
        worst = max(worst, distances[k])
        remaining.pop(k)
    return worst


def ampliation_check(
    f: FreeMapHandle, n: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> AmpliationReport:
    """Compare the spectrum of f'(0) at size n with the size-1 spectrum.

    On vec coordinates the size-n derivative is I_n (x) phi'(0) (x) I_n, so
    every size-1 eigenvalue reappears n^2 times.
    """
    if f.arity != f.co_arity:
        raise ArityError(
            f"Ampliation needs a self-map, got arity {f.arity} "
            f"and co-arity {f.co_arity}"
        )
    _require_zero_at_origin(f, 1, tolerances)
    base = derivative_matrix(f, MatrixTuple.zeros(f.arity, 1)).eigenvalues()
    spectrum = derivative_matrix(f, MatrixTuple.zeros(f.arity, n)).eigenvalues()
    expected = np.repeat(base, n * n)
    deviation = match_eigenvalues(expected, spectrum)
    scale = max(1.0, float(np.max(np.abs(base))))
    unimodular = bool(np.all(np.abs(np.abs(base) - 1) <= tolerances.eigen_match))
    ok = deviation <= tolerances.relative(tolerances.eigen_match, scale)
    return AmpliationReport(
        op="ampliation_check",
        verdict=Verdict.PASS if ok else Verdict.FAIL,
        max_deviation=deviation,
        size=n,
        base_spectrum=complex_pairs(base),
        spectrum=complex_pairs(sorted(spectrum, key=lambda z: (z.real, z.imag))),
        multiplicity=n * n,
        unimodular=unimodular,
    )


def circular_linearity_check(
    f: FreeMapHandle,
    dom: NCDomain,
    thetas: Sequence[float],
    samples: Iterable[MatrixTuple],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> LinearityReport:
    """Homogeneity defect ||f(e^{it} X) - e^{it} f(X)|| / ||f(X)|| over samples.

    Pairs whose rotation leaves ``dom`` are skipped and counted.
    """
    worst = 0.0
    skipped = 0
    details = []
    for index, x in enumerate(samples):
        fx = evaluate_map(f, x)
        denominator = fx.norm() or 1.0
        for theta in thetas:
            phase = np.exp(1j * theta)
            rotated = x.scaled(phase)
            if not dom.is_member(rotated, tolerances):
                skipped += 1
                continue
            defect = _max_norm(evaluate_map(f, rotated), fx.scaled(phase)) / denominator
            worst = max(worst, defect)
            details.append({"index": index, "theta": float(theta), "deviation": defect})
    if skipped:
        logger.info("Skipped %d rotated samples outside the domain", skipped)
    return LinearityReport(
        op="circular_linearity_check",
        verdict=Verdict.PASS if worst <= tolerances.linearity else Verdict.FAIL,
        max_deviation=worst,
        skipped=skipped,
        samples=details,
        notes=[f"{skipped} rotated samples left the domain"] if skipped else [],
    )


def uniqueness_check(
    f: FreeMapHandle,
    g2: FreeMapHandle,
    samples: Iterable[MatrixTuple],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> UniquenessReport:
    """Maps fixing 0 with the same derivative there should agree everywhere."""
    if f.arity != g2.arity or f.co_arity != g2.co_arity:
        raise ArityError("Both maps must have the same arity and co-arity")
    _require_zero_at_origin(f, 1, tolerances)
    _require_zero_at_origin(g2, 1, tolerances)
    origin = MatrixTuple.zeros(f.arity, 1)
    gap = operator_norm(
        derivative_matrix(f, origin).matrix - derivative_matrix(g2, origin).matrix
    )
    if gap > tolerances.similarity:
        return UniquenessReport(
            op="uniqueness_check",
            verdict=Verdict.DISTINCT,
            derivative_gap=gap,
        )
    worst = 0.0
    details = []
    for index, x in enumerate(samples):
        fx, gx = evaluate_map(f, x), evaluate_map(g2, x)
        deviation = _max_norm(fx, gx) / max(1.0, fx.norm())
        worst = max(worst, deviation)
        details.append({"index": index, "deviation": deviation})
    return UniquenessReport(
        op="uniqueness_check",
        verdict=Verdict.PASS if worst <= tolerances.similarity else Verdict.FAIL,
        max_deviation=worst,
        derivative_gap=gap,
        samples=details,
    )


def derivative_rank_report(
    f: FreeMapHandle,
    points: Iterable[MatrixTuple],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> RankReport:
    """Smallest singular value of f'(X) at each point.

    Full rank means f'(X) is an isomorphism.
    """
    values = [derivative_matrix(f, x).smallest_singular_value() for x in points]
    full = all(v > tolerances.rank for v in values)
    return RankReport(
        op="derivative_rank",
        verdict=Verdict.PASS if full else Verdict.FAIL,
        max_deviation=None,
        smallest_singular_values=values,
        full_rank=full,
    )
