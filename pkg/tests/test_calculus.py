"""
Tests for free derivatives and the rigidity probes.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freemaps.calculus import (
    BlockWitness,
    ampliation_check,
    check_block_formula,
    circular_linearity_check,
    derivative_matrix,
    derivative_rank_report,
    directional_derivative,
    injectivity_probe,
    match_eigenvalues,
    properness_probe,
    uniqueness_check,
)
from freemaps.checks import mobius_map
from freemaps.domains import EpsNeighborhood, PencilDomain, TrulyLinearPencil
from freemaps.elliptic import b_series_map
from freemaps.exceptions import ArityError, DimensionError, PreconditionError
from freemaps.expr.nodes import FreeMapHandle
from freemaps.linalg import MatrixTuple, random_unitary, shift_matrix
from freemaps.models import Verdict
from freemaps.sampling import (
    random_member,
    random_members,
    random_polynomial_map,
    random_witness,
)

pytestmark = pytest.mark.unit

SEEDS = st.integers(min_value=0, max_value=2**32 - 1)


class TestDirectionalDerivative:
    """Tests for the block-trick derivative."""

    def test_square(self, square_map, rng):
        """Test d/dX X^2 [H] = XH + HX."""
        x = MatrixTuple.random(rng, 1, 3)
        h = MatrixTuple.random(rng, 1, 3)
        expected = x[0] @ h[0] + h[0] @ x[0]
        result = directional_derivative(square_map, x, h)[0]
        np.testing.assert_allclose(result, expected, atol=1e-12)

    def test_large_direction(self, square_map, rng):
        """Test that the result does not depend on the size of H."""
        x = MatrixTuple.random(rng, 1, 2)
        h = MatrixTuple.random(rng, 1, 2, radius=50.0)
        expected = x[0] @ h[0] + h[0] @ x[0]
        result = directional_derivative(square_map, x, h)[0]
        np.testing.assert_allclose(result, expected, atol=1e-10)

    def test_inverse(self, rng):
        """Test d/dX X^-1 [H] = -X^-1 H X^-1."""
        f = FreeMapHandle.from_strings(["inv(2 + x1)"], 1)
        x = MatrixTuple.random(rng, 1, 2, radius=0.5)
        h = MatrixTuple.random(rng, 1, 2)
        a = np.linalg.inv(2 * np.eye(2) + x[0])
        result = directional_derivative(f, x, h)[0]
        np.testing.assert_allclose(result, -a @ h[0] @ a, atol=1e-12)

    def test_zero_direction(self, square_map):
        """Test that a zero direction gives zero."""
        zero = MatrixTuple.zeros(1, 2)
        result = directional_derivative(square_map, zero, zero)
        assert result.norm() == 0

    def test_shape_mismatch(self, square_map):
        """Test that H must have the shape of X."""
        with pytest.raises(DimensionError):
            directional_derivative(
                square_map, MatrixTuple.zeros(1, 2), MatrixTuple.zeros(1, 3)
            )

    @given(seed=SEEDS)
    @settings(max_examples=20, deadline=None)
    def test_matches_finite_differences(self, seed):
        """Test agreement with central differences on random polynomial maps."""
        rng = np.random.default_rng(seed)
        f = random_polynomial_map(rng, 2, degree=4)
        x = MatrixTuple.random(rng, 2, 3)
        h = MatrixTuple.random(rng, 2, 3)
        s = 1e-5
        forward, backward = f(x + h.scaled(s)), f(x - h.scaled(s))
        exact = directional_derivative(f, x, h)
        scale = max(1.0, exact.norm())
        for p, q, d in zip(forward, backward, exact):
            assert np.linalg.norm((p - q) / (2 * s) - d, 2) <= 1e-6 * scale

    @given(
        seed=SEEDS,
        alpha=st.complex_numbers(
            max_magnitude=5.0, allow_nan=False, allow_infinity=False
        ),
    )
    @settings(max_examples=25, deadline=None)
    def test_linear_in_direction(self, seed, alpha):
        """Test f'(X)[H + K] = f'(X)[H] + f'(X)[K] and f'(X)[aH] = a f'(X)[H]."""
        rng = np.random.default_rng(seed)
        f = random_polynomial_map(rng, 2, degree=4)
        x = MatrixTuple.random(rng, 2, 3)
        h, k = MatrixTuple.random(rng, 2, 3), MatrixTuple.random(rng, 2, 3)
        dh = directional_derivative(f, x, h)
        dk = directional_derivative(f, x, k)
        scale = max(1.0, dh.norm(), dk.norm())

        added = directional_derivative(f, x, h + k)
        assert added.distance(dh + dk) <= 1e-10 * scale
        scaled = directional_derivative(f, x, h.scaled(alpha))
        assert scaled.distance(dh.scaled(alpha)) <= 1e-10 * scale * max(1.0, abs(alpha))


class TestDerivativeMatrix:
    """Tests for the derivative in the matrix-unit basis."""

    def test_linear_map(self, rng):
        """Test that a linear map gives M (x) I_{n^2}."""
        f = FreeMapHandle.from_strings(["2*x1 + i*x2", "x1 - x2"], 2)
        x = MatrixTuple.random(rng, 2, 2)
        dm = derivative_matrix(f, x)
        expected = np.kron(np.array([[2, 1j], [1, -1]]), np.eye(4))
        np.testing.assert_allclose(dm.matrix, expected, atol=1e-12)

    def test_apply_matches_directional(self, polynomial_pair_map, rng):
        """Test that the matrix reproduces f'(X)[H]."""
        x = MatrixTuple.random(rng, 2, 2, radius=0.5)
        h = MatrixTuple.random(rng, 2, 2)
        dm = derivative_matrix(polynomial_pair_map, x)
        expected = directional_derivative(polynomial_pair_map, x, h)
        assert dm.apply(h).distance(expected) < 1e-12

    def test_eigenvalues_need_square(self, rng):
        """Test that a map R^2 -> R^1 has no eigenvalues."""
        f = FreeMapHandle.from_strings(["x1*x2"], 2)
        dm = derivative_matrix(f, MatrixTuple.random(rng, 2, 2))
        with pytest.raises(DimensionError):
            dm.eigenvalues()
        assert len(dm.singular_values()) == 4

    def test_rank_report(self, square_map, rng):
        """Test full rank of the identity and rank loss of x^2 at 0."""
        identity_map = FreeMapHandle.identity(1)
        points = [MatrixTuple.random(rng, 1, 2)]
        assert derivative_rank_report(identity_map, points).full_rank
        report = derivative_rank_report(square_map, [MatrixTuple.zeros(1, 2)])
        assert report.verdict == Verdict.FAIL
        assert report.smallest_singular_values == [pytest.approx(0.0)]

    def test_automorphism_has_full_rank(self, disk, rng):
        """Test that f_theta'(X) is invertible at interior points."""
        points = random_members(disk, rng, 20, max_size=3)
        report = derivative_rank_report(mobius_map(0.7), points)
        assert report.full_rank
        assert min(report.smallest_singular_values) > 1e-8


class TestBlockFormula:
    """Tests for f([[X, tC], [0, Y]]) with C = X Gamma - Gamma Y."""

    @given(seed=SEEDS)
    @settings(max_examples=25, deadline=None)
    def test_polynomial_maps(self, seed):
        """Test the block formula on random polynomial maps."""
        rng = np.random.default_rng(seed)
        f = random_polynomial_map(rng, 2, degree=4)
        w = random_witness(rng, 2, 2, 3)
        assert check_block_formula(f, w).verdict == Verdict.PASS

    def test_rational_map(self, rng):
        """Test the block formula on a disk automorphism."""
        w = random_witness(rng, 1, 2, 2, scale=0.3)
        report = check_block_formula(mobius_map(0.7), w)
        assert report.verdict == Verdict.PASS
        assert report.max_deviation <= 1e-10

    def test_gamma_shape(self):
        """Test that Gamma must be n x m."""
        with pytest.raises(DimensionError):
            BlockWitness(
                MatrixTuple.zeros(1, 2), MatrixTuple.zeros(1, 3), np.ones((3, 2))
            )

    def test_arity_mismatch(self):
        """Test that X and Y must have the same arity."""
        with pytest.raises(ArityError):
            BlockWitness(
                MatrixTuple.zeros(1, 1), MatrixTuple.zeros(2, 1), np.ones((1, 1))
            )


class TestInjectivityProbe:
    """Tests for the intertwining probe."""

    def test_trivial_witness(self, disk):
        """Test X = Y = 0 with Gamma = 1."""
        zero = MatrixTuple.zeros(1, 1)
        identity_map = FreeMapHandle.identity(1)
        report = injectivity_probe(identity_map, disk, zero, zero, np.eye(1))
        assert report.verdict == Verdict.CONSISTENT
        assert report.t_max == 1.0
        assert report.constancy_deviation == pytest.approx(0.0)

    def test_automorphism_never_counterexample(self, disk, rng):
        """Test f_theta with the intertwining X [I 0] = [I 0] (X + X)."""
        f = mobius_map(1.1)
        for x in random_members(disk, rng, 10, max_size=2):
            n = x.size
            gamma = np.hstack([np.eye(n), np.zeros((n, n))])
            report = injectivity_probe(f, disk, x, x.direct_sum(x), gamma)
            assert report.verdict == Verdict.CONSISTENT

    @pytest.mark.slow
    def test_automorphisms_over_random_intertwiners(self, disk):
        """Test 500 random f_theta with unitary intertwiners up to size 4."""
        rng = np.random.default_rng(500)
        for trial in range(500):
            f = mobius_map(float(rng.uniform(-math.pi, math.pi)))
            x = random_member(disk, rng, int(rng.integers(1, 5)))
            u = random_unitary(rng, x.size)
            y, gamma = x.unitary_conjugate(u), u
            if trial % 2:
                # X [U 0] = [U 0] (U*XU + W)
                w = random_member(disk, rng, int(rng.integers(1, 5)))
                y = y.direct_sum(w)
                gamma = np.hstack([u, np.zeros((x.size, w.size))])
            report = injectivity_probe(f, disk, x, y, gamma)
            assert report.verdict == Verdict.CONSISTENT, f"trial {trial}"
            assert report.t_max == 1.0

    def test_hypothesis_not_met(self, disk):
        """Test that f(X)G != G f(Y) is inconclusive."""
        report = injectivity_probe(
            FreeMapHandle.identity(1),
            disk,
            MatrixTuple.scalars(0.1),
            MatrixTuple.scalars(0.2),
            np.eye(1),
        )
        assert report.verdict == Verdict.INCONCLUSIVE
        assert report.hypothesis_residual == pytest.approx(0.1)

    def test_square_is_not_injective(self, square_map):
        """Test that x^2 on the unit ball yields a counterexample candidate."""
        ball = EpsNeighborhood(1.0)
        report = injectivity_probe(
            square_map,
            ball,
            MatrixTuple.scalars(0.5),
            MatrixTuple.scalars(-0.5),
            np.eye(1),
        )
        assert report.verdict == Verdict.COUNTEREXAMPLE
        assert report.intertwining_residual == pytest.approx(1.0)
        assert 0 < report.t_max < 1
        assert report.constancy_deviation <= 1e-12
        assert len(report.t_grid) == 16

    def test_moving_image_is_inconclusive(self, disk, mocker):
        """Test that f(Z(t)) changing along the t-grid gives no verdict."""
        mocker.patch("freemaps.calculus._max_norm", return_value=0.5)
        zero = MatrixTuple.zeros(1, 1)
        identity_map = FreeMapHandle.identity(1)
        report = injectivity_probe(identity_map, disk, zero, zero, np.eye(1))
        assert report.verdict == Verdict.INCONCLUSIVE
        assert report.constancy_deviation == pytest.approx(0.5)
        assert "not constant" in report.notes[0]


class TestPropernessProbe:
    """Tests for the boundary-following probe."""

    def test_identity_is_proper(self, disk, rng):
        """Test that the identity sends the boundary to the boundary."""
        rays = [MatrixTuple.random(rng, 1, 2) for _ in range(4)]
        report = properness_probe(FreeMapHandle.identity(1), disk, disk, rays)
        assert report.verdict == Verdict.PASS
        assert report.max_terminal_gap <= 1e-6
        assert all(len(ray.radii) == 20 for ray in report.rays)

    def test_contraction_is_not_proper(self, disk):
        """Test that x/2 keeps the image away from the boundary."""
        f = FreeMapHandle.from_strings(["0.5*x1"], 1)
        report = properness_probe(f, disk, disk, [MatrixTuple.scalars(1.0)])
        assert report.verdict == Verdict.FAIL
        assert report.rays[0].terminal_gap > 0.1

    def test_ray_without_crossing(self):
        """Test that an unbounded ray is reported as an error."""
        half_plane = PencilDomain(TrulyLinearPencil((np.array([[1.0]]),)))
        report = properness_probe(
            FreeMapHandle.identity(1),
            half_plane,
            half_plane,
            [MatrixTuple.scalars(1.0)],
        )
        assert report.verdict == Verdict.FAIL
        assert report.rays[0].error == "no boundary crossing"

    @pytest.mark.slow
    def test_ellipse_quarter_turn(self, ellipse_model):
        """Test that b stops short of the ellipse boundary along the 4x4 shift."""
        ray = MatrixTuple.of(shift_matrix(4))
        dom = ellipse_model.domain
        report = properness_probe(b_series_map(ellipse_model), dom, dom, [ray])
        assert report.verdict == Verdict.FAIL
        assert report.rays[0].r_star == pytest.approx(1.00033, abs=1e-5)
        assert report.rays[0].terminal_gap == pytest.approx(0.0114903, abs=1e-5)

    def test_steps_positive(self, disk):
        """Test that at least one radius per ray is needed."""
        with pytest.raises(ValueError):
            properness_probe(FreeMapHandle.identity(1), disk, disk, [], steps=0)


class TestAmpliation:
    """Tests for the derivative spectrum at 0 across sizes."""

    @pytest.mark.parametrize("theta", [0.3, 0.7, math.pi / 2])
    @pytest.mark.parametrize("n", [2, 3])
    def test_mobius(self, theta, n):
        """Test that f_theta has spectrum e^{i theta} repeated n^2 times."""
        report = ampliation_check(mobius_map(theta), n)
        assert report.verdict == Verdict.PASS
        assert report.multiplicity == n * n
        assert report.unimodular
        re, im = report.base_spectrum[0]
        assert complex(re, im) == pytest.approx(np.exp(1j * theta), abs=1e-10)

    def test_polynomial_self_map(self, polynomial_pair_map):
        """Test a two-variable self-map whose linear part has eigenvalues 1 and 2."""
        report = ampliation_check(polynomial_pair_map, 3)
        assert report.verdict == Verdict.PASS
        assert not report.unimodular
        assert len(report.spectrum) == 18

    def test_requires_fixed_origin(self):
        """Test that f(0) != 0 is rejected."""
        with pytest.raises(PreconditionError):
            ampliation_check(FreeMapHandle.from_strings(["1 + x1"], 1), 2)

    def test_requires_self_map(self):
        """Test that arity and co-arity must agree."""
        with pytest.raises(ArityError):
            ampliation_check(FreeMapHandle.from_strings(["x1", "x1*x1"], 1), 2)

    def test_match_eigenvalues(self):
        """Test greedy matching ignores order."""
        assert match_eigenvalues([1, 2j, -1], [-1, 1, 2j + 1e-9]) == pytest.approx(1e-9)


class TestLinearity:
    """Tests for the homogeneity check on circular domains."""

    def test_linear_map(self, eps_ball, rng):
        """Test that a linear map commutes with rotations."""
        f = FreeMapHandle.from_strings(["2*x1 + i*x2", "x1 - x2"], 2)
        samples = random_members(eps_ball, rng, 10, max_size=3)
        report = circular_linearity_check(f, eps_ball, [0.4, 2.0], samples)
        assert report.verdict == Verdict.PASS
        assert report.skipped == 0

    def test_nonlinear_map(self, eps_ball, rng):
        """Test that a quadratic term breaks homogeneity."""
        f = FreeMapHandle.from_strings(["x1 + x1*x2", "x2"], 2)
        samples = random_members(eps_ball, rng, 5, max_size=2)
        report = circular_linearity_check(f, eps_ball, [0.4], samples)
        assert report.verdict == Verdict.FAIL

    def test_rotations_outside_skipped(self, disk):
        """Test that rotations leaving the disk domain are skipped."""
        report = circular_linearity_check(
            FreeMapHandle.identity(1), disk, [math.pi], [MatrixTuple.scalars(1.0)]
        )
        assert report.skipped == 1
        assert report.notes


class TestUniqueness:
    """Tests for the derivative-at-0 uniqueness check."""

    def test_same_map(self, rng):
        """Test two spellings of the identity."""
        f = FreeMapHandle.identity(1)
        g = FreeMapHandle.from_strings(["x1 + x1*x1 - x1*x1"], 1)
        samples = [MatrixTuple.random(rng, 1, 3, radius=0.5) for _ in range(5)]
        assert uniqueness_check(f, g, samples).verdict == Verdict.PASS

    def test_different_derivatives(self):
        """Test that different derivatives at 0 mean distinct maps."""
        f = FreeMapHandle.identity(1)
        g = FreeMapHandle.from_strings(["2*x1"], 1)
        report = uniqueness_check(f, g, [])
        assert report.verdict == Verdict.DISTINCT
        assert report.derivative_gap == pytest.approx(1.0)

    def test_same_derivative_different_maps(self, rng):
        """Test that equal derivatives alone do not make maps equal."""
        f = FreeMapHandle.identity(1)
        g = FreeMapHandle.from_strings(["x1 + x1*x1"], 1)
        samples = [MatrixTuple.random(rng, 1, 2, radius=0.5)]
        assert uniqueness_check(f, g, samples).verdict == Verdict.FAIL

    def test_fixed_origin_required(self):
        """Test that both maps must fix 0."""
        with pytest.raises(PreconditionError):
            uniqueness_check(
                FreeMapHandle.identity(1), FreeMapHandle.from_strings(["x1 + 1"], 1), []
            )
