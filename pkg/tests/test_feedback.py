"""
Tests for the feedback module.
"""

from unittest import TestCase

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fredholm_backstepping.exceptions import InvalidArgumentError, SingularTransformError
from fredholm_backstepping.feedback import (
    FeedbackLaw,
    FredholmOp,
    assemble_K,
    feedback_kernel_h,
    h_equation_residual,
    invertibility,
    transform_apply,
    transform_invert,
)
from fredholm_backstepping.grid import l2_norm_1d, make_grid
from fredholm_backstepping.kernels import (
    Constant,
    SampledKernel,
    VolterraMasked,
    Zero,
    sample_kernel,
)
from tests.utils import smooth_kernel_values, smooth_state, synthesized


class TestAssembleK(TestCase):
    """Test the Nystrom matrix of the transformation."""

    def setUp(self):
        self.grid = make_grid(1.0, 16)

    def test_zero_kernel(self):
        op = assemble_K(sample_kernel(Zero(), self.grid))
        self.assertIsInstance(op, FredholmOp)
        np.testing.assert_array_equal(op.Kmat, 0.0)
        np.testing.assert_array_equal(op.matrix, np.eye(17))
        self.assertAlmostEqual(op.sigma_min, 1.0)

    def test_raw_array(self):
        """Arrays are wrapped with their diagonal as both traces."""
        values = smooth_kernel_values(self.grid)
        op = assemble_K(values, self.grid)
        np.testing.assert_allclose(op.Kmat, values * self.grid.rule.weights[None, :])

    def test_raw_array_needs_grid(self):
        with self.assertRaises(InvalidArgumentError):
            assemble_K(np.zeros((17, 17)))
        with self.assertRaises(InvalidArgumentError):
            assemble_K(np.zeros((5, 5)), self.grid)

    def test_grid_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            assemble_K(sample_kernel(Zero(), self.grid), make_grid(1.0, 32))

    def test_transpose_conjugate(self):
        """transpose_conjugate builds K from conj(k*(y, x)) with swapped traces."""
        sk = sample_kernel(VolterraMasked(inner=Constant(c=1 + 2j)), self.grid)
        np.testing.assert_array_equal(
            assemble_K(sk, transpose_conjugate=True).Kmat, assemble_K(sk.adjoint()).Kmat
        )

    def test_synthesized_last_row_vanishes(self):
        """k*(L, .) = 0 leaves the row x = L of K empty."""
        _, synth = synthesized(0.5, 64, 8)
        np.testing.assert_array_equal(assemble_K(synth).Kmat[-1], 0.0)


class TestInvertibility(TestCase):
    """Test the sigma_min check on Id - K."""

    def test_rank_one_ones_is_singular(self):
        """k = 1 on [0, 1] makes Id - K singular (the constant function is in its kernel)."""
        op = assemble_K(sample_kernel(Constant(c=1.0), make_grid(1.0, 64)))
        report = invertibility(op)
        self.assertLessEqual(report.sigma_min, 0.05)
        self.assertFalse(report.invertible)

    def test_small_gain_is_invertible(self):
        op = assemble_K(sample_kernel(Constant(c=0.5), make_grid(1.0, 64)))
        report = invertibility(op)
        self.assertTrue(report.invertible)
        self.assertGreater(report.sigma_min, 0.45)
        self.assertAlmostEqual(report.tol, 1e-6 * (1 + op.norm))

    def test_volterra_is_invertible(self):
        """Volterra kernels never make Id - K singular, whatever their size."""
        op = assemble_K(sample_kernel(VolterraMasked(inner=Constant(c=2.0)), make_grid(1.0, 32)))
        self.assertTrue(invertibility(op).invertible)

    def test_explicit_tolerance(self):
        op = assemble_K(sample_kernel(Constant(c=0.5), make_grid(1.0, 16)))
        self.assertFalse(invertibility(op, tol=2.0).invertible)

    def test_near_singular_warns(self):
        """sigma_min within three decades of the tolerance is reported."""
        op = assemble_K(sample_kernel(Constant(c=1 - 1e-4), make_grid(1.0, 32)))
        with self.assertLogs("fredholm_backstepping.feedback", level="WARNING"):
            report = invertibility(op)
        self.assertTrue(report.invertible)


class TestFeedbackKernel(TestCase):
    """Test the solve for h and the feedback functional."""

    def test_zero_kernel(self):
        grid = make_grid(1.0, 16)
        law = feedback_kernel_h(sample_kernel(Zero(), grid))
        np.testing.assert_array_equal(law.hrow, 0.0)
        self.assertEqual(law.apply(np.ones(17)), 0.0)
        self.assertEqual(h_equation_residual(law, sample_kernel(Zero(), grid)), 0.0)

    def test_singular_transform_is_refused(self):
        """The error carries sigma_min."""
        grid = make_grid(1.0, 64)
        with self.assertRaises(SingularTransformError) as ctx:
            feedback_kernel_h(sample_kernel(Constant(c=1.0), grid))
        self.assertLessEqual(ctx.exception.sigma_min, 0.05)

    def test_neumann_series_is_second_order(self):
        """For k = eps k1, h(L, .) + k(L, .) is O(eps^2)."""
        grid = make_grid(1.0, 64)
        base = smooth_kernel_values(grid)
        deviations = []
        for eps in (0.1, 0.05):
            kstar = SampledKernel.from_values(eps * base, grid)
            law = feedback_kernel_h(kstar)
            first_order = -kstar.adjoint().G[-1]
            deviations.append(l2_norm_1d(law.hrow - first_order, grid.rule))
        ratio = deviations[0] / deviations[1]
        self.assertGreater(ratio, 3.5)
        self.assertLess(ratio, 4.5)

    def test_law_matches_weights(self):
        _, synth = synthesized(0.5, 64, 8)
        law = feedback_kernel_h(synth)
        np.testing.assert_array_equal(law.gamma_vector, law.hrow * synth.grid.rule.weights)
        self.assertAlmostEqual(law.sigma_min, assemble_K(synth, transpose_conjugate=True).sigma_min)

    def test_cauchy_schwarz_bound(self):
        """|Gamma u| <= ||h(L, .)|| ||u||."""
        sk, synth = synthesized(0.5, 64, 8)
        law = feedback_kernel_h(synth)
        for seed in range(5):
            u = smooth_state(sk.grid, seed)
            bound = l2_norm_1d(law.hrow, sk.grid.rule) * l2_norm_1d(u, sk.grid.rule)
            self.assertLessEqual(abs(law.apply(u)), bound * (1 + 1e-12))

    def test_apply_jump_correction(self):
        """The jump term removes half a cell of h at the jump node."""
        grid = make_grid(1.0, 8)
        hrow = np.linspace(1, 2, 9) + 0j
        law = FeedbackLaw(hrow=hrow, gamma_vector=hrow * grid.rule.weights, grid=grid)
        u = np.ones(9)
        self.assertAlmostEqual(law.apply(u, 3, 2.0), law.apply(u) - grid.h * hrow[3])
        self.assertEqual(law.apply(u, 0, 2.0), law.apply(u))

    def test_zero_law(self):
        law = FeedbackLaw.zero(make_grid(1.0, 8))
        self.assertEqual(law.apply(np.arange(9.0)), 0.0)
        with self.assertRaises(InvalidArgumentError):
            h_equation_residual(law, sample_kernel(Zero(), make_grid(1.0, 8)))

    def test_h_residual_separates_solutions_from_noise(self):
        """The synthesized h satisfies its equation far better than a random field."""
        sk, synth = synthesized(0.5, 64, 8)
        law = feedback_kernel_h(synth)
        rng = np.random.default_rng(5)
        noise = rng.normal(size=(65, 65))
        self.assertGreater(h_equation_residual(noise, sk), 10 * h_equation_residual(law, sk))

    @pytest.mark.slow
    def test_h_residual_drops_under_refinement(self):
        """Doubling n and N at least halves the h-equation residual."""
        residuals = []
        for n, N in ((128, 16), (256, 32)):
            sk, synth = synthesized(0.5, n, N)
            residuals.append(h_equation_residual(feedback_kernel_h(synth), sk))
        self.assertGreaterEqual(residuals[0] / residuals[1], 2)


class TestTransform(TestCase):
    """Test u = (Id - K) w and its inverse."""

    def setUp(self):
        self.grid = make_grid(1.0, 32)
        self.op = assemble_K(smooth_kernel_values(self.grid, 0.5), self.grid)

    def test_round_trip(self):
        w = smooth_state(self.grid, 2)
        np.testing.assert_allclose(transform_invert(self.op, transform_apply(self.op, w)), w, atol=1e-12)

    def test_jump_correction(self):
        """A jump across an interior node takes half the column away."""
        op = assemble_K(sample_kernel(Constant(c=1.0), self.grid))
        u = transform_apply(op, np.zeros(33), jump_node=3, jump=2.0)
        np.testing.assert_allclose(u, self.grid.h)

    def test_singular_inverse_is_refused(self):
        op = assemble_K(sample_kernel(Constant(c=1.0), self.grid))
        with self.assertRaises(SingularTransformError):
            transform_invert(op, np.ones(33))

    def test_shape_errors(self):
        with self.assertRaises(InvalidArgumentError):
            transform_apply(self.op, np.zeros(4))
        with self.assertRaises(InvalidArgumentError):
            transform_invert(self.op, np.zeros(4))

    @given(
        st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
        st.integers(min_value=0, max_value=1000),
    )
    def test_apply_is_linear(self, a, seed):
        rng = np.random.default_rng(seed)
        w, v = rng.normal(size=(2, 33))
        left = transform_apply(self.op, a * w + v)
        right = a * transform_apply(self.op, w) + transform_apply(self.op, v)
        np.testing.assert_allclose(left, right, atol=1e-10)
