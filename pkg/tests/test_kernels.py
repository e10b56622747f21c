"""
Tests for the kernels module.
"""

from unittest import TestCase

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fredholm_backstepping.exceptions import InvalidArgumentError
from fredholm_backstepping.grid import make_grid, quad
from fredholm_backstepping.kernels import (
    Constant,
    SampledKernel,
    Separable,
    Tabulated,
    VolterraMasked,
    XOnly,
    Zero,
    fattorini_counterexample,
    is_volterra,
    l2_norm,
    sample_kernel,
    small_gain,
)


class TestDescriptors(TestCase):
    """Test sampling of every kernel descriptor."""

    def setUp(self):
        self.grid = make_grid(1.0, 16)

    def test_zero(self):
        """Zero samples to zeros and is both x-only and Volterra."""
        sk = sample_kernel(Zero(), self.grid)
        self.assertEqual(sk.G.shape, (17, 17))
        self.assertFalse(np.any(sk.G))
        self.assertTrue(sk.x_only)
        self.assertTrue(sk.volterra)

    def test_constant(self):
        """Constant(c) fills the square and both traces with c."""
        sk = sample_kernel(Constant(c=0.5), self.grid)
        np.testing.assert_array_equal(sk.G, 0.5)
        np.testing.assert_array_equal(sk.diag_minus, 0.5)
        np.testing.assert_array_equal(sk.diag_plus, 0.5)
        self.assertTrue(sk.x_only)
        self.assertEqual(sk.label, "Constant(0.5)")

    def test_x_only_callable(self):
        """A callable x-only kernel repeats g(x_i) along row i."""
        sk = sample_kernel(XOnly(g=lambda x: x**2, name="square"), self.grid)
        np.testing.assert_allclose(sk.profile, self.grid.nodes**2)
        np.testing.assert_allclose(sk.G, np.repeat((self.grid.nodes**2)[:, None], 17, axis=1))
        self.assertEqual(sk.label, "square")

    def test_x_only_array(self):
        """Nodal values work as well as a callable."""
        values = np.arange(17.0)
        sk = sample_kernel(XOnly(g=values), self.grid)
        np.testing.assert_array_equal(sk.G[:, 5], values)

    def test_x_only_array_wrong_length(self):
        """Nodal values of the wrong length are refused."""
        with self.assertRaises(InvalidArgumentError):
            sample_kernel(XOnly(g=np.ones(5)), self.grid)

    def test_separable(self):
        """Separable(f, q) samples f(x) q(y)."""
        sk = sample_kernel(Separable(f=np.cos, q=lambda y: 1 + y), self.grid)
        expected = np.outer(np.cos(self.grid.nodes), 1 + self.grid.nodes)
        np.testing.assert_allclose(sk.G, expected)
        self.assertFalse(sk.x_only)

    def test_descriptor_is_callable(self):
        """Descriptors evaluate pointwise."""
        self.assertEqual(Constant(c=2.0)(0.3, 0.7), 2.0)
        self.assertAlmostEqual(Separable(f=np.exp, q=np.exp)(0.0, 1.0), np.e)

    def test_volterra_masked(self):
        """The mask keeps x > y and puts the inner value on the x > y trace only."""
        sk = sample_kernel(VolterraMasked(inner=Constant(c=2.0)), self.grid)
        i, j = np.indices(sk.G.shape)
        np.testing.assert_array_equal(sk.G[i > j], 2.0)
        np.testing.assert_array_equal(sk.G[i <= j], 0.0)
        np.testing.assert_array_equal(sk.diag_minus, 2.0)
        np.testing.assert_array_equal(sk.diag_plus, 0.0)
        self.assertTrue(sk.volterra)
        self.assertTrue(is_volterra(sk))


class TestTabulated(TestCase):
    """Test kernels given by their samples."""

    def setUp(self):
        self.grid = make_grid(1.0, 16)

    def test_shape_mismatch(self):
        """Values must cover the grid exactly."""
        with self.assertRaises(InvalidArgumentError):
            sample_kernel(Tabulated(values=np.ones((4, 4))), self.grid)

    def test_trace_shape_mismatch(self):
        """Traces must have one value per node."""
        with self.assertRaises(InvalidArgumentError):
            sample_kernel(Tabulated(values=np.ones((17, 17)), diag_minus=np.ones(3)), self.grid)

    def test_structure_detection(self):
        """Column-constant samples are x-only; strictly lower samples are Volterra."""
        x_only = np.repeat(np.arange(17.0)[:, None], 17, axis=1)
        self.assertTrue(sample_kernel(Tabulated(values=x_only), self.grid).x_only)
        lower = np.tril(np.ones((17, 17)), k=-1)
        sk = sample_kernel(Tabulated(values=lower), self.grid)
        self.assertTrue(sk.volterra)
        self.assertFalse(sk.x_only)

    def test_explicit_traces(self):
        """Given traces are kept instead of the diagonal samples."""
        sk = sample_kernel(
            Tabulated(values=np.zeros((17, 17)), diag_minus=np.ones(17), diag_plus=2 * np.ones(17)),
            self.grid,
        )
        np.testing.assert_array_equal(sk.diag_minus, 1.0)
        np.testing.assert_array_equal(sk.diag_plus, 2.0)
        np.testing.assert_array_equal(sk.diagonal_jump, -1.0)

    def test_rough_values_warn(self):
        """Huge finite differences away from the diagonal are reported."""
        values = np.zeros((17, 17))
        values[10, 2] = 1e6
        with self.assertLogs("fredholm_backstepping.kernels", level="WARNING") as logs:
            sample_kernel(Tabulated(values=values), self.grid)
        self.assertIn("H1 regularity", logs.output[0])

    def test_from_values(self):
        """SampledKernel.from_values wraps an array with diagonal traces."""
        values = np.arange(289.0).reshape(17, 17)
        sk = SampledKernel.from_values(values, self.grid, label="ramp")
        np.testing.assert_array_equal(sk.G, values)
        np.testing.assert_array_equal(sk.diag_minus, np.diagonal(values))
        self.assertEqual(sk.label, "ramp")


class TestSampledKernelAlgebra(TestCase):
    """Test the Nystrom matrix, the adjoint and scaling."""

    def setUp(self):
        self.grid = make_grid(1.0, 8)

    def test_weighted_constant(self):
        """For a continuous kernel the Nystrom matrix is G times the weights."""
        sk = sample_kernel(Constant(c=3.0), self.grid)
        np.testing.assert_allclose(sk.weighted(), 3.0 * np.outer(np.ones(9), self.grid.rule.weights))

    def test_weighted_diagonal_uses_traces(self):
        """Interior diagonal entries average the traces; the ends take one side."""
        sk = sample_kernel(VolterraMasked(inner=Constant(c=2.0)), self.grid)
        A = sk.weighted()
        h = self.grid.h
        self.assertAlmostEqual(A[0, 0], 0.0)
        self.assertAlmostEqual(A[4, 4], 1.0 * h)
        self.assertAlmostEqual(A[8, 8], 2.0 * h / 2)
        self.assertAlmostEqual(A[5, 2], 2.0 * h)

    def test_adjoint(self):
        """The adjoint conjugate-transposes the samples and swaps the traces."""
        sk = sample_kernel(VolterraMasked(inner=Constant(c=1 + 1j)), self.grid)
        adj = sk.adjoint()
        np.testing.assert_array_equal(adj.G, np.conj(sk.G.T))
        np.testing.assert_array_equal(adj.diag_minus, np.conj(sk.diag_plus))
        np.testing.assert_array_equal(adj.diag_plus, np.conj(sk.diag_minus))
        np.testing.assert_array_equal(adj.adjoint().G, sk.G)

    @given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
    def test_weighted_is_homogeneous(self, c):
        """scaled(c).weighted() = c * weighted()."""
        sk = sample_kernel(Separable(f=np.sin, q=np.exp), self.grid)
        np.testing.assert_allclose(sk.scaled(c).weighted(), c * sk.weighted(), atol=1e-12)


class TestNormsAndConditions(TestCase):
    """Test norms and the structural predicates."""

    def test_l2_norm_of_constant(self):
        """||c|| on the square [0, L]^2 is |c| L."""
        grid = make_grid(2.0, 32)
        self.assertAlmostEqual(l2_norm(sample_kernel(Constant(c=0.5j), grid)), 1.0, places=12)

    def test_small_gain(self):
        """||g|| < sqrt(2) / L decides the small-gain flag."""
        grid = make_grid(1.0, 32)
        self.assertTrue(small_gain(sample_kernel(Constant(c=0.5), grid)))
        self.assertFalse(small_gain(sample_kernel(Constant(c=2.0), grid)))

    def test_is_volterra_tolerance(self):
        """Small upper-triangle entries pass with a tolerance."""
        grid = make_grid(1.0, 8)
        values = np.tril(np.ones((9, 9)), k=-1)
        values[0, 5] = 1e-10
        sk = SampledKernel.from_values(values, grid)
        self.assertFalse(is_volterra(sk))
        self.assertTrue(is_volterra(sk, tol=1e-9))


class TestFattoriniCounterexample(TestCase):
    """Test the kernel for which the controllability criterion fails."""

    def test_invalid_parameters(self):
        """N must be a positive integer and L positive."""
        with self.assertRaises(InvalidArgumentError):
            fattorini_counterexample(1.0, 0, 1.0)
        with self.assertRaises(InvalidArgumentError):
            fattorini_counterexample(1.0, 1.5, 1.0)
        with self.assertRaises(InvalidArgumentError):
            fattorini_counterexample(1.0, 2, 0.0)

    def test_is_real_x_only(self):
        """The kernel is real and depends on x only."""
        grid = make_grid(1.0, 64)
        sk = sample_kernel(fattorini_counterexample(1.0, 2, 1.0), grid)
        self.assertTrue(sk.x_only)
        self.assertLess(np.abs(sk.G.imag).max(), 1e-15)

    @pytest.mark.unit
    def test_moment_identities(self):
        """At L = 1: int g = a0, int g cos(2 pi k x) = a0 and int g sin(2 pi k x) = 2 pi k."""
        grid = make_grid(1.0, 128)
        g = sample_kernel(fattorini_counterexample(0.7, 2, 1.0), grid).profile
        x = grid.nodes
        self.assertAlmostEqual(quad(g, grid.rule), 0.7, places=12)
        for k in (1, 2):
            self.assertAlmostEqual(quad(g * np.cos(2 * np.pi * k * x), grid.rule), 0.7, places=10)
            self.assertAlmostEqual(quad(g * np.sin(2 * np.pi * k * x), grid.rule), 2 * np.pi * k, places=10)
