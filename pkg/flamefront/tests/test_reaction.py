"""
Unit tests for the reaction kernels.
"""
import unittest
import sys
import os

import numpy as np
from scipy import integrate

# Add the parent directory to the path so we can import the lab modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from core.errors import ParameterError
from core.reaction import KERNELS, BetaKernel, make_kernel


class TestBetaKernel(unittest.TestCase):
    """Test cases for the BetaKernel class."""

    def setUp(self):
        """Set up the two registered kernels."""
        self.kernels = [make_kernel(name) for name in sorted(KERNELS)]

    def test_mass_is_one_half(self):
        """Test that every kernel integrates to 1/2."""
        for kernel in self.kernels:
            mass, _ = integrate.quad(kernel.beta, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)
            self.assertAlmostEqual(mass, 0.5, places=9, msg=kernel.name)

    def test_support_is_unit_interval(self):
        """Test that beta vanishes outside (0, 1) and is positive inside."""
        for kernel in self.kernels:
            self.assertEqual(kernel.beta(-0.1), 0.0)
            self.assertEqual(kernel.beta(0.0), 0.0)
            self.assertEqual(kernel.beta(1.0), 0.0)
            self.assertEqual(kernel.beta(2.0), 0.0)
            self.assertGreater(kernel.beta(0.5), 0.0)

    def test_derivative_bound_dominates_samples(self):
        """Test that sup|beta'| is at least every sampled |beta'|."""
        s = np.linspace(0.001, 0.999, 997)
        for kernel in self.kernels:
            sampled = float(np.abs(kernel.beta_prime_array(s)).max())
            self.assertGreater(kernel.derivative_bound(), 0.0)
            self.assertGreaterEqual(kernel.derivative_bound(), sampled * (1.0 - 1e-12))

    def test_poly_bump_derivative_bound(self):
        """Test sup|beta'| of 30 s^2 (1-s)^2 c' against its closed form."""
        kernel = make_kernel("poly_bump")
        # c' = 1/2 because the unnormalised shape has unit mass
        self.assertAlmostEqual(kernel.normalization, 0.5, places=10)
        s_star = 0.5 - 0.5 / np.sqrt(3.0)
        exact = 0.5 * 60.0 * s_star * (1.0 - s_star) * (1.0 - 2.0 * s_star)
        self.assertAlmostEqual(kernel.derivative_bound(), exact, places=8)

    def test_reaction_sink_scaling(self):
        """Test that the sink is (1/eps) beta(u/eps)."""
        kernel = make_kernel("smooth_bump")
        self.assertAlmostEqual(kernel.reaction_sink(0.05, 0.1), kernel.beta(0.5) / 0.1)
        self.assertEqual(kernel.reaction_sink(0.2, 0.1), 0.0)
        sink = kernel.reaction_sink_array(np.array([0.0, 0.05, 0.2]), 0.1)
        np.testing.assert_allclose(sink, [0.0, kernel.beta(0.5) / 0.1, 0.0])

    def test_reaction_sink_rejects_eps(self):
        """Test that eps must be positive."""
        kernel = make_kernel("smooth_bump")
        with self.assertRaises(ParameterError):
            kernel.reaction_sink(0.1, 0.0)
        with self.assertRaises(ParameterError):
            kernel.reaction_sink_array(np.zeros(3), -1.0)

    def test_make_kernel_shares_instances(self):
        """Test that kernels are cached by name."""
        self.assertIs(make_kernel("smooth_bump"), make_kernel("smooth_bump"))

    def test_unknown_kernel(self):
        """Test that unknown names raise ParameterError."""
        with self.assertRaises(ParameterError):
            make_kernel("gaussian")

    def test_massless_shape_rejected(self):
        """Test that a shape without mass cannot be normalised."""
        zero = lambda s: np.zeros_like(np.asarray(s, dtype=float))
        with self.assertRaises(ParameterError):
            BetaKernel("zero", zero, zero)


if __name__ == '__main__':
    unittest.main()
