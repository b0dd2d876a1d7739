"""
Unit tests for the self-similar profile solver.

The unscaled profile is Kummer's function M(-1/2, n/2, r^2/4), which
gives closed-form values for R and a1 to compare against.
"""
import unittest
import sys
import os

import numpy as np
from scipy import optimize, special

# Add the parent directory to the path so we can import the lab modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from core.errors import DomainError, ParameterError
from core.selfsim import (
    eval_profile,
    self_similar_radial,
    self_similar_U,
    shoot_rk45,
    solve_profile,
)


def kummer_profile(n):
    """(R, a1) from the closed form."""
    b = 0.5 * n
    f = lambda r: special.hyp1f1(-0.5, b, r * r / 4.0)
    grid = np.linspace(0.01, 10.0, 1000)
    values = f(grid)
    first = int(np.nonzero(values <= 0.0)[0][0])
    R = optimize.brentq(f, grid[first - 1], grid[first], xtol=1e-14, rtol=1e-14)
    slope = (-0.5 / b) * special.hyp1f1(0.5, b + 1.0, R * R / 4.0) * R / 2.0
    return R, -1.0 / slope


class TestSolveProfile(unittest.TestCase):
    """Test cases for solve_profile."""

    def setUp(self):
        """Solve the profiles for n = 1, 2, 3."""
        self.profiles = {n: solve_profile(n) for n in (1, 2, 3)}

    def test_against_closed_form(self):
        """Test R and a1 against the Kummer function."""
        for n, profile in self.profiles.items():
            R, a1 = kummer_profile(n)
            self.assertAlmostEqual(profile.support_radius, R, delta=1e-7, msg=f"n={n}")
            self.assertAlmostEqual(profile.peak, a1, delta=1e-7, msg=f"n={n}")

    def test_boundary_conditions(self):
        """Test f(R) = 0 and f'(R) = -1."""
        for profile in self.profiles.values():
            f_R, slope_R = profile.boundary_values()
            self.assertLess(abs(f_R), 1e-8)
            self.assertAlmostEqual(slope_R, -1.0, places=12)

    def test_monotone_and_positive(self):
        """Test that f decreases and stays positive on [0, R)."""
        for profile in self.profiles.values():
            self.assertTrue(profile.monotone)
            samples = profile.samples
            self.assertTrue(np.all(samples[:-1, 1] > 0.0))
            self.assertTrue(np.all(np.diff(samples[:, 1]) < 0.0))

    def test_ode_residual(self):
        """Test the interpolated ODE residual."""
        for profile in self.profiles.values():
            self.assertLess(profile.ode_residual_sup, 1e-5)

    def test_a1_a2_aliases(self):
        """Test that a1 is f(0) and a2 is R."""
        profile = self.profiles[2]
        self.assertEqual(profile.a1, profile.peak)
        self.assertEqual(profile.a2, profile.support_radius)
        self.assertEqual(profile.to_dict()["n"], 2)

    def test_shot_value_does_not_matter(self):
        """Test that the rescale removes the dependence on f(0)."""
        scaled = solve_profile(2, f0=3.0)
        self.assertAlmostEqual(scaled.support_radius, self.profiles[2].support_radius, delta=1e-7)
        self.assertAlmostEqual(scaled.peak, self.profiles[2].peak, delta=1e-7)

    def test_rk45_agrees(self):
        """Test that the independent RK45 shot agrees."""
        for n in (1, 2, 3):
            R, a1 = shoot_rk45(n)
            self.assertAlmostEqual(R, self.profiles[n].support_radius, delta=1e-6)
            self.assertAlmostEqual(a1, self.profiles[n].peak, delta=1e-6)

    def test_higher_dimensions(self):
        """Test that R grows with the dimension."""
        radii = [solve_profile(n).support_radius for n in (1, 2, 3, 4)]
        self.assertTrue(all(b > a for a, b in zip(radii, radii[1:])))

    def test_invalid_arguments(self):
        """Test the dimension and tolerance ranges."""
        with self.assertRaises(ParameterError):
            solve_profile(0)
        with self.assertRaises(ParameterError):
            solve_profile(2, tolerance=1e-3)
        with self.assertRaises(ParameterError):
            solve_profile(1.5)


class TestProfileEvaluation(unittest.TestCase):
    """Test cases for profile evaluation and the self-similar solution."""

    def setUp(self):
        """Set up the two-dimensional profile."""
        self.profile = solve_profile(2)

    def test_evaluate_against_closed_form(self):
        """Test interpolated values against the scaled Kummer function."""
        r = np.linspace(0.0, self.profile.support_radius, 57)
        expected = self.profile.peak * special.hyp1f1(-0.5, 1.0, r * r / 4.0)
        np.testing.assert_allclose(self.profile.evaluate(r), expected, atol=1e-8)

    def test_zero_outside_support(self):
        """Test that f vanishes beyond R."""
        R = self.profile.support_radius
        self.assertEqual(eval_profile(self.profile, R + 0.1), 0.0)
        self.assertEqual(self.profile.derivative(R + 1.0), 0.0)

    def test_negative_radius(self):
        """Test that negative radii raise DomainError."""
        with self.assertRaises(DomainError):
            self.profile.evaluate(-0.5)

    def test_derivative_at_origin(self):
        """Test f'(0) = 0."""
        self.assertAlmostEqual(self.profile.derivative(0.0), 0.0, places=10)

    def test_scaling_identity(self):
        """Test max U = a1 sqrt(T - t) and support a2 sqrt(T - t)."""
        T, t = 1.0, 0.75
        self.assertAlmostEqual(self_similar_radial(self.profile, 0.0, t, T), 0.5 * self.profile.a1)
        edge = 0.5 * self.profile.a2
        self.assertEqual(self_similar_radial(self.profile, edge * 1.01, t, T), 0.0)
        self.assertGreater(self_similar_radial(self.profile, edge * 0.99, t, T), 0.0)

    def test_self_similar_U_uses_norm(self):
        """Test that U depends on the point only through |x|."""
        a = self_similar_U(self.profile, [0.3, 0.4], 0.2, 1.0)
        b = self_similar_U(self.profile, [0.5, 0.0], 0.2, 1.0)
        self.assertAlmostEqual(a, b)
        many = self_similar_U(self.profile, np.array([[0.3, 0.4], [0.0, 0.0]]), 0.2, 1.0)
        self.assertEqual(many.shape, (2,))

    def test_extinction_and_after(self):
        """Test U = 0 at t = T and DomainError after it."""
        self.assertEqual(self_similar_radial(self.profile, 0.0, 1.0, 1.0), 0.0)
        with self.assertRaises(DomainError):
            self_similar_U(self.profile, [0.0, 0.0], 1.5, 1.0)


if __name__ == '__main__':
    unittest.main()
