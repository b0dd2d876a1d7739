"""
Unit tests for free boundary geometry and radial minorants.
"""
import unittest
import sys
import os

import numpy as np

# Add the parent directory to the path so we can import the lab modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from analysis.geometry import (
    CSV_COLUMNS,
    angular_sample_count,
    boundary_geometry,
    circle_values,
    radial_geometry,
    radial_minorant,
)
from core.errors import ParameterError
from core.grid import GridSpec, ScalarField
from core.radial_field import RadialField
from experiments.acceptance import brute_force_minorant, brute_force_radii


class TestBoundaryGeometry(unittest.TestCase):
    """Test cases for boundary_geometry."""

    def setUp(self):
        """Set up a disc of radius 0.5 and an ellipse."""
        self.grid = GridSpec(1.0, 41)
        self.disc = ScalarField.from_function(
            self.grid, lambda x, y: np.maximum(0.5 - np.hypot(x, y), 0.0)
        )
        self.ellipse = ScalarField.from_function(
            self.grid, lambda x, y: np.maximum(1.0 - (x / 0.7) ** 2 - (y / 0.35) ** 2, 0.0)
        )

    def test_disc_radii(self):
        """Test that a disc has matching radii within a cell."""
        h = self.grid.spacing
        geometry = boundary_geometry(self.disc, 0.01)
        self.assertFalse(geometry.extinct)
        self.assertLessEqual(geometry.r_in, geometry.r_out)
        self.assertAlmostEqual(geometry.r_out, 0.49, delta=h)
        self.assertAlmostEqual(geometry.r_in, 0.49, delta=h)
        self.assertLess(geometry.flatness, 2.0 * h / 0.49)

    def test_ellipse_flatness(self):
        """Test that an ellipse with semi-axes 0.7 and 0.35 is about half flat."""
        geometry = boundary_geometry(self.ellipse, 1e-6)
        h = self.grid.spacing
        self.assertAlmostEqual(geometry.r_in, 0.35, delta=h)
        self.assertAlmostEqual(geometry.r_out, 0.7, delta=h)
        self.assertAlmostEqual(geometry.flatness, 0.5, delta=0.1)

    def test_matches_brute_force(self):
        """Test the vectorised radii against a straight loop."""
        for level in (0.001, 0.05, 0.2):
            geometry = boundary_geometry(self.ellipse, level)
            r_in, r_out = brute_force_radii(self.ellipse, level)
            self.assertEqual(geometry.r_in, r_in)
            self.assertEqual(geometry.r_out, r_out)

    def test_extinct_set(self):
        """Test that an empty positivity set is reported extinct."""
        geometry = boundary_geometry(self.disc, 1.0)
        self.assertTrue(geometry.extinct)
        self.assertEqual(geometry.r_out, 0.0)
        self.assertEqual(geometry.flatness, 0.0)

    def test_level_must_be_positive(self):
        """Test that a zero level is rejected."""
        with self.assertRaises(ParameterError):
            boundary_geometry(self.disc, 0.0)

    def test_to_row(self):
        """Test the CSV row layout."""
        row = boundary_geometry(self.disc, 0.01).to_row()
        self.assertEqual(tuple(row), CSV_COLUMNS)
        self.assertEqual(row["extinct"], 0)
        self.assertEqual(row["t"], 0.0)

    def test_radial_geometry(self):
        """Test the radial variant on a cap with support radius 1."""
        cap = RadialField.from_function(2, 2.0, 40, lambda r: 0.5 * np.maximum(1.0 - r ** 2, 0.0))
        geometry = radial_geometry(cap, 0.01)
        self.assertAlmostEqual(geometry.r_in, 0.975)
        self.assertAlmostEqual(geometry.r_out, 0.975)
        self.assertAlmostEqual(geometry.flatness, 0.0, places=12)


class TestRadialMinorant(unittest.TestCase):
    """Test cases for radial_minorant and circle sampling."""

    def setUp(self):
        """Set up a radial cap."""
        self.grid = GridSpec(1.5, 41)
        self.cap = ScalarField.from_function(
            self.grid, lambda x, y: np.maximum(1.0 - x ** 2 - y ** 2, 0.0)
        )

    def test_angular_sample_count(self):
        """Test the minimum count and the one-per-cell growth."""
        self.assertEqual(angular_sample_count(0.1, 0.1), 64)
        self.assertEqual(angular_sample_count(1.0, 0.01), 629)

    def test_circle_values(self):
        """Test circle samples of a linear function."""
        ramp = ScalarField.from_function(self.grid, lambda x, y: x)
        values = circle_values(ramp, 0.5, 64)
        self.assertAlmostEqual(float(values.max()), 0.5)
        self.assertAlmostEqual(float(values.min()), -0.5)

    def test_minorant_of_radial_field(self):
        """Test that the minorant of a radial cap is the cap itself."""
        minorant = radial_minorant(self.cap)
        self.assertEqual(minorant.dimension, 2)
        self.assertAlmostEqual(minorant.spacing, self.grid.spacing)
        r = minorant.radii()
        inner = r <= 0.8
        np.testing.assert_allclose(minorant.values[inner], 1.0 - r[inner] ** 2, atol=0.01)

    def test_minorant_is_below_field(self):
        """Test that the minorant lies below every circle sample."""
        bumpy = ScalarField.from_function(
            self.grid,
            lambda x, y: np.maximum(1.0 - x ** 2 - y ** 2, 0.0) * (1.0 + 0.2 * np.cos(3.0 * np.arctan2(y, x))),
        )
        minorant = radial_minorant(bumpy)
        for j in (3, 6, 9):
            r = minorant.radii()[j]
            samples = circle_values(bumpy, r, angular_sample_count(r, self.grid.spacing))
            self.assertAlmostEqual(minorant.values[j], float(samples.min()))

    def test_matches_brute_force(self):
        """Test the vectorised minorant against explicit interpolation."""
        minorant = radial_minorant(self.cap)
        expected = brute_force_minorant(self.cap, minorant.radii())
        np.testing.assert_allclose(minorant.values, expected, atol=1e-12)

    def test_too_few_samples(self):
        """Test that fewer than 64 angles are rejected."""
        with self.assertRaises(ParameterError):
            radial_minorant(self.cap, radial_samples=32)


if __name__ == '__main__':
    unittest.main()
