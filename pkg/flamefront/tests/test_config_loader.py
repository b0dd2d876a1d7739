"""
Unit tests for run configuration parsing.
"""
import tempfile
import unittest
import sys
import os
from pathlib import Path

# Add the parent directory to the path so we can import the lab modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from core.errors import ConfigurationError
from input.config_loader import load_config, load_config_string

MINIMAL = """
[grid]
half_width = 2.5
cells_per_axis = 33

[solver]
eps = 0.1
"""


class TestConfigLoader(unittest.TestCase):
    """Test cases for load_config_string and load_config."""

    def test_defaults(self):
        """Test that omitted keys take their defaults."""
        config = load_config_string(MINIMAL)
        self.assertEqual(config.geometry, "cartesian")
        self.assertFalse(config.is_radial)
        self.assertAlmostEqual(config.extinction_threshold, 0.01)
        self.assertAlmostEqual(config.geometry_level, 0.01)
        self.assertEqual(config.radial_cells, 16)
        self.assertEqual(config.cfl_safety, 0.45)
        self.assertEqual(config.kernel_name, "smooth_bump")
        self.assertEqual(config.initial.cap_amplitude, 0.5)
        self.assertEqual(config.sqrt_window, (0.5, 0.95))
        self.assertAlmostEqual(config.interior_exponent, 2.0 / 3.0)
        self.assertEqual(config.grid.cells_per_axis, 33)

    def test_full_configuration(self):
        """Test every section with explicit values."""
        text = MINIMAL + """
[kernel]
name = poly_bump

[initial]
perturbation_amplitude = 0.1
angular_mode = 6

[record]
times = 0.1, 0.05
dyadic = yes
dyadic_levels = 5

[outputs]
directory = results
snapshots = binary
render = true

[analysis]
interior_exponent = 1/2
sqrt_window = 0.4, 0.9
radial_comparison = on
"""
        config = load_config_string(text)
        self.assertEqual(config.kernel().name, "poly_bump")
        self.assertEqual(config.initial.angular_mode, 6)
        self.assertEqual(config.record_times, (0.1, 0.05))
        self.assertEqual(config.solver_params().record_times, (0.05, 0.1))
        self.assertTrue(config.dyadic)
        self.assertEqual(config.snapshot_format, "binary")
        self.assertTrue(config.render)
        self.assertEqual(config.interior_exponent, 0.5)
        self.assertTrue(config.radial_comparison)

    def test_unknown_key(self):
        """Test that unknown keys fail with their name."""
        with self.assertRaises(ConfigurationError) as context:
            load_config_string(MINIMAL + "tolerance = 3\n")
        self.assertEqual(context.exception.key, "solver.tolerance")

    def test_unknown_section(self):
        """Test that unknown sections fail."""
        with self.assertRaises(ConfigurationError) as context:
            load_config_string(MINIMAL + "\n[plots]\ncolour = red\n")
        self.assertEqual(context.exception.key, "plots")

    def test_missing_required_key(self):
        """Test that eps is required."""
        with self.assertRaises(ConfigurationError) as context:
            load_config_string("[grid]\nhalf_width = 2.5\ncells_per_axis = 33\n")
        self.assertEqual(context.exception.key, "solver.eps")

    def test_invalid_values(self):
        """Test parse failures and out-of-range values."""
        with self.assertRaises(ConfigurationError) as context:
            load_config_string(MINIMAL + "cfl_safety = fast\n")
        self.assertEqual(context.exception.key, "solver.cfl_safety")
        with self.assertRaises(ConfigurationError):
            load_config_string(MINIMAL + "cfl_safety = 1.5\n")
        with self.assertRaises(ConfigurationError):
            load_config_string(MINIMAL + "geometry = spherical\n")
        with self.assertRaises(ConfigurationError):
            load_config_string(MINIMAL + "geometry = radial\ndimension = 7\n")
        with self.assertRaises(ConfigurationError):
            load_config_string(MINIMAL + "\n[initial]\ncap_amplitude = 0.8\n")

    def test_syntax_error(self):
        """Test that malformed files are configuration errors."""
        with self.assertRaises(ConfigurationError):
            load_config_string("eps = 0.1\n")

    def test_with_override(self):
        """Test that overrides re-derive dependent defaults."""
        config = load_config_string(MINIMAL)
        finer = config.with_override("eps", 0.05)
        self.assertEqual(finer.eps, 0.05)
        self.assertAlmostEqual(finer.extinction_threshold, 0.005)
        self.assertEqual(config.with_override("grid", 41).radial_cells, 20)
        self.assertEqual(config.with_override("alpha", 0.2).initial.perturbation_amplitude, 0.2)
        with self.assertRaises(ConfigurationError):
            config.with_override("cfl", 0.3)

    def test_resolved_metadata(self):
        """Test that resolved values include the derived defaults."""
        config = load_config_string(MINIMAL)
        self.assertAlmostEqual(config.resolved["solver"]["extinction_threshold"], 0.01)
        self.assertEqual(config.resolved["record"]["times"], [])

    def test_load_config_file(self):
        """Test reading from disk and a missing file."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.cfg"
            path.write_text(MINIMAL)
            config = load_config(path)
            self.assertEqual(config.source, str(path))
            with self.assertRaises(ConfigurationError):
                load_config(Path(tmp) / "missing.cfg")


if __name__ == '__main__':
    unittest.main()
