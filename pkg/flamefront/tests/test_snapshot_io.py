"""
Unit tests for the snapshot file formats.
"""
import shutil
import tempfile
import unittest
import sys
import os
from pathlib import Path

import numpy as np

# Add the parent directory to the path so we can import the lab modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from core.errors import ParameterError
from core.grid import GridSpec, ScalarField
from core.radial_field import RadialField
from core.snapshot_io import (
    read_grid_text,
    read_snapshot,
    write_grid_text,
    write_snapshot,
)


class TestSnapshotIO(unittest.TestCase):
    """Test cases for writing and reading snapshots."""

    def setUp(self):
        """Set up a temporary directory and an asymmetric field."""
        self.directory = Path(tempfile.mkdtemp())
        grid = GridSpec(1.0, 17)
        rng = np.random.default_rng(7)
        values = rng.random(grid.shape) / 3.0
        values[0, :] = values[-1, :] = values[:, 0] = values[:, -1] = 0.0
        self.field = ScalarField(grid, values, 0.1234567890123)

    def tearDown(self):
        """Remove the temporary directory."""
        shutil.rmtree(self.directory)

    def test_text_layout(self):
        """Test the header line and that row j holds fixed-y values."""
        path = write_grid_text(self.field, self.directory / "snap.txt")
        lines = path.read_text().splitlines()
        self.assertTrue(lines[0].startswith("FLAMEGRID v1 nx=17 ny=17 h="))
        self.assertEqual(len(lines), 18)
        row = [float(value) for value in lines[5].split()]
        self.assertEqual(row, list(self.field.values[:, 4]))

    def test_text_reads_back_exactly(self):
        """Test that 17 significant digits preserve every value."""
        path = write_snapshot(self.field, self.directory / "snap.txt")
        restored = read_snapshot(path)
        self.assertTrue(np.array_equal(restored.values, self.field.values))
        self.assertEqual(restored.time, self.field.time)
        self.assertAlmostEqual(restored.grid.spacing, self.field.grid.spacing, places=15)

    def test_binary_reads_back_exactly(self):
        """Test the binary format and its suffix dispatch."""
        path = write_snapshot(self.field, self.directory / "snap.bin", binary=True)
        with path.open("rb") as handle:
            self.assertTrue(handle.readline().startswith(b"FLAMEGRID v1"))
        restored = read_snapshot(path)
        self.assertTrue(np.array_equal(restored.values, self.field.values))

    def test_radial_snapshot(self):
        """Test the radial format and its magic dispatch."""
        radial = RadialField.from_function(3, 1.5, 30, lambda r: np.maximum(1.0 - r, 0.0) / 7.0, 0.5)
        path = write_snapshot(radial, self.directory / "radial.txt", binary=True)
        restored = read_snapshot(path)
        self.assertIsInstance(restored, RadialField)
        self.assertEqual(restored.dimension, 3)
        self.assertEqual(restored.cells, 30)
        self.assertTrue(np.array_equal(restored.values, radial.values))

    def test_malformed_header(self):
        """Test that a file without the header is rejected."""
        path = self.directory / "bad.txt"
        path.write_text("0 0 0\n0 0 0\n")
        with self.assertRaises(ParameterError):
            read_grid_text(path)

    def test_truncated_body(self):
        """Test that a value count mismatch is rejected."""
        path = write_grid_text(self.field, self.directory / "snap.txt")
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with self.assertRaises(ParameterError):
            read_snapshot(path)
        binary = write_snapshot(self.field, self.directory / "snap.bin", binary=True)
        binary.write_bytes(binary.read_bytes()[:-8])
        with self.assertRaises(ParameterError):
            read_snapshot(binary)


if __name__ == '__main__':
    unittest.main()
