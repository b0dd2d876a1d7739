"""
Unit tests for the profile regression fixtures.
"""
import json
import shutil
import tempfile
import unittest
import sys
import os
from pathlib import Path

# Add the parent directory to the path so we can import the lab modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from core.errors import FixtureIntegrityError
from experiments.fixtures import (
    compare_with_fixtures,
    fixture_digest,
    kummer_payload,
    load_fixtures,
    write_fixtures,
)


class TestFixtures(unittest.TestCase):
    """Test cases for writing, loading and comparing fixtures."""

    def setUp(self):
        """Set up a fixtures file for n = 2."""
        self.directory = Path(tempfile.mkdtemp())
        self.path = write_fixtures(self.directory / "fixtures" / "profiles.json", (2,))

    def tearDown(self):
        """Remove the temporary directory."""
        shutil.rmtree(self.directory)

    def test_fresh_fixtures_pass(self):
        """Test that freshly written fixtures match a new solve."""
        fixtures = load_fixtures(self.path)
        self.assertEqual(list(fixtures), ["2"])
        comparisons = compare_with_fixtures(fixtures)
        self.assertEqual([c.quantity for c in comparisons], ["R", "a1"])
        self.assertTrue(all(c.passed for c in comparisons))

    def test_tampered_value(self):
        """Test that an edited value breaks the digest."""
        document = json.loads(self.path.read_text())
        document["fixtures"]["2"]["R"] += 1e-6
        self.path.write_text(json.dumps(document))
        with self.assertRaises(FixtureIntegrityError):
            load_fixtures(self.path)

    def test_unreadable_file(self):
        """Test that malformed and missing files are integrity errors."""
        self.path.write_text("{not json")
        with self.assertRaises(FixtureIntegrityError):
            load_fixtures(self.path)
        with self.assertRaises(FixtureIntegrityError):
            load_fixtures(self.directory / "missing.json")

    def test_digest_is_key_order_independent(self):
        """Test that the digest uses the canonical form."""
        a = {"2": {"R": 2.5, "a1": 0.9}, "1": {"R": 2.0, "a1": 1.0}}
        b = {"1": {"a1": 1.0, "R": 2.0}, "2": {"a1": 0.9, "R": 2.5}}
        self.assertEqual(fixture_digest(a), fixture_digest(b))
        self.assertEqual(len(fixture_digest(a)), 64)

    def test_closed_form_payload(self):
        """Test that solved profiles match the closed-form reference for n = 1..3."""
        comparisons = compare_with_fixtures(kummer_payload())
        self.assertEqual(len(comparisons), 6)
        for comparison in comparisons:
            self.assertTrue(comparison.passed, comparison)

    def test_wrong_expected_value_fails(self):
        """Test that a deviation beyond the tolerance is reported."""
        comparisons = compare_with_fixtures({"2": {"R": 1.0, "a1": 1.0}})
        self.assertFalse(comparisons[0].passed)
        self.assertEqual(comparisons[0].dimension, 2)


if __name__ == '__main__':
    unittest.main()
