"""
Unit tests for the command line entry point.
"""
import ast
import json
import shutil
import tempfile
import unittest
from unittest import mock
import sys
import os
from pathlib import Path

# Set SDL video driver to dummy for headless testing
os.environ['SDL_VIDEODRIVER'] = 'dummy'

# Add the parent directory to the path so we can import the lab modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import main
from experiments.acceptance import QUICK, AcceptanceSuite
from experiments.fixtures import kummer_payload, load_fixtures


class TestMain(unittest.TestCase):
    """Test cases for argument handling and exit codes."""

    def setUp(self):
        """Set up a temporary working directory."""
        self.directory = Path(tempfile.mkdtemp())

    def tearDown(self):
        """Remove the temporary directory."""
        shutil.rmtree(self.directory)

    def test_profile_command(self):
        """Test that profile writes one record per dimension."""
        out = self.directory / "profiles"
        code = main.main(["-q", "profile", "--n", "1,2", "--out", str(out), "--csv"])
        self.assertEqual(code, main.EXIT_OK)
        document = json.loads((out / "profiles.json").read_text())
        self.assertEqual([p["n"] for p in document["profiles"]], [1, 2])
        header = (out / "profile_n2.csv").read_text().splitlines()[0]
        self.assertEqual(header, "r,f,fp")

    def test_profile_without_dimensions(self):
        """Test that an empty dimension list is a usage error."""
        code = main.main(["-q", "profile", "--n", "", "--out", str(self.directory)])
        self.assertEqual(code, main.EXIT_USAGE)

    def test_no_arguments(self):
        """Test that a missing subcommand is a usage error."""
        self.assertEqual(main.main([]), main.EXIT_USAGE)

    def test_help(self):
        """Test that --help exits cleanly."""
        self.assertEqual(main.main(["--help"]), main.EXIT_OK)

    def test_missing_config(self):
        """Test that an unreadable configuration is a usage error."""
        code = main.main(["-q", "run", "--config", str(self.directory / "missing.cfg")])
        self.assertEqual(code, main.EXIT_USAGE)

    def test_invalid_config_key(self):
        """Test that an unknown key is a usage error."""
        path = self.directory / "bad.cfg"
        path.write_text("[grid]\nhalf_width = 2.5\ncells_per_axis = 33\n[solver]\neps = 0.1\nspeed = 3\n")
        self.assertEqual(main.cmd_run(path), main.EXIT_USAGE)

    def test_sweep_without_values(self):
        """Test that an empty value list is a usage error."""
        path = self.directory / "run.cfg"
        path.write_text("[grid]\nhalf_width = 2.5\ncells_per_axis = 33\n[solver]\neps = 0.1\n")
        code = main.main(["-q", "sweep", "--config", str(path), "--axis", "eps", "--values", " "])
        self.assertEqual(code, main.EXIT_USAGE)

    def test_run_not_extinct(self):
        """Test that a run cut off by max_steps exits with 3."""
        path = self.directory / "run.cfg"
        path.write_text(
            "[grid]\nhalf_width = 2.5\ncells_per_axis = 33\n"
            "[solver]\neps = 0.1\nmax_steps = 20\n"
            "[outputs]\nsnapshots = none\n"
        )
        code = main.main(["-q", "run", "--config", str(path), "--out", str(self.directory / "out")])
        self.assertEqual(code, main.EXIT_NOT_EXTINCT)
        self.assertTrue((self.directory / "out" / "analysis.json").exists())

    def test_profile_matches_closed_form_fixtures(self):
        """Test profile output for n = 1, 2 against the Kummer closed form to 1e-8."""
        out = self.directory / "profiles"
        fixtures_path = self.directory / "written" / "profiles.json"
        code = main.main(["-q", "profile", "--n", "1,2", "--out", str(out), "--write-fixtures", str(fixtures_path)])
        self.assertEqual(code, main.EXIT_OK)
        reference = kummer_payload((1, 2))
        document = json.loads((out / "profiles.json").read_text())
        for record in document["profiles"]:
            expected = reference[str(record["n"])]
            self.assertAlmostEqual(record["R"], expected["R"], delta=1e-8)
            self.assertAlmostEqual(record["a1"], expected["a1"], delta=1e-8)
        written = load_fixtures(fixtures_path)
        for n in ("1", "2"):
            self.assertAlmostEqual(written[n]["R"], reference[n]["R"], delta=1e-8)
            self.assertAlmostEqual(written[n]["a1"], reference[n]["a1"], delta=1e-8)

    def test_verify_without_fixtures_writes_nothing(self):
        """Test that a missing fixtures file falls back to the closed form without creating it."""
        path = self.directory / "absent" / "profiles.json"
        with mock.patch("main.run_acceptance", return_value=AcceptanceSuite(QUICK)):
            code = main.cmd_verify("quick", path)
        self.assertEqual(code, main.EXIT_OK)
        self.assertFalse(path.exists())
        self.assertFalse(path.parent.exists())

    def test_verify_corrupted_fixtures(self):
        """Test that a corrupted fixtures file stops verify with 6."""
        path = self.directory / "profiles.json"
        path.write_text(json.dumps({"fixtures": {"2": {"R": 2.5, "a1": 1.0}}, "sha256": "0" * 64}))
        self.assertEqual(main.cmd_verify("quick", path), main.EXIT_FIXTURES)

    def test_default_jobs(self):
        """Test the FLAMEFRONT_JOBS environment variable."""
        previous = os.environ.get("FLAMEFRONT_JOBS")
        try:
            os.environ["FLAMEFRONT_JOBS"] = "3"
            self.assertEqual(main.default_jobs(), 3)
            os.environ["FLAMEFRONT_JOBS"] = "many"
            self.assertEqual(main.default_jobs(), 1)
        finally:
            if previous is None:
                os.environ.pop("FLAMEFRONT_JOBS", None)
            else:
                os.environ["FLAMEFRONT_JOBS"] = previous


class TestImportStyle(unittest.TestCase):
    """Test cases for the import style of the application modules."""

    def test_no_relative_imports(self):
        """Test that every module imports lab modules absolutely."""
        root = Path(__file__).resolve().parent.parent
        offenders = []
        for path in sorted(root.rglob("*.py")):
            tree = ast.parse(path.read_text(encoding="utf-8"))
            for node in ast.walk(tree):
                if isinstance(node, ast.ImportFrom) and node.level > 0:
                    offenders.append(f"{path.relative_to(root)}:{node.lineno}")
        self.assertEqual(offenders, [])


if __name__ == '__main__':
    unittest.main()
