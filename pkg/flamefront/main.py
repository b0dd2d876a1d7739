#!/usr/bin/env python3
"""
Main entry point for the flame front laboratory.

Subcommands:
    profile   solve self-similar profiles and write them as JSON (and CSV)
    run       execute one configured simulation
    sweep     run one simulation per value of an axis, in parallel
    verify    run the acceptance suite

Exit codes: 0 ok, 1 usage or configuration, 2 profile not found,
3 run did not extinguish, 4 sweep child failed, 5 verification failed,
6 fixture integrity.
"""
import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from core.errors import (
    ConfigurationError,
    FixtureIntegrityError,
    FlameFrontError,
    ProfileNotFoundError,
)
from core.selfsim import solve_profile
from experiments.acceptance import CriterionResult, format_table, run_acceptance
from experiments.fixtures import compare_with_fixtures, kummer_payload, load_fixtures, write_fixtures
from experiments.runner import run_experiment
from experiments.sweep import parse_sweep_values, run_sweep
from input.config_loader import SWEEP_AXES, load_config

logger = logging.getLogger("flamefront")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PROFILE = 2
EXIT_NOT_EXTINCT = 3
EXIT_SWEEP_CHILD = 4
EXIT_VERIFY = 5
EXIT_FIXTURES = 6

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_FIXTURES = Path(__file__).resolve().parent / "fixtures" / "profiles.json"


def configure_logging(verbosity: int) -> None:
    """Configure the root logger once: -v for DEBUG, -q for WARNING."""
    level = logging.INFO
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT)


def default_jobs() -> int:
    text = os.environ.get("FLAMEFRONT_JOBS", "1")
    try:
        return max(1, int(text))
    except ValueError:
        logger.warning("Ignoring FLAMEFRONT_JOBS=%r", text)
        return 1


def cmd_profile(n_list: Sequence[int], out_path, write_csv: bool = False,
                fixtures_path: Optional[Path] = None) -> int:
    """
    Solve the profile for each dimension and write profiles.json.

    Args:
        n_list: Dimensions to solve
        out_path: Output directory
        write_csv: Also write one (r, f, f') table per dimension
        fixtures_path: If given, also write the regression fixtures there

    Returns:
        Exit code
    """
    if not n_list:
        print("profile: at least one dimension is required (--n 1,2,3)", file=sys.stderr)
        return EXIT_USAGE
    out = Path(out_path)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    try:
        for n in n_list:
            profile = solve_profile(n)
            records.append(profile.to_dict())
            if write_csv:
                with (out / f"profile_n{n}.csv").open("w", newline="", encoding="utf-8") as handle:
                    writer = csv.writer(handle, lineterminator="\n")
                    writer.writerow(("r", "f", "fp"))
                    for r, f, fp in profile.samples:
                        writer.writerow((repr(float(r)), repr(float(f)), repr(float(fp))))
        if fixtures_path is not None:
            write_fixtures(fixtures_path)
    except ProfileNotFoundError as exc:
        print(f"profile: {exc}", file=sys.stderr)
        return EXIT_PROFILE
    except FlameFrontError as exc:
        print(f"profile: {exc}", file=sys.stderr)
        return EXIT_USAGE
    path = out / "profiles.json"
    path.write_text(json.dumps({"profiles": records}, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return EXIT_OK


def cmd_run(config_path, out_dir=None) -> int:
    """Execute one simulation; 3 when it does not extinguish within max_steps."""
    try:
        config = load_config(config_path)
        outcome = run_experiment(config, out_dir)
    except ConfigurationError as exc:
        print(f"run: invalid configuration{f' ({exc.key})' if exc.key else ''}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProfileNotFoundError as exc:
        print(f"run: {exc}", file=sys.stderr)
        return EXIT_PROFILE
    except FlameFrontError as exc:
        print(f"run: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not outcome.completed:
        print(f"run: no extinction within {outcome.record.steps_taken} steps; partial outputs written",
              file=sys.stderr)
    return outcome.exit_code


def cmd_sweep(config_path, axis: str, values: str, out_dir=None, jobs: int = 1) -> int:
    """One simulation per value; 4 when any child fails."""
    try:
        parsed = parse_sweep_values(axis, values)
        config = load_config(config_path)
        results, summary = run_sweep(config, axis, parsed, out_dir or config.output_directory, jobs)
    except ConfigurationError as exc:
        print(f"sweep: invalid configuration{f' ({exc.key})' if exc.key else ''}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FlameFrontError as exc:
        print(f"sweep: {exc}", file=sys.stderr)
        return EXIT_USAGE
    failed = [r for r in results if r.failed]
    print(f"sweep summary: {summary}")
    if failed:
        print(f"sweep: {len(failed)} of {len(results)} runs failed", file=sys.stderr)
        return EXIT_SWEEP_CHILD
    return EXIT_OK


def cmd_verify(level: str, fixtures_path: Path = DEFAULT_FIXTURES) -> int:
    """
    Check the profile fixtures, then run the acceptance suite.

    Returns:
        0 when everything passes, 5 on any failed criterion, 6 on corrupted fixtures
    """
    fixtures_path = Path(fixtures_path)
    if fixtures_path.exists():
        try:
            fixtures = load_fixtures(fixtures_path)
        except FixtureIntegrityError as exc:
            print(f"verify: {exc}", file=sys.stderr)
            return EXIT_FIXTURES
    else:
        logger.info("No fixtures at %s; comparing with the closed-form profiles", fixtures_path)
        fixtures = kummer_payload()
    comparisons = compare_with_fixtures(fixtures)
    worst = max((abs(c.actual - c.expected) for c in comparisons), default=0.0)
    fixture_row = CriterionResult(0, "profile fixtures", all(c.passed for c in comparisons),
                                  f"max deviation {worst:.2e}", "1e-8")

    suite = run_acceptance(level)
    results: List[CriterionResult] = [fixture_row] + suite.results
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def _dimensions(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flamefront", description="Flame front free-boundary laboratory")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="debug logging")
    parser.add_argument("-q", "--quiet", action="count", default=0, help="warnings only")
    commands = parser.add_subparsers(dest="command", required=True)

    profile = commands.add_parser("profile", help="solve self-similar profiles")
    profile.add_argument("--n", type=_dimensions, default=[], help="dimensions, e.g. 1,2,3")
    profile.add_argument("--out", default="profiles", help="output directory")
    profile.add_argument("--csv", action="store_true", help="also write (r, f, f') tables")
    profile.add_argument("--write-fixtures", type=Path, default=None, metavar="PATH",
                         help="write regression fixtures for n = 1..3")

    run = commands.add_parser("run", help="run one configured simulation")
    run.add_argument("--config", required=True, help="configuration file")
    run.add_argument("--out", default=None, help="output directory (overrides the config)")

    sweep = commands.add_parser("sweep", help="sweep one parameter")
    sweep.add_argument("--config", required=True, help="base configuration file")
    sweep.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
    sweep.add_argument("--values", required=True, help="comma-separated values")
    sweep.add_argument("--out", default=None, help="output directory")
    sweep.add_argument("--jobs", type=int, default=default_jobs(), help="worker processes (FLAMEFRONT_JOBS)")

    verify = commands.add_parser("verify", help="run the acceptance suite")
    verify.add_argument("--level", choices=("quick", "full"), default="quick")
    verify.add_argument("--fixtures", type=Path, default=DEFAULT_FIXTURES, help="profile fixtures file")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, configure logging and dispatch to a subcommand."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    configure_logging(args.verbose - args.quiet)

    if args.command == "profile":
        return cmd_profile(args.n, args.out, args.csv, args.write_fixtures)
    if args.command == "run":
        return cmd_run(args.config, args.out)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.axis, args.values, args.out, args.jobs)
    return cmd_verify(args.level, args.fixtures)


if __name__ == "__main__":
    sys.exit(main())
