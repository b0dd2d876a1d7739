"""
Parameter sweeps: one run per value of a single axis, in a worker pool.
"""
import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from core.errors import ParameterError
from input.config_loader import SWEEP_AXES
from experiments.runner import metadata_line, run_experiment

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = (
    "value", "exit_code", "completed", "T_hat", "method", "steps",
    "max_principle_violations", "h_hat", "directory", "error",
)
EXIT_CHILD_FAILED = 4


@dataclass
class SweepResult:
    """Summary row of one child run."""

    value: object
    exit_code: int
    completed: bool = False
    T_hat: Optional[float] = None
    method: Optional[str] = None
    steps: Optional[int] = None
    max_principle_violations: Optional[int] = None
    h_hat: Optional[float] = None
    directory: str = ""
    error: str = ""

    @property
    def failed(self) -> bool:
        return self.exit_code != 0


def parse_sweep_values(axis: str, text: str) -> Tuple:
    """
    Parse a comma-separated value list for an axis.

    Raises:
        ParameterError: If the axis is unknown or no values are given
    """
    if axis not in SWEEP_AXES:
        raise ParameterError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")
    items = [item.strip() for item in (text or "").split(",") if item.strip()]
    if not items:
        raise ParameterError("no sweep values given")
    convert = int if axis == "grid" else float
    try:
        return tuple(convert(item) for item in items)
    except ValueError as exc:
        raise ParameterError(f"invalid sweep value: {exc}")


def child_directory(axis: str, index: int, value) -> str:
    return f"{axis}_{index:02d}_{value}"


def _run_child(task) -> SweepResult:
    config, axis, index, value, out_root = task
    directory = child_directory(axis, index, value)
    try:
        child = config.with_override(axis, value)
        outcome = run_experiment(child, Path(out_root) / directory)
    except Exception as exc:
        logger.exception("Sweep child %s=%s raised", axis, value)
        return SweepResult(value, EXIT_CHILD_FAILED, directory=directory, error=f"{type(exc).__name__}: {exc}")
    fit = outcome.summary.get("flatness_fit") or {}
    return SweepResult(
        value=value,
        exit_code=outcome.exit_code,
        completed=outcome.completed,
        T_hat=outcome.T_hat,
        method=outcome.summary.get("method"),
        steps=outcome.record.steps_taken,
        max_principle_violations=outcome.record.max_principle_violations,
        h_hat=fit.get("h_hat"),
        directory=directory,
    )


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_summary(path: Path, config, axis: str, results: Sequence[SweepResult]) -> Path:
    """Summary CSV keyed by the swept value, in the order the values were given."""
    with path.open("w", newline="", encoding="utf-8") as handle:
        handle.write(metadata_line(config) + "\n")
        handle.write("# sweep " + json.dumps({"axis": axis}, sort_keys=True) + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for result in results:
            row = asdict(result)
            writer.writerow([_cell(row[column]) for column in SUMMARY_COLUMNS])
    return path


def run_sweep(config, axis: str, values: Sequence, out_dir, jobs: int = 1) -> Tuple[List[SweepResult], Path]:
    """
    Run one simulation per value and write the combined summary.

    Results are collected in value order, so the summary does not depend on
    the number of workers.

    Args:
        config: Base RunConfig
        axis: eps, alpha or grid
        values: Values to sweep
        out_dir: Root directory; each child writes into its own subdirectory
        jobs: Worker processes (1 runs in-process)

    Returns:
        (results in value order, path of summary.csv)

    Raises:
        ParameterError: If no values are given
    """
    if not values:
        raise ParameterError("no sweep values given")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(config, axis, index, value, str(out)) for index, value in enumerate(values)]
    logger.info("Sweep over %s: %d values, %d worker(s)", axis, len(tasks), jobs)
    if jobs <= 1 or len(tasks) == 1:
        results = [_run_child(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(_run_child, tasks))
    for result in results:
        if result.failed:
            logger.warning("Sweep child %s=%s exited with %d %s", axis, result.value, result.exit_code, result.error)
    summary = write_summary(out / "summary.csv", config, axis, results)
    return results, summary
