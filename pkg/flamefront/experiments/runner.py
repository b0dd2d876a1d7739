"""
Single-run orchestration: build the initial field, run it to extinction,
analyse the record and write every output file of the run.

Output directory layout:
    series.csv      t, max_u, r_in, r_out, flatness, mass
    geometry.csv    t, r_in, r_out, flatness, level, extinct
    analysis.json   metadata, validation report, analysis summary
    snapshots/      one file per recorded snapshot
    renders/        PNG heat maps when rendering is enabled
"""
import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from analysis.asymptotics import (
    THRESHOLD_CROSSING,
    ExtinctionEstimate,
    analysis_summary,
    dyadic_times,
    flatness_decay_fit,
    gradient_bound_check,
    inner_sphere_oscillation,
    interior_ratio,
    radial_approximation_error,
    radial_deviation,
    radius_law_ratio,
    self_similar_error,
    sqrt_law_ratio,
)
from analysis.geometry import CSV_COLUMNS, boundary_geometry, radial_minorant
from core.cartesian_solver import CartesianSolver
from core.errors import InsufficientResolutionError, ParameterError
from core.initdata import (
    InitialDataBuilder,
    ValidationReport,
    radial_self_similar_field,
    self_similar_field,
    validate,
)
from core.radial_solver import RadialSolver
from core.records import RunRecord
from core.selfsim import solve_profile
from core.snapshot_io import write_snapshot
from rendering.snapshot_renderer import SnapshotRenderer

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_EXTINCT = 3
SERIES_COLUMNS = ("t", "max_u", "r_in", "r_out", "flatness", "mass")
FORMAT_VERSION = 1


@dataclass
class RunOutcome:
    """What one run produced, plus the exit code it maps to."""

    record: RunRecord
    summary: dict
    validation: Optional[ValidationReport] = None
    output_paths: List[Path] = field(default_factory=list)

    @property
    def completed(self) -> bool:
        return self.record.completed

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.completed else EXIT_NOT_EXTINCT

    @property
    def T_hat(self) -> Optional[float]:
        return self.record.extinction_time_estimate


def config_digest(config) -> str:
    """SHA-256 of the canonical JSON form of the resolved configuration."""
    payload = json.dumps(config.resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def run_metadata(config) -> dict:
    return {
        "program": "flamefront",
        "format_version": FORMAT_VERSION,
        "config_sha256": config_digest(config),
        "config": config.resolved,
    }


def metadata_line(config) -> str:
    return "# " + json.dumps(run_metadata(config), sort_keys=True, separators=(",", ":"))


def build_initial(config, profile) -> Tuple[object, Optional[ValidationReport]]:
    """
    Build the initial field a configuration asks for.

    Args:
        config: Resolved RunConfig
        profile: Self-similar profile of the run's dimension

    Returns:
        (initial field, validation report or None for non-cap data)
    """
    builder = InitialDataBuilder(config.initial)
    if config.is_radial:
        if config.profile == "selfsim":
            field_ = radial_self_similar_field(
                profile, config.dimension, config.grid.half_width, config.radial_cells, config.selfsim_T
            )
        else:
            field_ = builder.build_radial(config.dimension, config.grid.half_width, config.radial_cells)
        return field_, None
    if config.profile == "selfsim":
        return self_similar_field(profile, config.grid, config.selfsim_T), None
    field_ = builder.build(config.grid)
    return field_, validate(field_, config.initial)


def _solver(config, params):
    kernel = config.kernel()
    return RadialSolver(params, kernel) if config.is_radial else CartesianSolver(params, kernel)


def _spacing(config, initial) -> float:
    return initial.spacing if config.is_radial else initial.grid.spacing


def _record_schedule(config, initial) -> Tuple[float, ...]:
    """Snapshot times, with a pilot run resolving the dyadic schedule when requested."""
    times = set(config.record_times)
    if not config.dyadic:
        return tuple(sorted(times))
    pilot = _solver(config, config.solver_params(())).run(initial)
    if not pilot.completed:
        logger.warning("Pilot run did not extinguish; dyadic schedule unavailable")
        return tuple(sorted(times))
    T_pilot = pilot.extinction_time_estimate
    schedule = dyadic_times(T_pilot, config.dyadic_levels)
    times.update(schedule.times)
    times.add(0.0)
    logger.info("Pilot run: T_hat=%.6f, %d dyadic record times", T_pilot, schedule.levels)
    return tuple(sorted(times))


def _write_series(path: Path, config, record: RunRecord) -> Path:
    with path.open("w", newline="", encoding="utf-8") as handle:
        handle.write(metadata_line(config) + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SERIES_COLUMNS)
        for index, sample in enumerate(record.series):
            geometry = record.geometry[index] if index < len(record.geometry) else None
            if geometry is None:
                shape = ["", "", ""]
            else:
                shape = [repr(geometry.r_in), repr(geometry.r_out), repr(geometry.flatness)]
            writer.writerow([repr(sample.t), repr(sample.max_u)] + shape + [repr(sample.mass)])
    return path


def _write_geometry(path: Path, config, record: RunRecord) -> Path:
    with path.open("w", newline="", encoding="utf-8") as handle:
        handle.write(metadata_line(config) + "\n")
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for geometry in record.geometry:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in geometry.to_row().items()})
    return path


def _write_snapshots(directory: Path, config, record: RunRecord) -> List[Path]:
    if config.snapshot_format == "none":
        return []
    directory.mkdir(parents=True, exist_ok=True)
    binary = config.snapshot_format == "binary" and not config.is_radial
    suffix = ".bin" if binary else ".txt"
    paths = []
    for index, snapshot in enumerate(record.snapshots):
        paths.append(write_snapshot(snapshot, directory / f"snapshot_{index:03d}{suffix}", binary=binary))
    return paths


def _render_snapshots(directory: Path, config, record: RunRecord) -> List[Path]:
    if not config.render or config.is_radial:
        return []
    directory.mkdir(parents=True, exist_ok=True)
    renderer = SnapshotRenderer()
    paths = []
    for index, snapshot in enumerate(record.snapshots):
        geometry = boundary_geometry(snapshot, config.geometry_level)
        paths.append(renderer.render(snapshot, geometry, directory / f"snapshot_{index:03d}.png"))
    return paths


def _dyadic_levels(config, record: RunRecord, T_hat: float, spacing: float) -> List[dict]:
    """Flatness and its resolution floor at every dyadic level."""
    levels = []
    if not record.geometry:
        return levels
    schedule = dyadic_times(T_hat, config.dyadic_levels)
    for k, t_k in enumerate(schedule.times, start=1):
        geometry = min(record.geometry, key=lambda g: abs(g.time - t_k))
        floor = 2.0 * spacing / geometry.r_in if geometry.r_in > 0.0 else None
        levels.append({
            "k": k,
            "t": t_k,
            "sample_t": geometry.time,
            "r_in": geometry.r_in,
            "r_out": geometry.r_out,
            "flatness": geometry.flatness,
            "floor": floor,
        })
    return levels


def _snapshot_diagnostics(config, record: RunRecord, T_hat: float) -> List[dict]:
    alpha = config.initial.perturbation_amplitude
    diagnostics = []
    for snapshot in record.snapshots:
        if snapshot.time >= T_hat:
            continue
        geometry = boundary_geometry(snapshot, config.geometry_level)
        entry = {"t": snapshot.time, "r_in": geometry.r_in, "value": None,
                 "excluded_cells": None, "oscillation": None, "radial_deviation": None, "reason": None}
        if geometry.extinct:
            entry["reason"] = "extinct"
            diagnostics.append(entry)
            continue
        minorant = radial_minorant(snapshot)
        entry["radial_deviation"] = radial_deviation(snapshot, minorant)
        try:
            entry["oscillation"] = inner_sphere_oscillation(snapshot, geometry.r_in)
            if 0.0 < alpha < 1.0:
                ratio = interior_ratio(snapshot, minorant, geometry.r_in, alpha,
                                       level=config.geometry_level, exponent=config.interior_exponent)
                entry["value"] = ratio.value
                entry["excluded_cells"] = ratio.excluded_cells
        except InsufficientResolutionError as exc:
            entry["reason"] = str(exc)
        diagnostics.append(entry)
    return diagnostics


def _radial_comparison(config, record: RunRecord, T_hat: float) -> List[dict]:
    """
    Start a radial run from the minorant of each snapshot and compare it with
    the later Cartesian snapshots.
    """
    results = []
    snapshots = [s for s in record.snapshots if s.time < T_hat]
    for index, start in enumerate(snapshots[:-1]):
        later = snapshots[index + 1:]
        minorant = radial_minorant(start)
        values = minorant.values.copy()
        values[-1] = 0.0
        initial = minorant.with_values(values)
        params = config.solver_params(tuple(s.time for s in later))
        radial_record = RadialSolver(params, config.kernel()).run(initial)
        for snapshot in later:
            radial = radial_record.nearest_snapshot(snapshot.time)
            if radial is None:
                continue
            results.append({
                "t_start": start.time,
                "t": snapshot.time,
                "error": radial_approximation_error(snapshot, radial, snapshot.time, T_hat),
            })
    return results


def analyse(config, record: RunRecord, profile, spacing: float) -> dict:
    """
    Analysis summary of a finished run.

    Args:
        config: Resolved RunConfig
        record: Run record; only completed runs get the extinction-based analyses
        profile: Self-similar profile of the run's dimension
        spacing: Grid spacing of the run

    Returns:
        JSON-ready summary dictionary
    """
    gradient_sup = gradient_bound_check(record, config.initial.M)
    if not record.completed:
        return analysis_summary(None, gradient_sup=gradient_sup, extra={"completed": False})

    T_hat = record.extinction_time_estimate
    estimate = record.extinction_estimate or ExtinctionEstimate(T_hat, THRESHOLD_CROSSING)
    extra = {"completed": True, "steps": record.steps_taken, "time_step": record.time_step,
             "max_principle_violations": record.max_principle_violations}

    sqrt_law = None
    try:
        sqrt_law = sqrt_law_ratio(record, T_hat, config.sqrt_window)
        radius_law = radius_law_ratio(record.geometry, T_hat, config.sqrt_window)
        extra["radius_law"] = {k: (None if isinstance(v, float) and math.isnan(v) else v)
                               for k, v in radius_law._asdict().items()}
    except ParameterError as exc:
        extra["sqrt_law_error"] = str(exc)

    flatness_fit = None
    if config.dyadic:
        extra["dyadic_levels"] = _dyadic_levels(config, record, T_hat, spacing)
        try:
            flatness_fit = flatness_decay_fit(record.geometry, dyadic_times(T_hat, config.dyadic_levels), spacing)
        except InsufficientResolutionError as exc:
            extra["flatness_fit_error"] = str(exc)

    interior = [] if config.is_radial else _snapshot_diagnostics(config, record, T_hat)
    errors = []
    for snapshot in record.snapshots:
        if snapshot.time < T_hat:
            errors.append({"t": snapshot.time, "error": self_similar_error(snapshot, snapshot.time, T_hat, profile)})

    if config.radial_comparison and not config.is_radial:
        extra["radial_comparison"] = _radial_comparison(config, record, T_hat)

    return analysis_summary(estimate, sqrt_law, flatness_fit, interior, errors, gradient_sup, extra)


def run_experiment(config, out_dir=None) -> RunOutcome:
    """
    Execute one configured run and write its outputs.

    Args:
        config: Resolved RunConfig
        out_dir: Output directory; defaults to the configured one

    Returns:
        The outcome; exit_code is 3 when the run did not extinguish, in which
        case the partial outputs are still written

    Raises:
        FlameFrontError: On invalid initial data or parameters
    """
    out = Path(out_dir if out_dir is not None else config.output_directory)
    out.mkdir(parents=True, exist_ok=True)
    profile = solve_profile(config.dimension if config.is_radial else 2)

    initial, validation = build_initial(config, profile)
    if validation is not None and not validation.passed:
        logger.warning("Initial data fails required checks: %s",
                       ", ".join(c.name for c in validation.failures(advisory=False)))
    record_times = _record_schedule(config, initial)
    solver = _solver(config, config.solver_params(record_times))
    record = solver.run(initial, geometry_level=config.geometry_level)

    spacing = _spacing(config, initial)
    summary = analyse(config, record, profile, spacing)

    paths = [
        _write_series(out / "series.csv", config, record),
        _write_geometry(out / "geometry.csv", config, record),
    ]
    paths.extend(_write_snapshots(out / "snapshots", config, record))
    paths.extend(_render_snapshots(out / "renders", config, record))

    document = {
        "metadata": run_metadata(config),
        "validation": validation.to_dict() if validation is not None else None,
        "profile": profile.to_dict(),
        "analysis": summary,
    }
    analysis_path = out / "analysis.json"
    analysis_path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths.append(analysis_path)

    logger.info("Wrote %d files to %s", len(paths), out)
    return RunOutcome(record, summary, validation, paths)
