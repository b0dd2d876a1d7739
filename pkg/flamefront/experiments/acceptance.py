"""
Acceptance suite run by the verify command.

Each criterion runs its own small experiment and reports a measured value
against a bound. The quick level keeps every run on laptop-sized grids; the
full level adds the 512^2 flatness run and the refinement pair.
"""
import filecmp
import logging
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np

from analysis.asymptotics import (
    dyadic_times,
    flatness_decay_fit,
    interior_ratio,
    self_similar_error,
    sqrt_law_ratio,
)
from analysis.geometry import (
    angular_sample_count,
    boundary_geometry,
    radial_minorant,
)
from core.cartesian_solver import CartesianSolver
from core.errors import FlameFrontError
from core.grid import GridSpec, ScalarField
from core.initdata import InitialDataBuilder, InitialDataSpec, radial_self_similar_field
from core.radial_solver import RadialSolver
from core.reaction import make_kernel
from core.records import SolverParams
from core.selfsim import shoot_rk45, solve_profile
from input.config_loader import load_config_string
from experiments.runner import run_experiment
from experiments.sweep import run_sweep

logger = logging.getLogger(__name__)

KERNEL = "smooth_bump"
FRONT_ENVELOPE = (0.8, 1.2)
COMPARISON_GRID = GridSpec(2.05, 65)


@dataclass(frozen=True)
class AcceptanceLevel:
    name: str
    cartesian_cells: int
    cartesian_eps: float
    selfsim_cells_per_unit: int
    selfsim_eps: float
    refinement: bool
    sqrt_law_eps: float
    flatness_cells: int


QUICK = AcceptanceLevel("quick", 256, 0.04, 128, 0.04, False, 0.02, 384)
FULL = AcceptanceLevel("full", 512, 0.02, 256, 0.02, True, 0.01, 512)
LEVELS = {"quick": QUICK, "full": FULL}


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: str
    bound: str
    seconds: float = 0.0
    detail: str = ""


class AcceptanceSuite:
    """
    Runs the criteria of one level and collects their results.

    Runs shared between criteria (the flatness run feeds criteria 4 and 5,
    every run feeds the maximum principle criterion) are computed once.
    """

    def __init__(self, level: AcceptanceLevel, workdir: Optional[Path] = None):
        self.level = level
        self.workdir = Path(workdir) if workdir is not None else None
        self.kernel = make_kernel(KERNEL)
        self.results: List[CriterionResult] = []
        self._records = []
        self._flatness_run = None

    # Shared runs

    def _remember(self, record):
        self._records.append(record)
        return record

    def _flatness_experiment(self):
        if self._flatness_run is not None:
            return self._flatness_run
        level = self.level
        spec = InitialDataSpec(cap_amplitude=0.5, perturbation_amplitude=0.1, angular_mode=12,
                               perturbation_envelope=FRONT_ENVELOPE, M=2.0)
        grid = GridSpec(spec.M + 0.05, level.flatness_cells + 1)
        initial = InitialDataBuilder(spec).build(grid)
        eps = level.cartesian_eps
        pilot = self._remember(CartesianSolver(SolverParams(eps), self.kernel).run(initial))
        schedule = dyadic_times(pilot.extinction_time_estimate, 10)
        params = SolverParams(eps, record_times=(0.0,) + schedule.times)
        record = self._remember(CartesianSolver(params, self.kernel).run(initial, geometry_level=eps / 10.0))
        self._flatness_run = (grid, spec, record)
        return self._flatness_run

    # Criteria

    def profile_correctness(self) -> CriterionResult:
        worst = {"boundary": 0.0, "residual": 0.0, "halving": 0.0, "integrators": 0.0}
        for n in (1, 2, 3):
            profile = solve_profile(n)
            f_R, fp_R = profile.boundary_values()
            worst["boundary"] = max(worst["boundary"], abs(f_R), abs(fp_R + 1.0))
            worst["residual"] = max(worst["residual"], profile.ode_residual_sup)
            halved = solve_profile(n, max_step=1e-3)
            worst["halving"] = max(worst["halving"], abs(halved.support_radius - profile.support_radius))
            R_rk45, _ = shoot_rk45(n)
            worst["integrators"] = max(worst["integrators"], abs(R_rk45 - profile.support_radius))
        passed = (worst["boundary"] <= 1e-8 and worst["residual"] <= 1e-8
                  and worst["halving"] <= 1e-9 and worst["integrators"] <= 1e-9)
        measured = ", ".join(f"{k}={v:.2e}" for k, v in worst.items())
        return CriterionResult(1, "self-similar profile", passed, measured, "1e-8 / 1e-8 / 1e-9 / 1e-9")

    def _selfsim_errors(self, eps: float, cells_per_unit: int):
        profile = solve_profile(2)
        r_max = math.ceil(profile.support_radius) + 1.0
        cells = int(r_max * cells_per_unit)
        initial = radial_self_similar_field(profile, 2, r_max, cells, 1.0)
        params = SolverParams(eps, record_times=(0.5,))
        record = self._remember(RadialSolver(params, self.kernel).run(initial))
        T_hat = record.extinction_time_estimate or math.nan
        snapshot = record.nearest_snapshot(0.5)
        if snapshot is None or not snapshot.time < T_hat:
            return abs(T_hat - 1.0), math.inf, profile.peak
        return abs(T_hat - 1.0), self_similar_error(snapshot, snapshot.time, T_hat, profile), profile.peak

    def selfsim_reproduction(self) -> CriterionResult:
        level = self.level
        t_error, s_error, a1 = self._selfsim_errors(level.selfsim_eps, level.selfsim_cells_per_unit)
        passed = t_error <= 0.05 and s_error <= 0.1 * a1
        measured = f"|T-1|={t_error:.3e}, error(0.5)={s_error:.3e}"
        if level.refinement:
            t_fine, s_fine, _ = self._selfsim_errors(level.selfsim_eps / 2.0, 2 * level.selfsim_cells_per_unit)
            passed = passed and t_fine < t_error and s_fine < s_error
            measured += f"; refined |T-1|={t_fine:.3e}, error(0.5)={s_fine:.3e}"
        return CriterionResult(2, "self-similar reproduction", passed, measured, f"5%, {0.1 * a1:.3f}")

    def _radial_cap(self, eps: float, cells: int, r_max: float = 1.5):
        initial = InitialDataBuilder(InitialDataSpec()).build_radial(2, r_max, cells)
        return self._remember(RadialSolver(SolverParams(eps), self.kernel).run(initial))

    def sqrt_law(self) -> CriterionResult:
        record = self._radial_cap(self.level.sqrt_law_eps, 600)
        ratio = sqrt_law_ratio(record, record.extinction_time_estimate, (0.5, 0.95))
        spread = ratio.max_ratio / ratio.min_ratio
        return CriterionResult(3, "square-root law", spread <= 2.0, f"max/min={spread:.4f}", "2")

    def flatness_decay(self) -> CriterionResult:
        grid, _, record = self._flatness_experiment()
        T_hat = record.extinction_time_estimate
        fit = flatness_decay_fit(record.geometry, dyadic_times(T_hat, 10), grid.spacing)
        deltas = [delta for _, delta in fit.dyadic_flatness]
        nonincreasing = all(b <= a for a, b in zip(deltas, deltas[1:]))
        contraction = all(deltas[i + 2] <= 0.8 * deltas[i] for i in range(len(deltas) - 2))
        passed = nonincreasing and contraction and fit.h_hat < 1.0 and fit.log_fit_residual < 0.25
        measured = f"h_hat={fit.h_hat:.4f}, residual={fit.log_fit_residual:.3f}, levels={fit.resolved_levels}"
        snapshot = record.nearest_snapshot(dyadic_times(T_hat, 10).times[2])
        detail = ""
        if snapshot is not None:
            spread = level_sensitivity(snapshot, record.eps)
            detail = "flatness by level " + ", ".join(f"{level:.4f}:{delta:.4f}" for level, delta in spread)
        return CriterionResult(4, "flatness decay", passed, measured, "h_hat<1, residual<0.25", detail=detail)

    def interior_improvement(self) -> CriterionResult:
        _, spec, record = self._flatness_experiment()
        T_hat = record.extinction_time_estimate
        ratios = []
        for k, t_k in enumerate(dyadic_times(T_hat, 10).times, start=1):
            snapshot = record.nearest_snapshot(t_k)
            if k < 2 or snapshot is None:
                continue
            geometry = boundary_geometry(snapshot, record.eps / 10.0)
            try:
                ratio = interior_ratio(snapshot, radial_minorant(snapshot), geometry.r_in,
                                       spec.perturbation_amplitude, level=record.eps / 10.0)
            except FlameFrontError:
                break
            ratios.append(ratio.value)
        passed = len(ratios) >= 2 and all(b <= a for a, b in zip(ratios, ratios[1:]))
        return CriterionResult(5, "interior improvement", passed,
                               "[" + ", ".join(f"{r:.4f}" for r in ratios) + "]", "nonincreasing")

    def comparison(self) -> CriterionResult:
        low = InitialDataBuilder(InitialDataSpec()).build(COMPARISON_GRID)
        high = low.with_values(1.1 * low.values)
        params = SolverParams(0.04, record_times=tuple(0.01 * i for i in range(1, 20)))
        solver = CartesianSolver(params, self.kernel)
        low_record, high_record, violation = solver.run_pair_ordered(low, high)
        self._remember(low_record)
        self._remember(high_record)
        return CriterionResult(6, "comparison principle", violation <= 1e-12, f"{violation:.3e}", "1e-12")

    def maximum_principle(self) -> CriterionResult:
        violations = sum(r.max_principle_violations for r in self._records)
        return CriterionResult(7, "discrete maximum principle", violations == 0,
                               f"{violations} increases over {len(self._records)} runs", "0")

    def geometry_oracles(self) -> CriterionResult:
        rng = np.random.default_rng(20240611)
        worst_radius = 0.0
        worst_minorant = 0.0
        for _ in range(50):
            grid = GridSpec(1.0, int(rng.integers(8, 16)) * 2 + 1)
            x, y = grid.mesh()
            r, theta = np.hypot(x, y), np.arctan2(y, x)
            k = int(rng.integers(1, 3))
            amplitude = float(rng.uniform(0.0, 0.3))
            values = np.maximum(0.8 - r, 0.0) ** 2 * (1.0 + amplitude * np.cos(k * theta + rng.uniform(0, np.pi)))
            values[0, :] = values[-1, :] = values[:, 0] = values[:, -1] = 0.0
            field = ScalarField(grid, values)
            level = float(rng.uniform(0.01, 0.2))
            geometry = boundary_geometry(field, level)
            r_in, r_out = brute_force_radii(field, level)
            worst_radius = max(worst_radius, abs(geometry.r_in - r_in), abs(geometry.r_out - r_out))
            minorant = radial_minorant(field)
            expected = brute_force_minorant(field, minorant.radii())
            scale = max(float(values.max()), 1e-300)
            worst_minorant = max(worst_minorant, float(np.abs(minorant.values - expected).max()) / scale)
        passed = worst_radius == 0.0 and worst_minorant <= 1e-3
        return CriterionResult(8, "geometry oracles", passed,
                               f"radii {worst_radius:.1e}, minorant {worst_minorant:.1e}", "exact, 1e-3")

    def eps_limit(self) -> CriterionResult:
        T = [self._radial_cap(eps, 600).extinction_time_estimate for eps in (0.04, 0.02, 0.01)]
        d1, d2 = abs(T[1] - T[0]), abs(T[2] - T[1])
        return CriterionResult(9, "eps-limit consistency", d2 < d1,
                               f"T={', '.join(f'{t:.5f}' for t in T)}; diffs {d1:.2e} > {d2:.2e}", "decreasing")

    def determinism(self) -> CriterionResult:
        text = DETERMINISM_CONFIG
        config = load_config_string(text, source="<determinism>")
        with tempfile.TemporaryDirectory(dir=self.workdir) as tmp:
            root = Path(tmp)
            first = run_experiment(config, root / "a")
            second = run_experiment(config, root / "b")
            self._remember(first.record)
            same_run = filecmp.cmp(root / "a" / "series.csv", root / "b" / "series.csv", shallow=False)
            _, serial = run_sweep(config, "eps", (0.08, 0.06), root / "serial", jobs=1)
            _, parallel = run_sweep(config, "eps", (0.08, 0.06), root / "parallel", jobs=2)
            same_sweep = filecmp.cmp(serial, parallel, shallow=False)
        passed = same_run and same_sweep and second.completed
        return CriterionResult(10, "determinism", passed, f"run={same_run}, sweep={same_sweep}", "identical")

    def criteria(self) -> List[Tuple[int, str, Callable[[], CriterionResult]]]:
        """Criteria in execution order; the maximum principle tally runs last."""
        return [
            (1, "self-similar profile", self.profile_correctness),
            (2, "self-similar reproduction", self.selfsim_reproduction),
            (3, "square-root law", self.sqrt_law),
            (4, "flatness decay", self.flatness_decay),
            (5, "interior improvement", self.interior_improvement),
            (6, "comparison principle", self.comparison),
            (8, "geometry oracles", self.geometry_oracles),
            (9, "eps-limit consistency", self.eps_limit),
            (10, "determinism", self.determinism),
            (7, "discrete maximum principle", self.maximum_principle),
        ]

    def run(self) -> List[CriterionResult]:
        """Run every criterion; an exception inside one fails that criterion only."""
        for number, name, criterion in self.criteria():
            started = time.perf_counter()
            try:
                result = criterion()
            except Exception as exc:
                logger.exception("Criterion %d %s raised", number, name)
                result = CriterionResult(number, name, False, "error", "-", detail=f"{type(exc).__name__}: {exc}")
            result.seconds = time.perf_counter() - started
            logger.info("Criterion %d %s: %s (%.1fs)", number, result.name,
                        "pass" if result.passed else "FAIL", result.seconds)
            self.results.append(result)
        self.results.sort(key=lambda r: r.number)
        return self.results

    @property
    def passed(self) -> bool:
        return bool(self.results) and all(r.passed for r in self.results)


DETERMINISM_CONFIG = """
[grid]
half_width = 2.1
cells_per_axis = 49

[solver]
eps = 0.08

[initial]
perturbation_amplitude = 0.1
angular_mode = 6

[outputs]
snapshots = none
"""


LEVEL_FACTORS = (0.05, 0.1, 0.2, 0.5)


def level_sensitivity(field: ScalarField, eps: float) -> List[Tuple[float, float]]:
    """Flatness of {u > theta} for theta between eps/20 and eps/2."""
    return [
        (factor * eps, boundary_geometry(field, factor * eps).flatness)
        for factor in LEVEL_FACTORS
    ]


def brute_force_radii(field: ScalarField, level: float):
    """Straight-loop inscribed/circumscribed radii of {u > level}, padded by half a cell."""
    grid = field.grid
    coords = grid.coordinates()
    half = 0.5 * grid.spacing
    inside_max = None
    outside_min = None
    for i, x in enumerate(coords):
        for j, y in enumerate(coords):
            r = float(np.hypot(x, y))
            if field.values[i, j] > level:
                inside_max = r if inside_max is None else max(inside_max, r)
            else:
                outside_min = r if outside_min is None else min(outside_min, r)
    if inside_max is None:
        return 0.0, 0.0
    r_out = inside_max + half
    r_in = r_out if outside_min is None else min(max(outside_min - half, 0.0), r_out)
    return r_in, r_out


def brute_force_minorant(field: ScalarField, radii: np.ndarray) -> np.ndarray:
    """Angular minima by explicit bilinear interpolation, one point at a time."""
    grid = field.grid
    h = grid.spacing
    n = grid.cells_per_axis
    u = field.values
    out = np.empty(len(radii))
    for index, r in enumerate(radii):
        count = 1 if index == 0 else angular_sample_count(r, h)
        best = math.inf
        for m in range(count):
            angle = 2.0 * math.pi * m / count
            fi = (r * math.cos(angle) + grid.half_width) / h - 0.5
            fj = (r * math.sin(angle) + grid.half_width) / h - 0.5
            fi = min(max(fi, 0.0), n - 1.0)
            fj = min(max(fj, 0.0), n - 1.0)
            i0, j0 = min(int(fi), n - 2), min(int(fj), n - 2)
            a, b = fi - i0, fj - j0
            value = ((1 - a) * (1 - b) * u[i0, j0] + a * (1 - b) * u[i0 + 1, j0]
                     + (1 - a) * b * u[i0, j0 + 1] + a * b * u[i0 + 1, j0 + 1])
            best = min(best, value)
        out[index] = best
    return out


def format_table(results: List[CriterionResult]) -> str:
    """Plain-text pass/fail table."""
    lines = [f"{'#':>2}  {'criterion':<28} {'result':<6} {'seconds':>8}  measured (bound)"]
    for r in results:
        status = "pass" if r.passed else "FAIL"
        line = f"{r.number:>2}  {r.name:<28} {status:<6} {r.seconds:>8.1f}  {r.measured} ({r.bound})"
        if r.detail:
            line += f"  [{r.detail}]"
        lines.append(line)
    return "\n".join(lines)


def run_acceptance(level: str, workdir: Optional[Path] = None) -> AcceptanceSuite:
    suite = AcceptanceSuite(LEVELS[level], workdir)
    suite.run()
    return suite
