"""
Asymptotics of runs approaching extinction.

Everything here is post-processing over finished records and snapshots:
the extinction time estimate, the square-root laws, the dyadic flatness
decay fit and the interior/self-similar comparisons.
"""
import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from core.errors import (
    DomainError,
    EstimationError,
    InsufficientResolutionError,
    ParameterError,
)
from analysis.geometry import angular_sample_count, circle_values

logger = logging.getLogger(__name__)

MIN_FIT_SAMPLES = 8
FIT_RESIDUAL_LIMIT = 0.1
EARLY_CUTOFF = 0.5
RESOLUTION_CELLS = 8.0
INNER_BALL_CELLS = 4.0
MIN_RESOLVED_LEVELS = 3
DEFAULT_INTERIOR_EXPONENT = 2.0 / 3.0

THRESHOLD_CROSSING = "threshold_crossing"
SQUARE_LAW_FIT = "square_law_fit"


@dataclass(frozen=True)
class ExtinctionEstimate:
    """
    Estimated extinction time of a run.

    fit_window and fit_residual are None when the threshold crossing was used.
    """

    T_hat: float
    method: str
    fit_window: Optional[Tuple[float, float]] = None
    fit_residual: Optional[float] = None
    samples: int = 0

    def to_dict(self) -> dict:
        return {
            "T_hat": self.T_hat,
            "method": self.method,
            "fit_window": list(self.fit_window) if self.fit_window else None,
            "fit_residual": self.fit_residual,
            "samples": self.samples,
        }


@dataclass(frozen=True)
class DyadicSchedule:
    T: float
    times: Tuple[float, ...]

    def level_time(self, k: int) -> float:
        """t_k for k >= 1."""
        return self.times[k - 1]

    @property
    def levels(self) -> int:
        return len(self.times)


@dataclass
class FlatnessFit:
    """
    Geometric fit delta_k ~ C' h_hat^k over resolved dyadic levels.

    rejected lists (k, reason) for levels dropped by the resolution or floor guard.
    """

    dyadic_flatness: List[Tuple[int, float]]
    h_hat: float
    prefactor: float
    log_fit_residual: float
    rejected: List[Tuple[int, str]] = dataclass_field(default_factory=list)

    @property
    def resolved_levels(self) -> int:
        return len(self.dyadic_flatness)

    def to_dict(self) -> dict:
        return {
            "h_hat": self.h_hat,
            "prefactor": self.prefactor,
            "residual": self.log_fit_residual,
            "levels": [[k, delta] for k, delta in self.dyadic_flatness],
            "rejected": [[k, reason] for k, reason in self.rejected],
        }


class SqrtLawRatio(NamedTuple):
    min_ratio: float
    max_ratio: float
    excluded: int


class RadiusLawRatio(NamedTuple):
    r_in_min: float
    r_in_max: float
    r_out_min: float
    r_out_max: float
    excluded: int


class InteriorRatio(NamedTuple):
    value: float
    excluded_cells: int
    inner_radius: float


def _series_of(record):
    return record.series if hasattr(record, "series") else record


def _crossing_time(times: np.ndarray, maxima: np.ndarray, threshold: float) -> float:
    below = np.nonzero(maxima < threshold)[0]
    first = int(below[0])
    if first == 0:
        return float(times[0])
    t0, t1 = times[first - 1], times[first]
    m0, m1 = maxima[first - 1], maxima[first]
    return float(t0 + (m0 - threshold) / (m0 - m1) * (t1 - t0))


def estimate_extinction(record, threshold: float, floor: Optional[float] = None) -> ExtinctionEstimate:
    """
    Estimate the extinction time from the max_u series.

    (max u)^2 is fitted linearly in t over the last decade of max_u values
    above the threshold, and the root of the line is the estimate. The
    window starts no earlier than the first sample at half the initial
    maximum, and samples below the floor never enter it, so neither the
    initial relaxation nor a slow tail inside the reaction layer moves the
    root. The threshold crossing is used when fewer than 8 samples fall in
    the window, when the slope is not negative, or when the fit residual
    exceeds 10% of the data range.

    Args:
        record: A RunRecord, or any object with a series of (t, max_u) samples
        threshold: Extinction threshold of the run
        floor: Lower bound on the fit window, excluding the reaction layer

    Returns:
        The estimate; a fitted root is never earlier than the end of its window

    Raises:
        EstimationError: If the run did not reach extinction
    """
    if getattr(record, "completed", True) is False:
        raise EstimationError("run did not reach extinction")
    series = _series_of(record)
    if not series:
        raise EstimationError("empty series")
    times = np.array([s.t for s in series], dtype=float)
    maxima = np.array([s.max_u for s in series], dtype=float)
    if not np.any(maxima < threshold):
        raise EstimationError(f"max_u never drops below the threshold {threshold}")

    crossing = _crossing_time(times, maxima, threshold)
    above = maxima >= threshold
    if not above.any():
        return ExtinctionEstimate(crossing, THRESHOLD_CROSSING)
    fallback = ExtinctionEstimate(max(crossing, float(times[above].max())), THRESHOLD_CROSSING)

    m_lo = float(maxima[above].min())
    if floor is not None:
        m_lo = max(m_lo, floor)
    m_hi = min(10.0 * m_lo, EARLY_CUTOFF * float(maxima[0]))
    window = (maxima >= m_lo) & (maxima <= m_hi)
    count = int(window.sum())
    if count < MIN_FIT_SAMPLES:
        logger.warning("Only %d samples in the square-law window; using the threshold crossing", count)
        return fallback

    t_fit = times[window]
    squares = maxima[window] ** 2
    slope, intercept = np.polyfit(t_fit, squares, 1)
    if not slope < 0.0:
        logger.warning("Square-law fit has nonnegative slope; using the threshold crossing")
        return fallback
    residual = float(np.sqrt(np.mean((squares - (slope * t_fit + intercept)) ** 2)))
    spread = float(squares.max() - squares.min())
    relative = residual / spread if spread > 0.0 else math.inf
    if relative > FIT_RESIDUAL_LIMIT:
        logger.warning("Square-law fit residual %.3g exceeds 10%% of the range; using the threshold crossing", relative)
        return fallback

    root = float(-intercept / slope)
    return ExtinctionEstimate(
        max(root, float(t_fit.max())),
        SQUARE_LAW_FIT,
        (float(t_fit.min()), float(t_fit.max())),
        relative,
        count,
    )


def dyadic_times(T: float, k_max: int) -> DyadicSchedule:
    """
    Dyadic times t_i = (1 - 2^-i) T for i = 1..k_max.

    Raises:
        ParameterError: If T <= 0 or k_max < 1
    """
    if not T > 0.0:
        raise ParameterError(f"T must be positive, got {T}")
    if k_max < 1:
        raise ParameterError(f"k_max must be >= 1, got {k_max}")
    return DyadicSchedule(float(T), tuple(T - math.ldexp(T, -i) for i in range(1, k_max + 1)))


def _check_window(window: Tuple[float, float]) -> Tuple[float, float]:
    lo, hi = window
    if not 0.0 < lo < hi < 1.0:
        raise ParameterError(f"window fractions must satisfy 0 < lo < hi < 1, got {window}")
    return float(lo), float(hi)


def sqrt_law_ratio(record, T_hat: float, window: Tuple[float, float]) -> SqrtLawRatio:
    """
    Extremes of max_u(t) / sqrt(T_hat - t) over t in [lo T_hat, hi T_hat].

    Samples at or after T_hat, or with max_u = 0, are excluded and counted;
    if every sample is excluded both ratios are NaN.

    Raises:
        ParameterError: If the window is malformed or holds no samples
    """
    lo, hi = _check_window(window)
    ratios = []
    excluded = 0
    inside = [s for s in _series_of(record) if lo * T_hat <= s.t <= hi * T_hat]
    if not inside:
        raise ParameterError(f"no series samples in [{lo}, {hi}] x T_hat")
    for sample in inside:
        remaining = T_hat - sample.t
        if remaining <= 0.0 or sample.max_u <= 0.0:
            excluded += 1
            continue
        ratios.append(sample.max_u / math.sqrt(remaining))
    if not ratios:
        return SqrtLawRatio(math.nan, math.nan, excluded)
    return SqrtLawRatio(min(ratios), max(ratios), excluded)


def radius_law_ratio(geometry_series: Sequence, T_hat: float, window: Tuple[float, float]) -> RadiusLawRatio:
    """
    Extremes of r_in / sqrt(T_hat - t) and r_out / sqrt(T_hat - t) over the window.

    Raises:
        ParameterError: If the window is malformed or holds no samples
    """
    lo, hi = _check_window(window)
    inside = [g for g in geometry_series if lo * T_hat <= g.time <= hi * T_hat]
    if not inside:
        raise ParameterError(f"no geometry samples in [{lo}, {hi}] x T_hat")
    inner, outer = [], []
    excluded = 0
    for geometry in inside:
        remaining = T_hat - geometry.time
        if remaining <= 0.0 or geometry.extinct:
            excluded += 1
            continue
        root = math.sqrt(remaining)
        inner.append(geometry.r_in / root)
        outer.append(geometry.r_out / root)
    if not inner:
        return RadiusLawRatio(math.nan, math.nan, math.nan, math.nan, excluded)
    return RadiusLawRatio(min(inner), max(inner), min(outer), max(outer), excluded)


def _nearest(geometry_series: Sequence, t: float):
    return min(geometry_series, key=lambda g: abs(g.time - t))


def flatness_decay_fit(
    geometry_series: Sequence,
    schedule: DyadicSchedule,
    spacing: float,
    k_min: int = 2,
) -> FlatnessFit:
    """
    Fit log delta_k = log C' + k log h_hat over resolved dyadic levels.

    A level k >= k_min is resolved when the geometry sample nearest to t_k
    is not extinct, has r_in >= 8 h, and its flatness is at least the
    resolution floor 2 h / r_in.

    Args:
        geometry_series: BoundaryGeometry samples of one run
        schedule: Dyadic times
        spacing: Grid spacing h
        k_min: First level taken into the fit

    Returns:
        The fit with the resolved (k, delta_k) pairs and the rejected levels

    Raises:
        InsufficientResolutionError: If fewer than 3 levels are resolved
    """
    if not geometry_series:
        raise InsufficientResolutionError("no geometry samples")
    resolved: List[Tuple[int, float]] = []
    rejected: List[Tuple[int, str]] = []
    for k, t_k in enumerate(schedule.times, start=1):
        if k < k_min:
            continue
        geometry = _nearest(geometry_series, t_k)
        if geometry.extinct:
            rejected.append((k, "extinct"))
        elif geometry.r_in < RESOLUTION_CELLS * spacing:
            rejected.append((k, "r_in below 8 cells"))
        elif geometry.flatness < 2.0 * spacing / geometry.r_in:
            rejected.append((k, "flatness below resolution floor"))
        else:
            resolved.append((k, float(geometry.flatness)))

    if len(resolved) < MIN_RESOLVED_LEVELS:
        raise InsufficientResolutionError(
            f"{len(resolved)} resolved dyadic levels, need {MIN_RESOLVED_LEVELS} (rejected: {rejected})"
        )
    levels = np.array([k for k, _ in resolved], dtype=float)
    logs = np.log([delta for _, delta in resolved])
    slope, intercept = np.polyfit(levels, logs, 1)
    residual = float(np.sqrt(np.mean((logs - (slope * levels + intercept)) ** 2)))
    logger.info("Flatness fit over %d levels: h_hat=%.4f residual=%.3g", len(resolved), math.exp(slope), residual)
    return FlatnessFit(resolved, float(math.exp(slope)), float(math.exp(intercept)), residual, rejected)


def interior_ratio(
    field,
    minorant,
    r_in: float,
    alpha: float,
    level: float = 0.0,
    exponent: float = DEFAULT_INTERIOR_EXPONENT,
) -> InteriorRatio:
    """
    sup of field / minorant - 1 over the inner ball |x| <= (1 - alpha^exponent) r_in.

    Args:
        field: Cartesian snapshot
        minorant: Radial lower bound, sampled at |x|
        r_in: Inscribed radius of the positivity set
        alpha: Perturbation size in (0, 1)
        level: Cells where the minorant does not exceed this are excluded and counted
        exponent: Exponent applied to alpha (2/3 by default)

    Returns:
        InteriorRatio with the clamped nonnegative value

    Raises:
        ParameterError: If alpha is outside (0, 1)
        InsufficientResolutionError: If the inner ball spans fewer than 4 cells
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    spacing = field.grid.spacing
    inner = (1.0 - alpha ** exponent) * r_in
    if inner < INNER_BALL_CELLS * spacing:
        raise InsufficientResolutionError(f"inner ball radius {inner:.4g} is below 4 cells")

    radii = field.radii()
    cells = radii <= inner
    phi = minorant.sample(np.minimum(radii[cells], minorant.r_max))
    values = field.values[cells]
    usable = phi > level
    excluded = int((~usable).sum())
    if not usable.any():
        return InteriorRatio(0.0, excluded, inner)
    ratio = float((values[usable] / phi[usable] - 1.0).max())
    return InteriorRatio(max(ratio, 0.0), excluded, inner)


def inner_sphere_oscillation(field, r_in: float, samples: int = 64) -> float:
    """(max - min of u on |x| = r_in) / r_in."""
    spacing = field.grid.spacing
    if r_in < 2.0 * spacing:
        raise InsufficientResolutionError(f"r_in={r_in:.4g} is below 2 cells")
    values = circle_values(field, r_in, angular_sample_count(r_in, spacing, samples))
    return float((values.max() - values.min()) / r_in)


def radial_deviation(field, minorant) -> float:
    """Relative sup distance between a snapshot and its radial minorant."""
    peak = float(np.abs(field.values).max())
    if peak == 0.0:
        return 0.0
    radii = field.radii()
    cells = radii <= minorant.r_max
    phi = minorant.sample(radii[cells])
    return float(np.abs(field.values[cells] - phi).max() / peak)


def self_similar_error(field, t: float, T_hat: float, profile) -> float:
    """
    sup over nodes of |(T_hat - t)^-1/2 u(x) - f(|x| / (T_hat - t)^1/2)|.

    Works on Cartesian and radial fields alike.

    Raises:
        DomainError: If t >= T_hat
    """
    if t >= T_hat:
        raise DomainError(f"t={t} is not before T_hat={T_hat}")
    root = math.sqrt(T_hat - t)
    radii = np.asarray(field.radii(), dtype=float)
    scaled = np.asarray(field.values, dtype=float) / root
    return float(np.abs(scaled - profile.evaluate(radii / root)).max())


def radial_approximation_error(field, radial, t: float, T_hat: float) -> float:
    """
    sup over cells of |u(x) - v(|x|)| / sqrt(T_hat - t), v taken as 0 beyond its last node.

    Raises:
        DomainError: If t >= T_hat
    """
    if t >= T_hat:
        raise DomainError(f"t={t} is not before T_hat={T_hat}")
    radii = field.radii()
    comparison = np.zeros_like(radii)
    cells = radii <= radial.r_max
    comparison[cells] = radial.sample(radii[cells])
    return float(np.abs(field.values - comparison).max() / math.sqrt(T_hat - t))


def gradient_bound_check(record, M: float) -> float:
    """sup of |grad u| / max(1, M) over recorded snapshots; 0 without snapshots."""
    best = 0.0
    for snapshot in getattr(record, "snapshots", record):
        best = max(best, float(snapshot.gradient_magnitude().values.max()))
    return best / max(1.0, M)


def _finite(value):
    if value is None:
        return None
    return None if isinstance(value, float) and not math.isfinite(value) else value


def analysis_summary(
    estimate: Optional[ExtinctionEstimate],
    sqrt_law: Optional[SqrtLawRatio] = None,
    flatness_fit: Optional[FlatnessFit] = None,
    interior_ratios: Sequence = (),
    self_similar_errors: Sequence = (),
    gradient_sup: Optional[float] = None,
    extra: Optional[dict] = None,
) -> dict:
    """
    JSON-ready summary of one run's analysis; NaN becomes null.
    """
    summary = {
        "T_hat": _finite(estimate.T_hat) if estimate else None,
        "method": estimate.method if estimate else None,
        "extinction": estimate.to_dict() if estimate else None,
        "sqrt_law": None,
        "flatness_fit": flatness_fit.to_dict() if flatness_fit else None,
        "interior_ratios": [dict((k, _finite(v)) for k, v in item.items()) for item in interior_ratios],
        "self_similar_errors": [dict((k, _finite(v)) for k, v in item.items()) for item in self_similar_errors],
        "gradient_sup": _finite(gradient_sup),
    }
    if sqrt_law is not None:
        summary["sqrt_law"] = {
            "min_ratio": _finite(sqrt_law.min_ratio),
            "max_ratio": _finite(sqrt_law.max_ratio),
            "excluded": sqrt_law.excluded,
        }
    if extra:
        summary.update(extra)
    return summary
