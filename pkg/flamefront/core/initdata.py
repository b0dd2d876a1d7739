"""
Initial data u0 = phi0 + rho: a parabolic cap plus an angularly periodic bump.

phi0(x) = A (1 - |x|^2)+ and rho(x) = alpha s(|x|) cos^2(m theta / 2), where
s is a C^2 bump on the envelope [r_lo, r_hi] with peak 1. Validation measures
the admissibility conditions and reports them; it never raises.
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from core.errors import SpecificationError
from core.grid import GridSpec, ScalarField
from core.radial_field import RadialField
from core.selfsim import self_similar_radial

logger = logging.getLogger(__name__)

DEFAULT_ENVELOPE = (0.5, 0.9)
CAP_SUPPORT = 1.0
BOUNDARY_BAND_CELLS = 2


def envelope_bump(r: np.ndarray, r_lo: float, r_hi: float) -> np.ndarray:
    """(1 - q^2)^3 on |q| < 1, q = (2r - r_lo - r_hi) / (r_hi - r_lo); 0 elsewhere."""
    q = (2.0 * np.asarray(r, dtype=float) - r_lo - r_hi) / (r_hi - r_lo)
    return np.where(np.abs(q) < 1.0, (1.0 - q ** 2) ** 3, 0.0)


@dataclass(frozen=True)
class InitialDataSpec:
    """
    Parameters of u0 = phi0 + rho.

    Raises SpecificationError on construction if the cap amplitude is outside
    (0, 1/2], if A < 1/M, or if the perturbation parameters are malformed.
    """

    cap_amplitude: float = 0.5
    perturbation_amplitude: float = 0.0
    angular_mode: int = 0
    perturbation_envelope: Tuple[float, float] = DEFAULT_ENVELOPE
    M: float = 2.0
    dimension: int = 2

    def __post_init__(self):
        if not 0.0 < self.cap_amplitude <= 0.5:
            raise SpecificationError(f"cap_amplitude must lie in (0, 1/2], got {self.cap_amplitude}")
        if not self.M > 0.0 or self.cap_amplitude < 1.0 / self.M:
            raise SpecificationError(f"max phi0 = {self.cap_amplitude} is below 1/M = {1.0 / self.M}")
        if self.perturbation_amplitude < 0.0:
            raise SpecificationError("perturbation_amplitude must be nonnegative")
        if int(self.angular_mode) != self.angular_mode or self.angular_mode < 0:
            raise SpecificationError(f"angular_mode must be a nonnegative integer, got {self.angular_mode}")
        r_lo, r_hi = self.perturbation_envelope
        if not 0.0 <= r_lo < r_hi:
            raise SpecificationError(f"envelope must satisfy 0 <= r_lo < r_hi, got {self.perturbation_envelope}")

    @property
    def angular_period(self) -> float:
        return math.inf if self.angular_mode == 0 else 2.0 * math.pi / self.angular_mode

    @property
    def period_condition(self) -> bool:
        """Angular period 2 pi / m no larger than the perturbation amplitude."""
        return self.angular_period <= self.perturbation_amplitude

    @property
    def support_radius(self) -> float:
        """Radius of the smallest origin-centred ball holding {u0 > 0}."""
        if self.perturbation_amplitude > 0.0:
            return max(CAP_SUPPORT, self.perturbation_envelope[1])
        return CAP_SUPPORT

    def to_dict(self) -> dict:
        data = asdict(self)
        data["perturbation_envelope"] = list(self.perturbation_envelope)
        return data


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    measured: float
    bound: float
    advisory: bool = False
    detail: str = ""


def _finite_dict(data: dict) -> dict:
    return {
        key: (None if isinstance(value, float) and not math.isfinite(value) else value)
        for key, value in data.items()
    }


class ValidationReport:
    """
    Outcome of validate(); required checks decide passed, advisory ones only warn.
    """

    def __init__(self, checks: List[ValidationCheck]):
        self._checks = list(checks)

    @property
    def checks(self) -> List[ValidationCheck]:
        return list(self._checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self._checks if not c.advisory)

    def failures(self, advisory: Optional[bool] = None) -> List[ValidationCheck]:
        return [
            c for c in self._checks if not c.passed and (advisory is None or c.advisory == advisory)
        ]

    def get(self, name: str) -> ValidationCheck:
        for check in self._checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [_finite_dict(asdict(c)) for c in self._checks],
        }


class InitialDataBuilder:
    """Samples phi0 and rho at cell centres."""

    def __init__(self, spec: InitialDataSpec):
        self.spec = spec

    def cap(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        r2 = x ** 2 + y ** 2
        return self.spec.cap_amplitude * np.maximum(1.0 - r2, 0.0)

    def perturbation(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        spec = self.spec
        if spec.perturbation_amplitude == 0.0:
            return np.zeros(np.broadcast(x, y).shape)
        r_lo, r_hi = spec.perturbation_envelope
        theta = np.arctan2(y, x)
        angular = np.cos(0.5 * spec.angular_mode * theta) ** 2
        return spec.perturbation_amplitude * envelope_bump(np.hypot(x, y), r_lo, r_hi) * angular

    def build(self, grid: GridSpec) -> ScalarField:
        """
        Sample u0 on a grid.

        Args:
            grid: Target grid, with half_width > M

        Returns:
            The initial field at t = 0

        Raises:
            SpecificationError: If the support leaves B_M or reaches the boundary ring
        """
        spec = self.spec
        if not grid.contains_ball(spec.M):
            raise SpecificationError(f"grid half_width {grid.half_width} must exceed M = {spec.M}")
        support = spec.support_radius
        if support > spec.M:
            raise SpecificationError(f"support radius {support} escapes B_M with M = {spec.M}")
        if support >= grid.half_width - 0.5 * grid.spacing:
            raise SpecificationError("support reaches the boundary ring of the grid")
        x, y = grid.mesh()
        values = self.cap(x, y) + self.perturbation(x, y)
        logger.debug("Built initial data on %r: max=%.4g", grid, values.max())
        return ScalarField(grid, values, 0.0)

    def build_radial(self, dimension: int, r_max: float, cells: int) -> RadialField:
        """Radial cap A (1 - r^2)+ on a radial grid; the angular perturbation has no radial counterpart."""
        if self.spec.perturbation_amplitude > 0.0:
            logger.warning("Radial initial data drops the angular perturbation (alpha=%.3g)",
                           self.spec.perturbation_amplitude)
        if r_max <= CAP_SUPPORT:
            raise SpecificationError(f"radial domain r_max={r_max} must exceed the cap support")
        amplitude = self.spec.cap_amplitude
        return RadialField.from_function(
            dimension, r_max, cells, lambda r: amplitude * np.maximum(1.0 - r ** 2, 0.0)
        )


def build(spec: InitialDataSpec, grid: GridSpec) -> ScalarField:
    """u0 = phi0 + rho sampled at cell centres; see InitialDataBuilder.build."""
    return InitialDataBuilder(spec).build(grid)


def self_similar_field(profile, grid: GridSpec, T: float) -> ScalarField:
    """U(., 0) for extinction time T on a Cartesian grid."""
    values = self_similar_radial(profile, grid.radii(), 0.0, T)
    field = ScalarField(grid, values, 0.0)
    if field.check_invariants():
        raise SpecificationError("self-similar support reaches the boundary ring")
    return field


def radial_self_similar_field(profile, dimension: int, r_max: float, cells: int, T: float) -> RadialField:
    """U(., 0) for extinction time T on radial nodes."""
    if profile.support_radius * math.sqrt(T) >= r_max:
        raise SpecificationError("self-similar support does not fit inside r_max")
    return RadialField.from_function(dimension, r_max, cells, lambda r: self_similar_radial(profile, r, 0.0, T))


def _laplacian_check(field: ScalarField) -> ValidationCheck:
    u = field.values
    mask = u > 0.0
    interior = ndimage.binary_erosion(mask)
    laplacian = field.laplacian().values
    if not interior.any():
        return ValidationCheck("laplacian_nonpositive", True, 0.0, 0.0, advisory=True,
                               detail="no interior cells")
    masked = np.where(interior, laplacian, -np.inf)
    index = np.unravel_index(int(np.argmax(masked)), u.shape)
    worst = float(masked[index])
    detail = ""
    if worst > 0.0:
        x, y = field.grid.coordinates()[index[0]], field.grid.coordinates()[index[1]]
        detail = f"cell {tuple(int(i) for i in index)} at ({x:.4f}, {y:.4f})"
    return ValidationCheck("laplacian_nonpositive", worst <= 0.0, worst, 0.0, advisory=True, detail=detail)


def _boundary_gradient_check(field: ScalarField) -> ValidationCheck:
    u = field.values
    mask = u > 0.0
    band = mask & ndimage.binary_dilation(~mask, iterations=BOUNDARY_BAND_CELLS)
    bound = 1.0 + 4.0 * field.grid.spacing
    if not band.any():
        return ValidationCheck("boundary_gradient", True, 0.0, bound, advisory=True, detail="empty boundary band")
    gradient = field.gradient_magnitude().values
    worst = float(gradient[band].max())
    return ValidationCheck("boundary_gradient", worst <= bound, worst, bound, advisory=True)


def _simply_connected_check(field: ScalarField) -> ValidationCheck:
    mask = field.values > 0.0
    _, inside = ndimage.label(mask)
    _, outside = ndimage.label(~mask)
    passed = inside == 1 and outside == 1
    return ValidationCheck(
        "simply_connected", passed, float(inside + outside), 2.0, advisory=True,
        detail=f"{inside} positive component(s), {outside} complementary component(s)",
    )


def validate(field: ScalarField, spec: InitialDataSpec) -> ValidationReport:
    """
    Measure the admissibility of an initial field.

    Required checks: support inside B_M, sup|grad u0| <= M, max phi0 >= 1/M,
    and 0 <= rho <= alpha on cells. Advisory checks: Laplacian <= 0 on the
    interior of the positive set, |grad u0| <= 1 (+4h) within two cells of its
    boundary, simple connectivity, sup|grad rho| <= alpha and the angular
    period condition.

    Args:
        field: Initial field
        spec: The parameters it was built from

    Returns:
        The report; failing advisory checks are logged as warnings
    """
    grid = field.grid
    u = field.values
    positive = u > 0.0
    support = float(field.radii()[positive].max()) if positive.any() else 0.0
    gradient_sup = float(field.gradient_magnitude().values.max())

    builder = InitialDataBuilder(spec)
    x, y = grid.mesh()
    rho = builder.perturbation(x, y)
    alpha = spec.perturbation_amplitude
    h = grid.spacing
    rho_gradient = np.hypot(*np.gradient(rho, h, h, edge_order=1))

    checks = [
        ValidationCheck("support_in_ball", support < spec.M, support, spec.M),
        ValidationCheck("gradient_bound", gradient_sup <= spec.M, gradient_sup, spec.M),
        ValidationCheck("cap_peak", spec.cap_amplitude >= 1.0 / spec.M, spec.cap_amplitude, 1.0 / spec.M),
        ValidationCheck(
            "perturbation_bounds",
            bool(rho.min() >= 0.0 and rho.max() <= alpha),
            float(rho.max()),
            alpha,
        ),
        _laplacian_check(field),
        _boundary_gradient_check(field),
        _simply_connected_check(field),
        ValidationCheck(
            "perturbation_gradient", float(rho_gradient.max()) <= alpha, float(rho_gradient.max()), alpha,
            advisory=True,
        ),
        ValidationCheck(
            "period_condition", spec.period_condition, spec.angular_period, alpha, advisory=True,
        ),
    ]
    report = ValidationReport(checks)
    for check in report.failures(advisory=True):
        logger.warning("Advisory check %s failed: measured %.4g vs %.4g %s",
                       check.name, check.measured, check.bound, check.detail)
    for check in report.failures(advisory=False):
        logger.error("Check %s failed: measured %.4g vs %.4g", check.name, check.measured, check.bound)
    return report
