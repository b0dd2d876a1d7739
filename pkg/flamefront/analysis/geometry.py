"""
Free boundary geometry of field snapshots.

The positivity set of a regularised solution is read at a level theta:
S = {cells with u > theta}. Radii are measured from the origin, which is the
focusing point for angularly periodic data.
"""
import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from core.errors import ParameterError
from core.grid import ScalarField
from core.radial_field import RadialField

logger = logging.getLogger(__name__)

MIN_ANGULAR_SAMPLES = 64
CSV_COLUMNS = ("t", "r_in", "r_out", "flatness", "level", "extinct")


@dataclass(frozen=True)
class BoundaryGeometry:
    """
    Inscribed/circumscribed radii of the positivity set at one time.

    flatness = 1 - r_in / r_out. It is 0 for a disc about the origin and
    reaches 1 only when the origin itself is outside the set.
    """

    time: float
    r_in: float
    r_out: float
    flatness: float
    level: float
    extinct: bool

    def to_row(self) -> dict:
        row = asdict(self)
        row["t"] = row.pop("time")
        row["extinct"] = int(self.extinct)
        return {key: row[key] for key in CSV_COLUMNS}


def _geometry_from_mask(radii: np.ndarray, mask: np.ndarray, spacing: float, level: float, time: float):
    if not mask.any():
        return BoundaryGeometry(time, 0.0, 0.0, 0.0, level, True)
    half = 0.5 * spacing
    r_out = float(radii[mask].max()) + half
    outside = ~mask
    if outside.any():
        r_in = float(radii[outside].min()) - half
    else:
        r_in = r_out
    r_in = min(max(r_in, 0.0), r_out)
    return BoundaryGeometry(time, r_in, r_out, 1.0 - r_in / r_out, level, False)


def boundary_geometry(field: ScalarField, level: float) -> BoundaryGeometry:
    """
    Measure r_in, r_out and flatness of {u > level}.

    Args:
        field: Cartesian snapshot
        level: Threshold defining the discrete positivity set

    Returns:
        The boundary geometry; extinct if no cell exceeds the level

    Raises:
        ParameterError: If level is not positive
    """
    if not level > 0.0:
        raise ParameterError(f"level must be positive, got {level}")
    mask = field.values > level
    return _geometry_from_mask(field.radii(), mask, field.grid.spacing, level, field.time)


def radial_geometry(field: RadialField, level: float) -> BoundaryGeometry:
    """Same measurement on radial nodes, with half-node padding."""
    if not level > 0.0:
        raise ParameterError(f"level must be positive, got {level}")
    mask = field.values > level
    return _geometry_from_mask(field.radii(), mask, field.spacing, level, field.time)


def angular_sample_count(radius: float, spacing: float, minimum: int = MIN_ANGULAR_SAMPLES) -> int:
    """Angles used on a circle: at least `minimum`, and about one per cell of arc."""
    return max(minimum, int(math.ceil(2.0 * math.pi * radius / spacing)))


def circle_values(field: ScalarField, radius: float, samples: int) -> np.ndarray:
    """Bilinear samples of the field on the circle |x| = radius."""
    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    return field.sample_many(radius * np.cos(theta), radius * np.sin(theta))


def radial_minorant(field: ScalarField, radial_samples: int = MIN_ANGULAR_SAMPLES) -> RadialField:
    """
    The largest radial function below the field: the angular minimum at each radius.

    Args:
        field: Cartesian snapshot
        radial_samples: Minimum number of angles per circle (>= 64)

    Returns:
        A two-dimensional RadialField on nodes j h, h the grid spacing

    Raises:
        ParameterError: If fewer than 64 angular samples are requested
    """
    if radial_samples < MIN_ANGULAR_SAMPLES:
        raise ParameterError(f"radial_samples must be >= {MIN_ANGULAR_SAMPLES}, got {radial_samples}")
    h = field.grid.spacing
    nodes = int(math.floor((field.grid.half_width - 0.5 * h) / h + 1e-9))
    radii = np.arange(nodes + 1) * h

    xs, ys, owners = [], [], []
    for j, r in enumerate(radii):
        count = 1 if j == 0 else angular_sample_count(r, h, radial_samples)
        theta = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        xs.append(r * np.cos(theta))
        ys.append(r * np.sin(theta))
        owners.append(np.full(count, j))
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    owner = np.concatenate(owners)

    sampled = field.sample_many(x, y)
    minima = np.full(nodes + 1, np.inf)
    np.minimum.at(minima, owner, sampled)
    return RadialField(2, radii[-1], minima, field.time)
