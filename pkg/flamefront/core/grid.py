"""
Uniform Cartesian grid and scalar fields for the flame front laboratory.

The grid owns the cell layout and validates positions. Fields are immutable
snapshots of the temperature deficit u on that grid together with the
discrete operators of the heat equation.
"""
import logging
from typing import Callable, List, Tuple

import numpy as np
from scipy import ndimage

from core.errors import DomainError, ParameterError

logger = logging.getLogger(__name__)


class GridSpec:
    """
    Origin-centred square grid [-W, W]^2 split into cells_per_axis^2 cells.

    Cell centres sit at -W + (i + 1/2) h, so an odd cell count puts a
    centre exactly on the origin, which is where the inscribed and
    circumscribed radii are measured from.
    """

    DIMENSION = 2
    MIN_CELLS = 16

    def __init__(self, half_width: float, cells_per_axis: int):
        """
        Initialize a grid.

        Args:
            half_width: Half side length W of the domain square
            cells_per_axis: Number of cells along each axis

        Raises:
            ParameterError: If W is not positive or there are fewer than 16 cells
        """
        if not half_width > 0:
            raise ParameterError(f"half_width must be positive, got {half_width}")
        if int(cells_per_axis) != cells_per_axis or cells_per_axis < self.MIN_CELLS:
            raise ParameterError(
                f"cells_per_axis must be an integer >= {self.MIN_CELLS}, got {cells_per_axis}"
            )
        self._half_width = float(half_width)
        self._cells = int(cells_per_axis)
        if self._cells % 2 == 0:
            logger.warning("Even cell count %d: no cell centre sits on the origin", self._cells)

    @property
    def half_width(self) -> float:
        return self._half_width

    @property
    def cells_per_axis(self) -> int:
        return self._cells

    @property
    def spacing(self) -> float:
        return 2.0 * self._half_width / self._cells

    @property
    def dimension(self) -> int:
        return self.DIMENSION

    @property
    def shape(self) -> Tuple[int, int]:
        return (self._cells, self._cells)

    def coordinates(self) -> np.ndarray:
        """
        Get the cell-centre coordinates along one axis.

        Returns:
            1-D array of length cells_per_axis
        """
        # -W + (i + 1/2) h; mirrored centres are exact negatives
        offsets = np.arange(self._cells) + 0.5 - 0.5 * self._cells
        return offsets * self.spacing

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Cell-centre coordinate arrays (x, y), indexed [i, j] with i along x."""
        axis = self.coordinates()
        return np.meshgrid(axis, axis, indexing="ij")

    def radii(self) -> np.ndarray:
        """Distance of every cell centre from the origin."""
        x, y = self.mesh()
        return np.hypot(x, y)

    def is_valid_point(self, x: float, y: float) -> bool:
        """
        Check if a point lies inside the closed domain square.

        Args:
            x: First coordinate
            y: Second coordinate

        Returns:
            True if the point is inside [-W, W]^2
        """
        w = self._half_width
        return -w <= x <= w and -w <= y <= w

    def contains_ball(self, radius: float) -> bool:
        """True if the domain strictly contains the ball of the given radius."""
        return self._half_width > radius

    def to_index_coordinates(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        """Convert physical coordinates to fractional cell indices."""
        h = self.spacing
        fi = (np.asarray(x, dtype=float) + self._half_width) / h - 0.5
        fj = (np.asarray(y, dtype=float) + self._half_width) / h - 0.5
        return fi, fj

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridSpec):
            return NotImplemented
        return self._half_width == other._half_width and self._cells == other._cells

    def __hash__(self) -> int:
        return hash((self._half_width, self._cells))

    def __repr__(self) -> str:
        return f"GridSpec(half_width={self._half_width}, cells_per_axis={self._cells})"


def five_point_laplacian(u: np.ndarray, spacing: float) -> np.ndarray:
    """Five-point Laplacian of a raw array; the outer ring is left at zero."""
    out = np.zeros_like(u)
    out[1:-1, 1:-1] = (
        u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]
    ) / spacing ** 2
    return out


class ScalarField:
    """
    Snapshot of u on a GridSpec at a given time.

    Values are copied on construction and frozen; every operator returns a
    new field.
    """

    def __init__(self, grid: GridSpec, values: np.ndarray, time: float = 0.0):
        """
        Initialize a field.

        Args:
            grid: The grid the values live on
            values: Array of shape grid.shape
            time: Time coordinate of the snapshot

        Raises:
            ParameterError: If the array shape does not match the grid
        """
        array = np.array(values, dtype=np.float64)
        if array.shape != grid.shape:
            raise ParameterError(f"values shape {array.shape} does not match grid {grid.shape}")
        array.setflags(write=False)
        self._grid = grid
        self._values = array
        self._time = float(time)

    @classmethod
    def from_function(cls, grid: GridSpec, func: Callable, time: float = 0.0) -> "ScalarField":
        """
        Sample a function of (x, y) at the cell centres.

        Args:
            grid: Target grid
            func: Vectorised callable func(x, y) -> array
            time: Time coordinate

        Returns:
            The sampled field
        """
        x, y = grid.mesh()
        return cls(grid, func(x, y), time)

    @classmethod
    def zeros(cls, grid: GridSpec, time: float = 0.0) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape), time)

    @property
    def grid(self) -> GridSpec:
        return self._grid

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def time(self) -> float:
        return self._time

    def with_values(self, values: np.ndarray, time: float = None) -> "ScalarField":
        """New field on the same grid; keeps the time unless one is given."""
        return ScalarField(self._grid, values, self._time if time is None else time)

    def radii(self) -> np.ndarray:
        return self._grid.radii()

    def max_value(self) -> float:
        return float(self._values.max())

    def mass(self) -> float:
        """Integral of u over the domain (midpoint rule)."""
        return float(self._values.sum() * self._grid.spacing ** 2)

    def check_invariants(self) -> List[str]:
        """
        Check nonnegativity and the zero far-field ring.

        Returns:
            List of human-readable violations; empty if the field is admissible
        """
        violations = []
        u = self._values
        if not np.all(np.isfinite(u)):
            violations.append("non-finite values")
        elif u.min() < 0.0:
            violations.append(f"negative value {u.min():.3e}")
        ring = np.concatenate([u[0, :], u[-1, :], u[:, 0], u[:, -1]])
        if np.any(ring != 0.0):
            violations.append(f"nonzero boundary ring (max {np.abs(ring).max():.3e})")
        return violations

    def laplacian(self) -> "ScalarField":
        """
        Five-point Laplacian at interior cells, zero on the boundary ring.

        Returns:
            A new field holding the discrete Laplacian
        """
        out = five_point_laplacian(self._values, self._grid.spacing)
        return ScalarField(self._grid, out, self._time)

    def gradient_magnitude(self) -> "ScalarField":
        """
        |grad u| by np.gradient.

        Cells off the outer ring use second-order central differences. The
        outermost ring of cells uses first-order one-sided differences
        (edge_order=1), so gradient_bound_check and any check reading the
        ring are only first-order accurate there.

        Returns:
            A new field holding the gradient magnitude
        """
        h = self._grid.spacing
        gx, gy = np.gradient(self._values, h, h, edge_order=1)
        return ScalarField(self._grid, np.hypot(gx, gy), self._time)

    def sample(self, point: Tuple[float, float]) -> float:
        """
        Bilinear interpolation of the cell values at a point.

        Args:
            point: (x, y) coordinates inside the domain square

        Returns:
            Interpolated value

        Raises:
            DomainError: If the point is outside the domain square
        """
        x, y = point
        if not self._grid.is_valid_point(x, y):
            raise DomainError(f"point ({x}, {y}) lies outside the domain square")
        return float(self.sample_many(np.array([x]), np.array([y]))[0])

    def sample_many(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """
        Vectorised bilinear sampling.

        Points between the outermost cell centres and the domain edge take the
        nearest edge value.

        Raises:
            DomainError: If any point lies outside the domain square
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = self._grid.half_width
        if np.any(np.abs(x) > w) or np.any(np.abs(y) > w):
            raise DomainError("sample points lie outside the domain square")
        fi, fj = self._grid.to_index_coordinates(x, y)
        coords = np.vstack([fi.ravel(), fj.ravel()])
        sampled = ndimage.map_coordinates(self._values, coords, order=1, mode="nearest")
        return sampled.reshape(x.shape)

    def __repr__(self) -> str:
        return f"ScalarField(grid={self._grid!r}, time={self._time}, max={self.max_value():.4g})"
