"""
Radially symmetric fields u(r) in integer dimension n >= 1.
"""
from typing import List

import numpy as np
from scipy import integrate, special

from core.errors import DomainError, ParameterError

MIN_DIMENSION = 1
MAX_DIMENSION = 6


def sphere_area(dimension: int) -> float:
    """Surface measure of the unit sphere S^{n-1} (2 for n = 1)."""
    return 2.0 * np.pi ** (dimension / 2.0) / special.gamma(dimension / 2.0)


def radial_laplacian_values(u: np.ndarray, spacing: float, dimension: int) -> np.ndarray:
    """
    Radial Laplacian r^(1-n) (r^(n-1) u_r)_r of a raw node array, in flux form.

    Node j >= 1 uses
    (r_{j+1/2}^(n-1) (u_{j+1} - u_j) - r_{j-1/2}^(n-1) (u_j - u_{j-1})) / (r_j^(n-1) h^2),
    so both neighbour weights are nonnegative for every n and the diagonal
    weight never exceeds 2n/h^2. Node 0 uses the regular limit
    2n (u_1 - u_0)/h^2. The outermost node is left at 0.
    """
    h = spacing
    k = dimension - 1
    out = np.zeros_like(u)
    out[0] = 2.0 * dimension * (u[1] - u[0]) / h ** 2
    j = np.arange(1, len(u) - 1, dtype=float)
    outer = ((j + 0.5) / j) ** k
    inner = ((j - 0.5) / j) ** k
    out[1:-1] = (outer * (u[2:] - u[1:-1]) - inner * (u[1:-1] - u[:-2])) / h ** 2
    return out


class RadialField:
    """
    Node values of a radial function on [0, r_max].

    Node j sits at r = j h with h = r_max / cells; there are cells + 1
    nodes and the last one carries the far-field Dirichlet condition.
    """

    def __init__(self, dimension: int, r_max: float, values: np.ndarray, time: float = 0.0):
        """
        Initialize a radial field.

        Args:
            dimension: Spatial dimension n in 1..6
            r_max: Radius of the outermost node
            values: Node values, node 0 at the origin
            time: Time coordinate

        Raises:
            ParameterError: If the dimension, radius or node count is invalid
        """
        if int(dimension) != dimension or not MIN_DIMENSION <= dimension <= MAX_DIMENSION:
            raise ParameterError(f"dimension must be an integer in 1..6, got {dimension}")
        if not r_max > 0.0:
            raise ParameterError(f"r_max must be positive, got {r_max}")
        array = np.array(values, dtype=np.float64)
        if array.ndim != 1 or len(array) < 3:
            raise ParameterError("a radial field needs at least three nodes")
        array.setflags(write=False)
        self._dimension = int(dimension)
        self._r_max = float(r_max)
        self._values = array
        self._time = float(time)

    @classmethod
    def from_function(cls, dimension: int, r_max: float, cells: int, func, time: float = 0.0):
        """Sample func(r) on cells + 1 equally spaced nodes."""
        r = np.linspace(0.0, r_max, cells + 1)
        return cls(dimension, r_max, func(r), time)

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def r_max(self) -> float:
        return self._r_max

    @property
    def cells(self) -> int:
        return len(self._values) - 1

    @property
    def spacing(self) -> float:
        return self._r_max / self.cells

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def time(self) -> float:
        return self._time

    def radii(self) -> np.ndarray:
        return np.arange(self.cells + 1) * self.spacing

    def with_values(self, values: np.ndarray, time: float = None) -> "RadialField":
        return RadialField(self._dimension, self._r_max, values, self._time if time is None else time)

    def max_value(self) -> float:
        return float(self._values.max())

    def mass(self) -> float:
        """Integral of u over R^n, trapezoidal in r."""
        r = self.radii()
        weight = sphere_area(self._dimension) * r ** (self._dimension - 1)
        return float(integrate.trapezoid(self._values * weight, r))

    def check_invariants(self) -> List[str]:
        violations = []
        if not np.all(np.isfinite(self._values)):
            violations.append("non-finite values")
        elif self._values.min() < 0.0:
            violations.append(f"negative value {self._values.min():.3e}")
        if self._values[-1] != 0.0:
            violations.append("nonzero outermost node")
        return violations

    def laplacian(self) -> "RadialField":
        """Radial Laplacian; see radial_laplacian_values."""
        out = radial_laplacian_values(self._values, self.spacing, self._dimension)
        return self.with_values(out)

    def gradient_magnitude(self) -> "RadialField":
        """|u_r|: zero at the origin by symmetry, one-sided at the outer node."""
        g = np.abs(np.gradient(self._values, self.spacing, edge_order=1))
        g[0] = 0.0
        return self.with_values(g)

    def sample(self, r) -> np.ndarray:
        """
        Linear interpolation in r.

        Raises:
            DomainError: If any radius is negative or beyond r_max
        """
        r = np.asarray(r, dtype=float)
        if np.any(r < 0.0) or np.any(r > self._r_max):
            raise DomainError(f"radius outside [0, {self._r_max}]")
        return np.interp(r, self.radii(), self._values)

    def __repr__(self) -> str:
        return (
            f"RadialField(n={self._dimension}, r_max={self._r_max}, cells={self.cells}, "
            f"time={self._time})"
        )
