"""
Two-dimensional Cartesian solver for the regularised flame problem.
"""
import numpy as np

from analysis.geometry import boundary_geometry
from core.explicit_solver import ExplicitSolver
from core.grid import ScalarField, five_point_laplacian


class CartesianSolver(ExplicitSolver):
    """
    Explicit five-point scheme on a GridSpec.

    Stability: dt <= cfl_safety * min(h^2/4, eps^2/sup|beta'|).
    """

    def _operator(self, values: np.ndarray, field: ScalarField) -> np.ndarray:
        return five_point_laplacian(values, field.grid.spacing)

    def _diffusion_weight(self, field: ScalarField) -> float:
        return 4.0

    def _spacing(self, field: ScalarField) -> float:
        return field.grid.spacing

    def _apply_boundary(self, values: np.ndarray) -> None:
        values[0, :] = 0.0
        values[-1, :] = 0.0
        values[:, 0] = 0.0
        values[:, -1] = 0.0

    def _geometry(self, field: ScalarField, level: float):
        return boundary_geometry(field, level)
