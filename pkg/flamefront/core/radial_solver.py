"""
Radial solver for u_t = u_rr + (n-1)/r u_r - (1/eps) beta(u/eps), n = 1..6.

Produces the radial comparison solutions and the self-similar convergence
runs. The flux-form stencil keeps every neighbour weight nonnegative, so
the discrete maximum principle holds for every n.
"""
import numpy as np

from analysis.geometry import radial_geometry
from core.explicit_solver import ExplicitSolver
from core.radial_field import RadialField, radial_laplacian_values


def radial_laplacian(field: RadialField) -> RadialField:
    """
    Radial Laplacian of a field.

    Node 0 uses 2n (u_1 - u_0)/h^2; interior nodes use the flux form with
    r^(n-1) weights at the half nodes; the outer node is 0.
    """
    return field.laplacian()


class RadialSolver(ExplicitSolver):
    """Explicit scheme on radial nodes; dt <= cfl_safety * min(h^2/(2n), eps^2/sup|beta'|)."""

    def _operator(self, values: np.ndarray, field: RadialField) -> np.ndarray:
        return radial_laplacian_values(values, field.spacing, field.dimension)

    def _diffusion_weight(self, field: RadialField) -> float:
        return 2.0 * field.dimension

    def _spacing(self, field: RadialField) -> float:
        return field.spacing

    def _apply_boundary(self, values: np.ndarray) -> None:
        values[-1] = 0.0

    def _geometry(self, field: RadialField, level: float):
        return radial_geometry(field, level)

    def radial_step(self, field: RadialField) -> RadialField:
        """One explicit step of the radial scheme."""
        return self.step(field)

    def radial_run(self, initial: RadialField, geometry_level: float = None):
        """Run a radial field to extinction; see ExplicitSolver.run."""
        return self.run(initial, geometry_level)
