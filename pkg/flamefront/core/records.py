"""
Solver parameters and run records shared by the Cartesian and radial solvers.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from core.errors import ConfigurationError, ParameterError
from core.reaction import BetaKernel


class SolverParams:
    """
    Parameters of an explicit run of the regularised problem.

    The time step is derived, never chosen freely:
    dt = cfl_safety * min(h^2 / w, eps^2 / sup|beta'|), where w = 4 for the
    Cartesian five-point stencil and w = 2n for the radial one. The one-step
    map is exactly order preserving when cfl_safety <= 1/2.
    """

    DEFAULT_CFL = 0.45
    DEFAULT_MAX_STEPS = 2_000_000
    DEFAULT_SERIES_STRIDE = 10

    def __init__(
        self,
        eps: float,
        cfl_safety: float = DEFAULT_CFL,
        record_times: Sequence[float] = (),
        extinction_threshold: Optional[float] = None,
        max_steps: int = DEFAULT_MAX_STEPS,
        series_stride: int = DEFAULT_SERIES_STRIDE,
        time_step: Optional[float] = None,
    ):
        """
        Initialize solver parameters.

        Args:
            eps: Regularisation scale
            cfl_safety: Safety factor in (0, 1]
            record_times: Times at which snapshots are stored
            extinction_threshold: max-value level declaring extinction (default eps/10)
            max_steps: Step budget
            series_stride: Steps between stored (t, max_u, mass) samples
            time_step: Explicit time step; must respect the stability bound

        Raises:
            ParameterError: If any value is out of range
        """
        if not eps > 0.0:
            raise ParameterError(f"eps must be positive, got {eps}")
        if not 0.0 < cfl_safety <= 1.0:
            raise ParameterError(f"cfl_safety must lie in (0, 1], got {cfl_safety}")
        if extinction_threshold is None:
            extinction_threshold = eps / 10.0
        if not extinction_threshold > 0.0:
            raise ParameterError(f"extinction_threshold must be positive, got {extinction_threshold}")
        if max_steps < 1 or series_stride < 1:
            raise ParameterError("max_steps and series_stride must be at least 1")
        if any(t < 0.0 for t in record_times):
            raise ParameterError("record times must be nonnegative")
        self.eps = float(eps)
        self.cfl_safety = float(cfl_safety)
        self.record_times = tuple(sorted(float(t) for t in record_times))
        self.extinction_threshold = float(extinction_threshold)
        self.max_steps = int(max_steps)
        self.series_stride = int(series_stride)
        self.explicit_time_step = time_step

    def stability_bound(self, spacing: float, kernel: BetaKernel, diffusion_weight: float) -> float:
        """Largest stable step before the safety factor is applied."""
        return min(spacing ** 2 / diffusion_weight, self.eps ** 2 / kernel.derivative_bound())

    def time_step(self, spacing: float, kernel: BetaKernel, diffusion_weight: float) -> float:
        """
        Resolve the time step for a grid.

        Args:
            spacing: Grid spacing h
            kernel: Reaction kernel (for sup|beta'|)
            diffusion_weight: 4 for the five-point stencil, 2n for the radial one

        Returns:
            The time step

        Raises:
            ConfigurationError: If an explicit step exceeds the stability bound
        """
        bound = self.cfl_safety * self.stability_bound(spacing, kernel, diffusion_weight)
        if self.explicit_time_step is None:
            return bound
        dt = float(self.explicit_time_step)
        if not 0.0 < dt <= bound:
            raise ConfigurationError(
                f"time step {dt:.3e} violates the stability bound {bound:.3e}", key="solver.time_step"
            )
        return dt

    def with_record_times(self, record_times: Sequence[float]) -> "SolverParams":
        return SolverParams(
            self.eps,
            self.cfl_safety,
            record_times,
            self.extinction_threshold,
            self.max_steps,
            self.series_stride,
            self.explicit_time_step,
        )

    def __repr__(self) -> str:
        return (
            f"SolverParams(eps={self.eps}, cfl_safety={self.cfl_safety}, "
            f"threshold={self.extinction_threshold}, max_steps={self.max_steps})"
        )


@dataclass(frozen=True)
class SeriesSample:
    """One row of the diagnostic time series."""

    t: float
    max_u: float
    mass: float


@dataclass
class RunRecord:
    """
    Everything a run produced.

    series times are strictly increasing and max_u is nonincreasing along
    them; max_principle_violations counts step-to-step increases of the
    maximum over the whole run and is zero for a correct run.
    """

    snapshots: list = field(default_factory=list)
    series: List[SeriesSample] = field(default_factory=list)
    geometry: list = field(default_factory=list)
    extinction_time_estimate: Optional[float] = None
    extinction_estimate: Optional[object] = None
    steps_taken: int = 0
    completed: bool = False
    time_step: float = 0.0
    extinction_threshold: float = 0.0
    eps: float = 0.0
    crossing_time: Optional[float] = None
    max_principle_violations: int = 0

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.series])

    def max_values(self) -> np.ndarray:
        return np.array([s.max_u for s in self.series])

    def masses(self) -> np.ndarray:
        return np.array([s.mass for s in self.series])

    def snapshot_times(self) -> List[float]:
        return [snap.time for snap in self.snapshots]

    def nearest_snapshot(self, t: float):
        """
        Get the snapshot whose time is closest to t.

        Returns:
            The snapshot, or None if nothing was recorded
        """
        if not self.snapshots:
            return None
        return min(self.snapshots, key=lambda snap: abs(snap.time - t))
