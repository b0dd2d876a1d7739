"""
Explicit Euler integration of u_t = L u - (1/eps) beta(u/eps) to extinction.

ExplicitSolver holds everything the Cartesian and radial solvers share:
the limited sink, the run loop with its series/snapshot bookkeeping, and
the ordered-pair comparison run. Subclasses supply the spatial operator.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from analysis.asymptotics import estimate_extinction
from core.errors import EstimationError, PreconditionError, SpecificationError
from core.reaction import BetaKernel
from core.records import RunRecord, SeriesSample, SolverParams

logger = logging.getLogger(__name__)

RESOLUTION_RATIO = 4.0


class ExplicitSolver:
    """
    Base class for explicit monotone solvers.

    A run moves through three phases, like a small state machine:
    RUNNING until max u drops below the extinction threshold (EXTINCT) or
    the step budget runs out (INCOMPLETE).
    """

    RUNNING = 0
    EXTINCT = 1
    INCOMPLETE = 2

    def __init__(self, params: SolverParams, kernel: BetaKernel):
        """
        Initialize the solver.

        Args:
            params: Solver parameters
            kernel: Reaction kernel
        """
        self.params = params
        self.kernel = kernel

    # Hooks for subclasses

    def _operator(self, values: np.ndarray, field) -> np.ndarray:
        raise NotImplementedError

    def _diffusion_weight(self, field) -> float:
        raise NotImplementedError

    def _spacing(self, field) -> float:
        raise NotImplementedError

    def _apply_boundary(self, values: np.ndarray) -> None:
        raise NotImplementedError

    def _geometry(self, field, level: float):
        raise NotImplementedError

    # Shared machinery

    def time_step(self, field) -> float:
        """Resolved, stability-checked time step for the field's grid."""
        return self.params.time_step(self._spacing(field), self.kernel, self._diffusion_weight(field))

    def _advance(self, values: np.ndarray, dt: float, field) -> np.ndarray:
        eps = self.params.eps
        laplacian = self._operator(values, field)
        sink = self.kernel.reaction_sink_array(values, eps)
        limited = np.minimum(sink, values / dt)
        updated = values + dt * (laplacian - limited)
        # rounding guard; the limiter keeps the exact update nonnegative
        np.maximum(updated, 0.0, out=updated)
        self._apply_boundary(updated)
        return updated

    def step(self, field):
        """
        Advance a field by one explicit step.

        u_new = u + dt (L u - min((1/eps) beta(u/eps), u/dt)), clipped at 0,
        with the far-field boundary kept at 0.

        Args:
            field: Current snapshot

        Returns:
            The snapshot one time step later

        Raises:
            ConfigurationError: If an explicit time step violates the stability bound
        """
        dt = self.time_step(field)
        values = self._advance(np.array(field.values), dt, field)
        return field.with_values(values, field.time + dt)

    def _check_initial(self, initial) -> None:
        problems = initial.check_invariants()
        if problems:
            raise SpecificationError("initial field is not admissible: " + "; ".join(problems))
        spacing = self._spacing(initial)
        if self.params.eps < RESOLUTION_RATIO * spacing:
            logger.warning(
                "eps=%.4g is below %.0f h (h=%.4g): reaction layer under-resolved",
                self.params.eps,
                RESOLUTION_RATIO,
                spacing,
            )
        if self.params.cfl_safety > 0.5:
            logger.warning(
                "cfl_safety=%.3g > 1/2: the one-step map is no longer guaranteed monotone",
                self.params.cfl_safety,
            )

    def run(self, initial, geometry_level: Optional[float] = None) -> RunRecord:
        """
        Step from the initial field until extinction or the step budget.

        Args:
            initial: Admissible initial field
            geometry_level: If given, a BoundaryGeometry is stored with every series sample

        Returns:
            The run record; completed is False when max_steps ran out first

        Raises:
            SpecificationError: If the initial field violates its invariants
        """
        self._check_initial(initial)
        dt = self.time_step(initial)
        logger.info(
            "Run start: %r, dt=%.4e, max_steps=%d", self.params, dt, self.params.max_steps
        )
        integration = _Integration(self, initial, dt, geometry_level)
        while integration.phase == self.RUNNING:
            integration.advance()
        return integration.finalize()

    def run_pair_ordered(self, initial_low, initial_high) -> Tuple[RunRecord, RunRecord, float]:
        """
        Run two ordered initial fields on one step schedule and measure ordering.

        Args:
            initial_low: Lower initial field
            initial_high: Upper initial field, >= initial_low cell by cell

        Returns:
            (low record, high record, ordering violation), the violation being
            the largest (u_low - u_high)+ over recorded times and cells

        Raises:
            PreconditionError: If the inputs are not ordered
        """
        if initial_low.values.shape != initial_high.values.shape:
            raise PreconditionError("ordered pair must live on the same grid")
        if np.any(initial_low.values > initial_high.values):
            raise PreconditionError("initial_low exceeds initial_high somewhere")
        self._check_initial(initial_low)
        self._check_initial(initial_high)

        dt = self.time_step(initial_high)
        low = _Integration(self, initial_low, dt, None)
        high = _Integration(self, initial_high, dt, None)
        violation = _ordering_violation(low.values, high.values)
        while low.phase == self.RUNNING or high.phase == self.RUNNING:
            recorded_low = low.advance()
            recorded_high = high.advance()
            if recorded_low or recorded_high:
                violation = max(violation, _ordering_violation(low.values, high.values))
        violation = max(violation, _ordering_violation(low.values, high.values))
        return low.finalize(), high.finalize(), violation


def _ordering_violation(low: np.ndarray, high: np.ndarray) -> float:
    return float(np.maximum(low - high, 0.0).max())


class _Integration:
    """
    State of one run in progress.

    After the phase leaves RUNNING the values can still be advanced (the
    ordered-pair run needs that) but nothing more is recorded.
    """

    def __init__(self, solver: ExplicitSolver, initial, dt: float, geometry_level: Optional[float]):
        self.solver = solver
        self.params = solver.params
        self.template = initial
        self.dt = dt
        self.geometry_level = geometry_level
        self.values = np.array(initial.values, dtype=np.float64)
        self.steps = 0
        self.time = float(initial.time)
        self.start_time = float(initial.time)
        self.phase = ExplicitSolver.RUNNING
        self.last_max = float(self.values.max())
        self.violations = 0
        self.crossing_time = None
        self.final_steps = None
        self.series: List[SeriesSample] = []
        self.geometry = []
        self.snapshots = []
        self._pending_records = [t for t in self.params.record_times]

        self._sample()
        self._capture_snapshots()
        if self.last_max < self.params.extinction_threshold:
            self.phase = ExplicitSolver.EXTINCT
            self.crossing_time = self.time
            self.final_steps = 0

    def _field(self):
        return self.template.with_values(self.values, self.time)

    def _sample(self) -> None:
        field = self._field()
        self.series.append(SeriesSample(self.time, float(self.values.max()), field.mass()))
        if self.geometry_level is not None:
            self.geometry.append(self.solver._geometry(field, self.geometry_level))
        logger.debug("t=%.6f max_u=%.6g", self.time, self.series[-1].max_u)

    def _capture_snapshots(self) -> bool:
        captured = False
        while self._pending_records and self._pending_records[0] <= self.time:
            self._pending_records.pop(0)
            if not self.snapshots or self.snapshots[-1].time != self.time:
                self.snapshots.append(self._field())
            captured = True
        return captured

    def advance(self) -> bool:
        """
        Take one step.

        Returns:
            True if something was recorded at this step
        """
        self.values = self.solver._advance(self.values, self.dt, self.template)
        self.steps += 1
        self.time = self.start_time + self.steps * self.dt
        current_max = float(self.values.max())
        if current_max > self.last_max:
            self.violations += 1
        self.last_max = current_max
        if self.phase != ExplicitSolver.RUNNING:
            return False

        recorded = self._capture_snapshots()
        sampled = False
        if self.steps % self.params.series_stride == 0:
            self._sample()
            sampled = True
        if current_max < self.params.extinction_threshold:
            self.phase = ExplicitSolver.EXTINCT
            self.crossing_time = self.time
        elif self.steps >= self.params.max_steps:
            self.phase = ExplicitSolver.INCOMPLETE
        if self.phase != ExplicitSolver.RUNNING:
            self.final_steps = self.steps
            if not sampled:
                self._sample()
                sampled = True
        return recorded or sampled

    def finalize(self) -> RunRecord:
        record = RunRecord(
            snapshots=list(self.snapshots),
            series=list(self.series),
            geometry=list(self.geometry),
            steps_taken=self.steps if self.final_steps is None else self.final_steps,
            completed=self.phase == ExplicitSolver.EXTINCT,
            time_step=self.dt,
            extinction_threshold=self.params.extinction_threshold,
            eps=self.params.eps,
            crossing_time=self.crossing_time,
            max_principle_violations=self.violations,
        )
        if record.completed:
            try:
                estimate = estimate_extinction(
                    record, self.params.extinction_threshold, floor=2.0 * self.params.eps
                )
                record.extinction_estimate = estimate
                record.extinction_time_estimate = estimate.T_hat
            except EstimationError as exc:
                logger.warning("Extinction estimate failed (%s); using the crossing time", exc)
                record.extinction_time_estimate = self.crossing_time
            logger.info(
                "Extinct after %d steps: T_hat=%.6f", self.steps, record.extinction_time_estimate
            )
        else:
            logger.warning("Run did not extinguish within %d steps", self.steps)
        return record
