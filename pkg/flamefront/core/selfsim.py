"""
Self-similar extinction profiles.

The profile f solves f'' + ((n-1)/r - r/2) f' + f/2 = 0 on (0, R) with
f'(0) = 0, f > 0 on [0, R), f(R) = 0 and f'(R) = -1. The equation is linear
and homogeneous, so one shot from f(0) = 1 followed by a rescale replaces
the two-parameter search: the first zero R is independent of f(0), and
lambda = -1/f'(R) fixes the slope condition.

U(x, t) = sqrt(T - t) f(|x| / sqrt(T - t)) is then an exact solution with
max U = a1 sqrt(T - t) and support radius a2 sqrt(T - t), a1 = f(0), a2 = R.
"""
import logging
import math
from typing import List, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from core.errors import DomainError, ParameterError, ProfileNotFoundError

logger = logging.getLogger(__name__)

SERIES_START = 1e-4
SEARCH_CAP = 50.0
DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_STEP = 2e-3
RESIDUAL_POINTS = 1000


def _rhs(r: float, y: np.ndarray, dimension: int) -> np.ndarray:
    f, g = y
    return np.array([g, -((dimension - 1) / r - 0.5 * r) * g - 0.5 * f])


def _rk4(r: float, y: np.ndarray, h: float, dimension: int) -> np.ndarray:
    k1 = _rhs(r, y, dimension)
    k2 = _rhs(r + 0.5 * h, y + 0.5 * h * k1, dimension)
    k3 = _rhs(r + 0.5 * h, y + 0.5 * h * k2, dimension)
    k4 = _rhs(r + h, y + h * k3, dimension)
    return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def _rk4_halved(r: float, y: np.ndarray, h: float, dimension: int) -> np.ndarray:
    mid = _rk4(r, y, 0.5 * h, dimension)
    return _rk4(r + 0.5 * h, mid, 0.5 * h, dimension)


def _series_start(dimension: int, f0: float) -> Tuple[float, np.ndarray]:
    # regular limit at the origin: n f''(0) = -f(0)/2
    r0 = SERIES_START
    return r0, np.array([f0 * (1.0 - r0 ** 2 / (4.0 * dimension)), -f0 * r0 / (2.0 * dimension)])


def _check_arguments(dimension: int, tolerance: float) -> None:
    if int(dimension) != dimension or dimension < 1:
        raise ParameterError(f"dimension must be an integer >= 1, got {dimension}")
    if not 1e-12 <= tolerance <= 1e-6:
        raise ParameterError(f"tolerance must lie in [1e-12, 1e-6], got {tolerance}")


class SelfSimilarProfile:
    """
    A solved profile with its sample table (r, f, f').

    Evaluation uses cubic Hermite interpolation on the table inside the
    support and returns 0 outside it.
    """

    def __init__(
        self,
        dimension: int,
        radii: np.ndarray,
        values: np.ndarray,
        slopes: np.ndarray,
    ):
        """
        Initialize a profile from its table.

        Args:
            dimension: Spatial dimension n
            radii: Increasing nodes from 0 to R
            values: f at the nodes
            slopes: f' at the nodes
        """
        self._dimension = int(dimension)
        self._radii = np.asarray(radii, dtype=float)
        self._values = np.asarray(values, dtype=float)
        self._slopes = np.asarray(slopes, dtype=float)
        curvature = self._ode_curvature(self._radii, self._values, self._slopes)
        self._spline = CubicHermiteSpline(self._radii, self._values, self._slopes)
        self._slope_spline = CubicHermiteSpline(self._radii, self._slopes, curvature)
        self._residual = self._residual_sup()
        self._monotone = bool(np.all(self._slopes <= 1e-14))
        if not self._monotone:
            logger.warning("Profile for n=%d is not monotone on its table", self._dimension)

    def _ode_curvature(self, r: np.ndarray, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        n = self._dimension
        curvature = np.empty_like(r)
        curvature[0] = -f[0] / (2.0 * n)
        curvature[1:] = -((n - 1) / r[1:] - 0.5 * r[1:]) * g[1:] - 0.5 * f[1:]
        return curvature

    def _residual_sup(self) -> float:
        # f'' is taken from the derivative of the interpolated f', not from the ODE
        n = self._dimension
        R = self.support_radius
        r = np.linspace(R / RESIDUAL_POINTS, R, RESIDUAL_POINTS)
        f = self._spline(r)
        g = self._slope_spline(r)
        g_prime = self._slope_spline(r, 1)
        residual = g_prime + ((n - 1) / r - 0.5 * r) * g + 0.5 * f
        return float(np.abs(residual).max())

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def support_radius(self) -> float:
        return float(self._radii[-1])

    @property
    def peak(self) -> float:
        return float(self._values[0])

    @property
    def a1(self) -> float:
        return self.peak

    @property
    def a2(self) -> float:
        return self.support_radius

    @property
    def ode_residual_sup(self) -> float:
        return self._residual

    @property
    def monotone(self) -> bool:
        return self._monotone

    @property
    def samples(self) -> np.ndarray:
        """Table of shape (nodes, 3) with columns r, f, f'."""
        return np.column_stack([self._radii, self._values, self._slopes])

    def boundary_values(self) -> Tuple[float, float]:
        """(f(R), f'(R)) as stored in the table."""
        return float(self._values[-1]), float(self._slopes[-1])

    def evaluate(self, r):
        """
        Evaluate f at one or more radii.

        Args:
            r: Nonnegative radius or array of radii

        Returns:
            f(r) inside the support, 0 beyond R

        Raises:
            DomainError: If a radius is negative
        """
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < 0.0):
            raise DomainError("profile radius must be nonnegative")
        R = self.support_radius
        inside = r_arr <= R
        out = np.where(inside, self._spline(np.minimum(r_arr, R)), 0.0)
        if np.ndim(r) == 0:
            return float(out)
        return out

    def derivative(self, r):
        r_arr = np.asarray(r, dtype=float)
        R = self.support_radius
        out = np.where(r_arr <= R, self._spline(np.clip(r_arr, 0.0, R), 1), 0.0)
        if np.ndim(r) == 0:
            return float(out)
        return out

    def to_dict(self) -> dict:
        return {
            "n": self._dimension,
            "R": self.support_radius,
            "a1": self.peak,
            "residual": self._residual,
        }

    def __repr__(self) -> str:
        return f"SelfSimilarProfile(n={self._dimension}, R={self.support_radius:.10f}, a1={self.peak:.10f})"


def shoot_rk4(
    dimension: int,
    tolerance: float = DEFAULT_TOLERANCE,
    f0: float = 1.0,
    max_step: float = DEFAULT_MAX_STEP,
) -> Tuple[List[float], List[np.ndarray], float, np.ndarray]:
    """
    Integrate from the series start to the first zero with step-doubling RK4.

    Args:
        dimension: Spatial dimension n
        tolerance: Target accuracy of the zero R
        f0: Value f(0) of the unscaled shot
        max_step: Upper bound on the step length

    Returns:
        (nodes, states, R, state at R) for the unscaled profile

    Raises:
        ProfileNotFoundError: If f stays positive up to r = 50
    """
    local_tol = tolerance * 1e-3
    r, y = _series_start(dimension, f0)
    nodes = [0.0, r]
    states = [np.array([f0, 0.0]), y]
    h = min(1e-3, max_step)
    steps = rejected = 0

    while r < SEARCH_CAP:
        coarse = _rk4(r, y, h, dimension)
        fine = _rk4_halved(r, y, h, dimension)
        error = float(np.abs(fine - coarse).max()) / 15.0
        if error > local_tol and h > 1e-8:
            h *= max(0.2, 0.9 * (local_tol / error) ** 0.2)
            rejected += 1
            continue
        steps += 1
        if fine[0] <= 0.0:
            lo, hi = 0.0, h
            while hi - lo > tolerance * 1e-3 and hi - lo > 1e-15:
                mid = 0.5 * (lo + hi)
                if _rk4_halved(r, y, mid, dimension)[0] > 0.0:
                    lo = mid
                else:
                    hi = mid
            s = 0.5 * (lo + hi)
            root_state = _rk4_halved(r, y, s, dimension)
            root = r + s
            if root - nodes[-1] <= 1e-14:
                nodes.pop()
                states.pop()
            logger.debug(
                "RK4 shot n=%d: R=%.12f after %d steps (%d rejected)", dimension, root, steps, rejected
            )
            return nodes, states, root, root_state
        r, y = r + h, fine
        nodes.append(r)
        states.append(y)
        growth = 2.0 if error == 0.0 else min(2.0, max(0.5, 0.9 * (local_tol / error) ** 0.2))
        h = min(max_step, h * growth)

    raise ProfileNotFoundError(f"no sign change of the profile before r = {SEARCH_CAP} for n={dimension}")


def solve_profile(
    n: int,
    tolerance: float = DEFAULT_TOLERANCE,
    f0: float = 1.0,
    max_step: float = DEFAULT_MAX_STEP,
) -> SelfSimilarProfile:
    """
    Solve the profile equation and rescale so that f'(R) = -1.

    Args:
        n: Spatial dimension (>= 1)
        tolerance: Accuracy target for R, in [1e-12, 1e-6]
        f0: Starting value of the unscaled shot; the result does not depend on it
        max_step: Upper bound on the RK4 step

    Returns:
        The rescaled profile

    Raises:
        ParameterError: If n or tolerance is out of range
        ProfileNotFoundError: If no zero is found before r = 50
    """
    _check_arguments(n, tolerance)
    nodes, states, root, root_state = shoot_rk4(n, tolerance, f0, max_step)
    scale = -1.0 / root_state[1]
    radii = np.array(nodes + [root])
    table = np.array(states + [root_state]) * scale
    profile = SelfSimilarProfile(n, radii, table[:, 0], table[:, 1])
    logger.info("Profile n=%d: R=%.10f a1=%.10f residual=%.2e", n, root, profile.peak, profile.ode_residual_sup)
    return profile


def shoot_rk45(n: int, tolerance: float = DEFAULT_TOLERANCE) -> Tuple[float, float]:
    """
    Independent shot with the embedded 5(4) Dormand-Prince pair.

    Args:
        n: Spatial dimension
        tolerance: Accuracy target for R

    Returns:
        (R, a1) of the rescaled profile

    Raises:
        ProfileNotFoundError: If no zero is found before r = 50
    """
    _check_arguments(n, tolerance)
    r0, y0 = _series_start(n, 1.0)

    def crossing(r, y):
        return y[0]

    crossing.terminal = True
    crossing.direction = -1

    solution = solve_ivp(
        lambda r, y: _rhs(r, y, n),
        (r0, SEARCH_CAP),
        y0,
        method="RK45",
        rtol=max(tolerance * 1e-2, 1e-13),
        atol=1e-14,
        max_step=0.01,
        events=crossing,
    )
    if solution.status != 1 or len(solution.t_events[0]) == 0:
        raise ProfileNotFoundError(f"RK45 found no sign change before r = {SEARCH_CAP} for n={n}")
    root = float(solution.t_events[0][0])
    slope = float(solution.y_events[0][0][1])
    return root, -1.0 / slope


def eval_profile(profile: SelfSimilarProfile, r):
    """f(r) with f = 0 beyond the support."""
    return profile.evaluate(r)


def self_similar_radial(profile: SelfSimilarProfile, r, t: float, T: float):
    """
    U as a function of radius.

    Raises:
        DomainError: If t > T
    """
    if t > T:
        raise DomainError(f"self-similar solution undefined for t={t} > T={T}")
    tau = T - t
    r_arr = np.asarray(r, dtype=float)
    if tau == 0.0:
        out = np.zeros_like(r_arr)
    else:
        root = math.sqrt(tau)
        out = root * profile.evaluate(r_arr / root)
    if np.ndim(r) == 0:
        return float(out)
    return out


def self_similar_U(profile: SelfSimilarProfile, x, t: float, T: float):
    """
    Evaluate U(x, t) = sqrt(T - t) f(|x| / sqrt(T - t)).

    Args:
        profile: Solved profile
        x: A point (sequence of coordinates) or an array of points along the last axis
        t: Time
        T: Extinction time

    Returns:
        U at the point(s); 0 at t = T

    Raises:
        DomainError: If t > T
    """
    coordinates = np.asarray(x, dtype=float)
    radius = np.linalg.norm(coordinates, axis=-1) if coordinates.ndim >= 1 else np.abs(coordinates)
    return self_similar_radial(profile, radius, t, T)
