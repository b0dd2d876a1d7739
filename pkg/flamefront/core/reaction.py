"""
Regularising reaction kernels beta and the scaled sink (1/eps) beta(u/eps).

The sink enters the discrete equation with a minus sign:
u_t = Lap u - (1/eps) beta(u/eps).
"""
import logging
from typing import Callable, Dict

import numpy as np
from scipy import integrate, optimize

from core.errors import ParameterError

logger = logging.getLogger(__name__)

TARGET_MASS = 0.5


def _smooth_bump(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0.0) & (s < 1.0)
    si = s[inside]
    out[inside] = np.exp(-1.0 / (si * (1.0 - si)))
    return out


def _smooth_bump_derivative(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0.0) & (s < 1.0)
    si = s[inside]
    q = si * (1.0 - si)
    out[inside] = np.exp(-1.0 / q) * (1.0 - 2.0 * si) / (q * q)
    return out


def _poly_bump(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0.0) & (s < 1.0)
    si = s[inside]
    out[inside] = 30.0 * si ** 2 * (1.0 - si) ** 2
    return out


def _poly_bump_derivative(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0.0) & (s < 1.0)
    si = s[inside]
    out[inside] = 60.0 * si * (1.0 - si) * (1.0 - 2.0 * si)
    return out


class BetaKernel:
    """
    A nonnegative kernel supported on [0, 1] scaled to integrate to 1/2.

    The scale c is found by adaptive quadrature at construction and the
    mass is re-checked afterwards. sup|beta'| is computed once, by dense
    sampling refined with a golden-section search, and cached: the explicit
    solvers need it for their time step.
    """

    MASS_TOLERANCE = 1e-10

    def __init__(
        self,
        name: str,
        shape: Callable[[np.ndarray], np.ndarray],
        shape_derivative: Callable[[np.ndarray], np.ndarray],
        quadrature_tolerance: float = 1e-12,
        sampling_points: int = 4096,
    ):
        """
        Initialize a kernel from an unnormalised shape.

        Args:
            name: Registry name of the kernel
            shape: Vectorised unnormalised shape g(s), zero outside (0, 1)
            shape_derivative: Vectorised g'(s)
            quadrature_tolerance: Absolute/relative tolerance for the mass quadrature
            sampling_points: Dense sample count for the sup|beta'| search

        Raises:
            ParameterError: If the shape has no mass or normalisation fails
        """
        if not 0.0 < quadrature_tolerance < 1e-6:
            raise ParameterError(f"quadrature_tolerance out of range: {quadrature_tolerance}")
        self._name = name
        self._shape = shape
        self._shape_derivative = shape_derivative
        self._quadrature_tolerance = quadrature_tolerance

        raw_mass = self._integrate(lambda s: float(shape(np.array([s]))[0]))
        if raw_mass <= 0.0:
            raise ParameterError(f"kernel {name!r} has no mass on (0, 1)")
        self._normalization = TARGET_MASS / raw_mass

        mass = self._integrate(self.beta)
        if abs(mass - TARGET_MASS) > self.MASS_TOLERANCE:
            raise ParameterError(f"kernel {name!r} normalised mass {mass!r} is not 1/2")

        self._derivative_bound = self._search_derivative_bound(sampling_points)
        logger.debug(
            "Kernel %s: c=%.12g, sup|beta'|=%.12g", name, self._normalization, self._derivative_bound
        )

    def _integrate(self, func: Callable[[float], float]) -> float:
        tol = self._quadrature_tolerance
        value, _ = integrate.quad(func, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200)
        return value

    def _search_derivative_bound(self, sampling_points: int) -> float:
        s = np.linspace(0.0, 1.0, sampling_points + 2)[1:-1]
        magnitude = np.abs(self.beta_prime_array(s))
        best = int(np.argmax(magnitude))
        if best == 0 or best == len(s) - 1:
            return float(magnitude[best])

        def negative_slope(x: float) -> float:
            return -abs(float(self.beta_prime_array(np.array([x]))[0]))

        try:
            result = optimize.minimize_scalar(
                negative_slope,
                bracket=(s[best - 1], s[best], s[best + 1]),
                method="golden",
                tol=1e-12,
            )
            refined = -float(result.fun)
        except (ValueError, RuntimeError):
            # flat top: the bracket is not strict
            refined = float(magnitude[best])
        return max(refined, float(magnitude[best]))

    @property
    def name(self) -> str:
        return self._name

    @property
    def normalization(self) -> float:
        return self._normalization

    @property
    def quadrature_tolerance(self) -> float:
        return self._quadrature_tolerance

    def beta(self, s: float) -> float:
        """
        Evaluate beta at a single point.

        Args:
            s: Argument

        Returns:
            c * g(s) inside (0, 1), otherwise 0
        """
        return float(self.beta_array(np.array([s], dtype=float))[0])

    def beta_array(self, s: np.ndarray) -> np.ndarray:
        return self._normalization * self._shape(s)

    def beta_prime_array(self, s: np.ndarray) -> np.ndarray:
        return self._normalization * self._shape_derivative(s)

    def derivative_bound(self) -> float:
        """sup over (0, 1) of |beta'(s)|."""
        return self._derivative_bound

    def reaction_sink(self, u: float, eps: float) -> float:
        """
        Evaluate the scaled sink (1/eps) beta(u/eps).

        Args:
            u: Local value of the temperature deficit
            eps: Regularisation scale

        Returns:
            The (nonnegative) sink rate

        Raises:
            ParameterError: If eps is not positive
        """
        if not eps > 0.0:
            raise ParameterError(f"eps must be positive, got {eps}")
        return self.beta(u / eps) / eps

    def reaction_sink_array(self, u: np.ndarray, eps: float) -> np.ndarray:
        if not eps > 0.0:
            raise ParameterError(f"eps must be positive, got {eps}")
        return self.beta_array(np.asarray(u, dtype=float) / eps) / eps

    def __repr__(self) -> str:
        return f"BetaKernel(name={self._name!r}, c={self._normalization:.6g})"


def smooth_bump_kernel() -> BetaKernel:
    """Default kernel c exp(-1/(s(1-s)))."""
    return BetaKernel("smooth_bump", _smooth_bump, _smooth_bump_derivative)


def poly_bump_kernel() -> BetaKernel:
    """Polynomial kernel 30 s^2 (1-s)^2 c'."""
    return BetaKernel("poly_bump", _poly_bump, _poly_bump_derivative)


KERNELS: Dict[str, Callable[[], BetaKernel]] = {
    "smooth_bump": smooth_bump_kernel,
    "poly_bump": poly_bump_kernel,
}

_CACHE: Dict[str, BetaKernel] = {}


def make_kernel(name: str) -> BetaKernel:
    """
    Look up a kernel by its configuration name.

    Kernels are immutable, so one instance per name is shared.

    Raises:
        ParameterError: If the name is unknown
    """
    if name not in KERNELS:
        raise ParameterError(f"unknown kernel {name!r}; expected one of {sorted(KERNELS)}")
    if name not in _CACHE:
        _CACHE[name] = KERNELS[name]()
    return _CACHE[name]
