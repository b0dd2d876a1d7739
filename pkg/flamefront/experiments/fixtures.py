"""
Regression fixtures for the self-similar profiles.

The fixtures file stores {n: {R, a1}} together with the SHA-256 digest of
its canonical JSON payload; a file whose digest does not match is rejected.
Without a file, the reference values come from the closed form
f(r) = a1 M(-1/2, n/2, r^2/4) with Kummer's function M.
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, NamedTuple, Sequence, Tuple, Union

import numpy as np
from scipy import optimize, special

from core.errors import FixtureIntegrityError
from core.selfsim import solve_profile

logger = logging.getLogger(__name__)

FIXTURE_DIMENSIONS = (1, 2, 3)
FIXTURE_TOLERANCE = 1e-8


class FixtureComparison(NamedTuple):
    dimension: int
    quantity: str
    expected: float
    actual: float
    passed: bool


def _canonical(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def fixture_digest(payload: dict) -> str:
    return hashlib.sha256(_canonical(payload)).hexdigest()


def fixture_payload(dimensions: Sequence[int] = FIXTURE_DIMENSIONS) -> Dict[str, Dict[str, float]]:
    payload = {}
    for n in dimensions:
        profile = solve_profile(n)
        payload[str(n)] = {"R": profile.support_radius, "a1": profile.peak}
    return payload


def kummer_profile(n: int) -> Tuple[float, float]:
    """
    R and a1 from the closed form: R is the first zero of M(-1/2, n/2, r^2/4)
    and a1 = -1 / (d/dr M)(R).
    """
    b = 0.5 * n

    def shape(r):
        return special.hyp1f1(-0.5, b, r * r / 4.0)

    radii = np.linspace(0.01, 10.0, 1000)
    first = int(np.nonzero(shape(radii) <= 0.0)[0][0])
    R = optimize.brentq(shape, radii[first - 1], radii[first], xtol=1e-14, rtol=1e-14)
    slope = (-0.5 / b) * special.hyp1f1(0.5, b + 1.0, R * R / 4.0) * R / 2.0
    return float(R), float(-1.0 / slope)


def kummer_payload(dimensions: Sequence[int] = FIXTURE_DIMENSIONS) -> Dict[str, Dict[str, float]]:
    """Closed-form reference values in the fixtures layout."""
    payload = {}
    for n in dimensions:
        R, a1 = kummer_profile(n)
        payload[str(n)] = {"R": R, "a1": a1}
    return payload


def write_fixtures(path: Union[str, Path], dimensions: Sequence[int] = FIXTURE_DIMENSIONS) -> Path:
    """
    Solve the profiles and write them with their digest.

    Args:
        path: Target JSON file
        dimensions: Dimensions to store

    Returns:
        The written path
    """
    path = Path(path)
    payload = fixture_payload(dimensions)
    document = {"fixtures": payload, "sha256": fixture_digest(payload)}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("Wrote profile fixtures for n=%s to %s", ",".join(payload), path)
    return path


def load_fixtures(path: Union[str, Path]) -> Dict[str, Dict[str, float]]:
    """
    Read a fixtures file and check its digest.

    Raises:
        FixtureIntegrityError: If the file is unreadable, malformed or its digest does not match
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
        payload = document["fixtures"]
        digest = document["sha256"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise FixtureIntegrityError(f"{path}: unreadable fixtures ({exc})")
    if fixture_digest(payload) != digest:
        raise FixtureIntegrityError(f"{path}: digest mismatch, the fixtures file is corrupted")
    return payload


def compare_with_fixtures(
    fixtures: Dict[str, Dict[str, float]],
    tolerance: float = FIXTURE_TOLERANCE,
) -> List[FixtureComparison]:
    """Solve each stored dimension again and compare R and a1."""
    comparisons = []
    for key in sorted(fixtures, key=int):
        profile = solve_profile(int(key))
        for quantity, actual in (("R", profile.support_radius), ("a1", profile.peak)):
            expected = float(fixtures[key][quantity])
            comparisons.append(
                FixtureComparison(int(key), quantity, expected, actual, abs(actual - expected) <= tolerance)
            )
    return comparisons
