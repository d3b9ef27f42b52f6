"""Score-shaping modifiers mapping raw property values into [0, 1]."""

from __future__ import annotations

import math
from typing import Sequence

from ..errors import EmptyList, NonPositiveSigma, NonPositiveThreshold, OutOfRange


def gaussian_modifier(x: float, mu: float, sigma: float) -> float:
    """exp(-(x - mu)^2 / (2 sigma^2)), peaking at 1.0 when x == mu."""
    if sigma <= 0.0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
    z = (x - mu) / sigma
    return math.exp(-0.5 * z * z)


def threshold_modifier(x: float, threshold: float, ascending: bool = True) -> float:
    """Piecewise-linear ramp.

    Ascending: 0 at x = 0, 1 at x >= threshold. Descending: 1 at x <=
    threshold, falling to 0 at 2 * threshold.
    """
    if threshold <= 0.0:
        raise NonPositiveThreshold(f"threshold must be positive, got {threshold}")
    if ascending:
        return min(1.0, max(0.0, x / threshold))
    if x <= threshold:
        return 1.0
    return max(0.0, 2.0 - x / threshold)


def geometric_mean(values: Sequence[float]) -> float:
    """Geometric mean of scores in [0, 1]; any zero makes the result zero."""
    if len(values) == 0:
        raise EmptyList("geometric mean of an empty sequence")
    for v in values:
        if v < 0.0 or v > 1.0:
            raise OutOfRange(f"value outside [0, 1]: {v}")
    if any(v == 0.0 for v in values):
        return 0.0
    log_sum = sum(math.log(v) for v in values)
    return math.exp(log_sum / len(values))
