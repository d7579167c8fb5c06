"""Window-averaging comparison estimators.

``fixed_window_mean`` averages a caller-chosen number of recent
observations.  ``adaptive_window_mean`` grows the window by doubling for as
long as consecutive window means agree to within a noise-scale deviation
term, mirroring the classic bias-variance scan: the test constant pairs a
union bound over the log2(n) doubling comparisons with failure probability
delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadWindow

ADAPTIVE_TEST_CONSTANT = 2.0


@dataclass(frozen=True)
class WindowEstimate:
    value: float
    window: int


def fixed_window_mean(y: np.ndarray, w: int) -> WindowEstimate:
    """Mean of the w most recent observations."""
    y = np.asarray(y, dtype=np.float64)
    if not 1 <= w <= len(y):
        raise BadWindow(f"window {w} outside [1, {len(y)}]")
    return WindowEstimate(float(np.mean(y[len(y) - w :])), w)


def adaptive_window_mean(y: np.ndarray, sigma: float, delta: float) -> WindowEstimate:
    """Mean over the largest doubling window whose halves agree.

    Starting from the single newest observation, the window doubles while
    |mean(last r) - mean(last 2r)| <= c * sigma * sqrt(2 ln(2 log2(n)/delta)) / sqrt(r)
    with c = 2.  The test ratio is invariant under jointly scaling y and
    sigma, so the selected window is too.
    """
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if n < 1:
        raise BadWindow("need at least one observation")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if n == 1:
        return WindowEstimate(float(y[0]), 1)

    deviation = sigma * math.sqrt(2.0 * math.log(2.0 * math.log2(n) / delta))
    r = 1
    while 2 * r <= n:
        mean_r = float(np.mean(y[n - r :]))
        mean_2r = float(np.mean(y[n - 2 * r :]))
        if abs(mean_r - mean_2r) > ADAPTIVE_TEST_CONSTANT * deviation / math.sqrt(r):
            break
        r *= 2
    return WindowEstimate(float(np.mean(y[n - r :])), r)


def range_sigma_proxy(y: np.ndarray) -> float:
    """Half the observed range, the no-prior-knowledge stand-in for sigma."""
    y = np.asarray(y, dtype=np.float64)
    return float(np.max(y) - np.min(y)) / 2.0
