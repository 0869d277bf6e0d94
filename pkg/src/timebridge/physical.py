"""
Physical time: equidistant sampling and mean squared returns.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InsufficientDataError, SeriesError
from .series import PriceSeries, require_analysable
from .utils import validate_positive

logger = logging.getLogger(__name__)

# Relative slack for T/dt and ulps of slack for grid-to-tick matching
GRID_RTOL = 1e-12
GRID_ULPS = 8


@dataclass(frozen=True, eq=False)
class ReturnSample:
    """Simple returns over consecutive, non-overlapping windows of length dt."""

    dt: float
    returns: np.ndarray
    span: float

    @property
    def n_windows(self) -> int:
        return int(self.returns.size)


def sample_prices(series: PriceSeries, dt: float) -> np.ndarray:
    """
    Previous-tick prices on the grid t_k = t_0 + k*dt, k = 0..floor(T/dt).

    Raises:
        ValueError: If dt <= 0
        SeriesError: If the span is shorter than dt
    """
    dt = validate_positive(dt, "dt")
    T = require_analysable(series)
    if T < dt:
        raise SeriesError(f"Span {T} s is shorter than dt={dt} s")
    n_windows = int(math.floor(T / dt * (1.0 + GRID_RTOL)))
    grid = series.times[0] + np.arange(n_windows + 1, dtype=np.float64) * dt
    # t0 + k*dt may round a few ulps below a tick that sits on the grid
    nudged = grid + GRID_ULPS * np.spacing(np.maximum(np.abs(grid), dt))
    index = np.searchsorted(series.times, nudged, side="right") - 1
    return series.prices[index]


def sample_returns(series: PriceSeries, dt: float) -> ReturnSample:
    """
    Sample returns r_k = (P(t_{k+1}) - P(t_k)) / P(t_k); the trailing partial window is dropped.
    """
    prices = sample_prices(series, dt)
    returns = np.diff(prices) / prices[:-1]
    logger.debug("dt=%g: %d windows", dt, returns.size)
    return ReturnSample(float(dt), returns, float(series.times[-1] - series.times[0]))


def squared_return_mean(sample: ReturnSample) -> float:
    """<r(dt)>_2, the sample mean of squared returns."""
    if sample.n_windows == 0:
        raise InsufficientDataError(f"No return windows at dt={sample.dt:g}")
    return float(np.mean(np.square(sample.returns)))
