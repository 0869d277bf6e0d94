"""
Threshold grids and power-law fitting f(x) = alpha * x**E for the four scaling laws.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from .constants import ScalingLaws, Units
from .exceptions import FitError, GridError, TimeBridgeError
from .intrinsic import dissect, overshoot_stats
from .physical import sample_returns, squared_return_mean
from .series import PriceSeries, require_analysable
from .utils import PathLike, map_grid, validate_count, validate_positive, write_columns_csv, write_json

logger = logging.getLogger(__name__)

FIT_METHOD = "ols-loglog"


@dataclass(frozen=True)
class LogGrid:
    """k geometrically spaced points from lo to hi inclusive."""

    lo: float
    hi: float
    k: int = 21

    def __post_init__(self):
        validate_positive(self.lo, "lo")
        validate_positive(self.hi, "hi")
        validate_count(self.k, "k", 2)
        if not self.lo < self.hi:
            raise ValueError(f"Grid bounds must satisfy lo < hi, got lo={self.lo}, hi={self.hi}")

    @property
    def points(self) -> np.ndarray:
        return log_grid(self.lo, self.hi, self.k)

    def scaled(self, factor: float) -> "LogGrid":
        """Same grid with both bounds multiplied by factor."""
        return LogGrid(self.lo * factor, self.hi * factor, self.k)


def log_grid(lo: float, hi: float, k: int = 21) -> np.ndarray:
    """
    x_i = lo * (hi/lo)**(i/(k-1)), i = 0..k-1, with both endpoints exact.

    Raises:
        ValueError: If not 0 < lo < hi or k < 2
    """
    lo = validate_positive(lo, "lo")
    hi = validate_positive(hi, "hi")
    k = validate_count(k, "k", 2)
    if not lo < hi:
        raise ValueError(f"Grid bounds must satisfy lo < hi, got lo={lo}, hi={hi}")
    exponents = np.arange(k, dtype=np.float64) / (k - 1)
    points = lo * (hi / lo) ** exponents
    points[0] = lo
    points[-1] = hi
    return points


def grid_points(grid: Union[LogGrid, Sequence[float]]) -> np.ndarray:
    if isinstance(grid, LogGrid):
        return grid.points
    points = np.asarray(grid, dtype=np.float64).ravel()
    if points.size == 0:
        raise ValueError("Grid must contain at least one point")
    return points


@dataclass(frozen=True)
class PowerLawFit:
    """Result of fitting y = alpha * x**E by least squares in log-log space."""

    alpha: float
    exponent_E: float
    r_squared: float
    n_points: int
    exponent_stderr: Optional[float] = None
    method: str = FIT_METHOD

    def predict(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return self.alpha * np.power(x, self.exponent_E)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "exponent_E": self.exponent_E,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "exponent_stderr": self.exponent_stderr,
            "method": self.method,
        }


def fit_power_law(points: Sequence[Tuple[float, float]]) -> PowerLawFit:
    """
    Fit f(x) = alpha * x**E by ordinary least squares on (ln x, ln y).

    Args:
        points: Sequence of (x, y) pairs, or an (n, 2) array

    Raises:
        FitError: Fewer than 2 points, non-positive values or identical x
    """
    data = np.asarray(points, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != 2:
        raise FitError(f"Expected (x, y) pairs, got array of shape {data.shape}")
    if data.shape[0] < 2:
        raise FitError(f"Power-law fit needs at least 2 points, got {data.shape[0]}")
    x, y = data[:, 0], data[:, 1]
    if not (np.all(np.isfinite(data)) and np.all(x > 0) and np.all(y > 0)):
        raise FitError("Power-law fit needs finite x > 0 and y > 0 (log undefined otherwise)")
    if np.all(x == x[0]):
        raise FitError("Power-law fit needs at least two distinct x values")

    lx, ly = np.log(x), np.log(y)
    result = stats.linregress(lx, ly)
    slope, intercept = float(result.slope), float(result.intercept)

    residuals = ly - (intercept + slope * lx)
    ss_res = float(np.sum(np.square(residuals)))
    ss_tot = float(np.sum(np.square(ly - np.mean(ly))))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    stderr = float(result.stderr) if data.shape[0] > 2 and math.isfinite(result.stderr) else None

    return PowerLawFit(
        alpha=math.exp(intercept),
        exponent_E=slope,
        r_squared=r_squared,
        n_points=int(data.shape[0]),
        exponent_stderr=stderr,
    )


def theoretical_exponents() -> Dict[str, float]:
    """Scaling exponents of Brownian motion for each law."""
    return dict(ScalingLaws.BROWNIAN_EXPONENTS)


@dataclass(frozen=True)
class ThresholdMeasurement:
    """Intrinsic-time quantities measured at one threshold."""

    delta: float
    n_dc: int
    dc_rate: float
    mean_os: float
    var_os: float


def measure_threshold(series: PriceSeries, delta: float) -> ThresholdMeasurement:
    """
    N(delta,T), N(delta,T)/T, <omega> and <(omega - delta)^2> at one threshold.

    Raises:
        GridError: If the threshold yields no overshoot
    """
    T = require_analysable(series)
    d = dissect(series, delta)
    os_stats = overshoot_stats(d)
    if d.n_dc == 0:
        raise GridError(f"No directional changes at delta={delta:g}", point=delta)
    if os_stats.mean_os is None:
        raise GridError(f"No completed overshoot at delta={delta:g} (only {d.n_dc} event)",
                        point=delta)
    return ThresholdMeasurement(delta, d.n_dc, d.n_dc / T, os_stats.mean_os, os_stats.var_os)


def measure_interval(series: PriceSeries, dt: float) -> float:
    """<r(dt)>_2 at one sampling interval; failures are reported as GridError."""
    try:
        return squared_return_mean(sample_returns(series, dt))
    except TimeBridgeError as e:
        raise GridError(f"No return window at dt={dt:g}: {e}", point=dt) from e


@dataclass(eq=False)
class ScalingReport:
    """Fits of the four scaling laws together with their (x, y) points."""

    fits: Dict[str, PowerLawFit]
    points: Dict[str, Tuple[np.ndarray, np.ndarray]]
    span: float
    n_ticks: int
    label: str = ""
    method: str = FIT_METHOD
    measurements: List[ThresholdMeasurement] = field(default_factory=list)

    def exponents(self) -> Dict[str, float]:
        return {law: fit.exponent_E for law, fit in self.fits.items()}

    def deviations(self, reference: Optional[Dict[str, float]] = None) -> Dict[str, float]:
        """Fitted minus reference exponent per law (Brownian values by default)."""
        reference = reference if reference is not None else theoretical_exponents()
        return {law: fit.exponent_E - reference[law]
                for law, fit in self.fits.items() if law in reference}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "span": self.span,
            "span_unit": Units.SECONDS,
            "n_ticks": self.n_ticks,
            "method": self.method,
            "laws": {
                law: {
                    **fit.to_dict(),
                    "x_unit": ScalingLaws.X_UNITS[law],
                    "alpha_unit": ScalingLaws.ALPHA_UNITS[law],
                    "x": self.points[law][0],
                    "y": self.points[law][1],
                }
                for law, fit in self.fits.items()
            },
            "deviation_from_brownian": self.deviations(),
        }

    def write_json(self, filename: PathLike, extra: Optional[Dict[str, Any]] = None) -> Path:
        document = self.to_dict()
        if extra:
            document.update(extra)
        return write_json(document, filename)

    def write_points(self, directory: PathLike) -> List[Path]:
        """One '<law>.csv' file of (x, y) per law."""
        directory = Path(directory)
        written = []
        for law in ScalingLaws.ALL:
            if law not in self.points:
                continue
            x, y = self.points[law]
            written.append(write_columns_csv({"x": x.tolist(), "y": y.tolist()},
                                             directory / f"{law}.csv"))
        return written


def _fit_law(law: str, x: np.ndarray, y: np.ndarray) -> PowerLawFit:
    try:
        return fit_power_law(np.column_stack([x, y]))
    except FitError as e:
        raise FitError(f"{law}: {e}") from e


def scaling_suite(series: PriceSeries,
                  dt_grid: Union[LogGrid, Sequence[float]],
                  delta_grid: Union[LogGrid, Sequence[float]],
                  workers: int = 1, progress: bool = False) -> ScalingReport:
    """
    Measure and fit the four scaling laws.

    Squared returns against dt; overshoot variability, normalized DC count
    and mean overshoot against delta.

    Raises:
        GridError: If a grid point has no observations (names the point)
        FitError: If a law cannot be fitted
    """
    T = require_analysable(series)
    deltas = grid_points(delta_grid)
    dts = grid_points(dt_grid)

    measured = map_grid(lambda d: measure_threshold(series, d), deltas, workers,
                        progress, "delta grid")
    squared = np.array(map_grid(lambda dt: measure_interval(series, dt), dts, workers,
                                progress, "dt grid"))

    dc_rate = np.array([m.dc_rate for m in measured])
    mean_os = np.array([m.mean_os for m in measured])
    var_os = np.array([m.var_os for m in measured])

    points = {
        ScalingLaws.SQUARED_RETURNS: (dts, squared),
        ScalingLaws.OS_VARIABILITY: (deltas, var_os),
        ScalingLaws.NORMALIZED_DC_COUNT: (deltas, dc_rate),
        ScalingLaws.MEAN_OVERSHOOT: (deltas, mean_os),
    }
    fits = {law: _fit_law(law, x, y) for law, (x, y) in points.items()}
    for law, fit in fits.items():
        logger.info("%s: E=%.4f alpha=%.4e r2=%.4f", law, fit.exponent_E, fit.alpha,
                    fit.r_squared)

    return ScalingReport(fits=fits, points=points, span=T, n_ticks=len(series),
                         label=series.label, measurements=list(measured))


def average_reports(reports: Sequence[ScalingReport]) -> ScalingReport:
    """
    Refit the four laws on point-wise means of reports measured on the same grids.

    Raises:
        ValueError: If no report is given or the grids differ
        FitError: If a law cannot be fitted
    """
    reports = list(reports)
    if not reports:
        raise ValueError("Need at least one report to average")
    first = reports[0]
    points = {}
    for law, (x, _) in first.points.items():
        if any(law not in r.points or not np.array_equal(r.points[law][0], x) for r in reports):
            raise ValueError(f"Reports must share the {law} grid")
        points[law] = (x, np.mean([r.points[law][1] for r in reports], axis=0))
    fits = {law: _fit_law(law, x, y) for law, (x, y) in points.items()}
    return ScalingReport(fits=fits, points=points, span=first.span, n_ticks=first.n_ticks,
                         label=f"mean of {len(reports)}")
