"""
Bridge between physical and intrinsic time.

The physical-time invariant C^T = <r(dt)>_2 / dt and the intrinsic-time
invariant C^tau = <(omega - delta)^2> * N(delta, T) / T coincide for
Brownian motion (both equal sigma^2). For markets where they diverge a
constant factor lambda with C^tau ~ lambda * C^T is estimated.

N(delta, T) / T is a rate of directional changes; it is sometimes called
the normalized number of overshoots, which is the same count since every
directional change closes one overshoot.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy import special

from .constants import ReferenceValues, ScalingLaws, Units
from .exceptions import GridError, InsufficientDataError, SeriesError, TimeBridgeError
from .intrinsic import Dissection, dissect, overshoot_stats
from .physical import GRID_RTOL, sample_returns, squared_return_mean
from .scaling import LogGrid, ScalingReport, grid_points
from .series import PriceSeries, require_analysable
from .utils import PathLike, map_grid, validate_positive, write_columns_csv, write_json

logger = logging.getLogger(__name__)

LAMBDA_METHOD = "ratio-of-pooled-means"

# Mean excess of a Gaussian random walk over a level, in units of its step size
STEP_OVERSHOOT = -float(special.zeta(0.5)) / math.sqrt(2.0 * math.pi)


def c_physical(series: PriceSeries, dt: float) -> float:
    """C^T = <r(dt)>_2 / dt in 1/s."""
    return squared_return_mean(sample_returns(series, dt)) / dt


def c_intrinsic_from(d: Dissection) -> float:
    """
    C^tau of an existing dissection: <(omega - delta)^2> * N / T.

    Raises:
        InsufficientDataError: Fewer than 2 events (no overshoot)
    """
    if d.n_dc < 2 or d.overshoots.size == 0:
        raise InsufficientDataError(
            f"C^tau needs at least 2 directional changes, got {d.n_dc} at delta={d.delta:g}")
    if d.span <= 0:
        raise SeriesError(f"Series span must be > 0, got {d.span}")
    return overshoot_stats(d).var_os * d.n_dc / d.span


def c_intrinsic(series: PriceSeries, delta: float) -> float:
    """C^tau at threshold delta in 1/s."""
    require_analysable(series)
    return c_intrinsic_from(dissect(series, delta))


@dataclass(eq=False)
class InvariantProfile:
    """Paired C^T(dt_I) and C^tau(delta_I) over the grid index I."""

    dt_grid: np.ndarray
    delta_grid: np.ndarray
    c_physical: np.ndarray
    c_intrinsic: np.ndarray
    label: str = ""
    source: str = "measured"

    def __post_init__(self):
        if self.c_physical.size != self.dt_grid.size or self.c_intrinsic.size != self.delta_grid.size:
            raise ValueError("Invariant lists must match their grids in length")

    @property
    def index(self) -> np.ndarray:
        return np.arange(self.dt_grid.size)

    def summary(self) -> Dict[str, float]:
        """Pooled mean, standard deviation and coefficient of variation."""
        pooled = np.concatenate([self.c_physical, self.c_intrinsic]).tolist()
        mean = math.fsum(pooled) / len(pooled)
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in pooled) / len(pooled))
        return {
            "mean": mean,
            "std": std,
            "cv": std / mean if mean > 0 else float("nan"),
            "mean_c_physical": math.fsum(self.c_physical.tolist()) / self.c_physical.size,
            "mean_c_intrinsic": math.fsum(self.c_intrinsic.tolist()) / self.c_intrinsic.size,
            "unit": Units.PER_SECOND,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "source": self.source,
            "unit": Units.PER_SECOND,
            "dt_grid": self.dt_grid,
            "delta_grid": self.delta_grid,
            "c_physical": self.c_physical,
            "c_intrinsic": self.c_intrinsic,
            "summary": self.summary(),
        }

    def write_csv(self, filename: PathLike) -> Path:
        """Columns I, dt, C_T, delta, C_tau."""
        return write_columns_csv({
            "I": self.index.tolist(),
            "dt": self.dt_grid.tolist(),
            "C_T": self.c_physical.tolist(),
            "delta": self.delta_grid.tolist(),
            "C_tau": self.c_intrinsic.tolist(),
        }, filename)

    def write_json(self, filename: PathLike, extra: Optional[Dict[str, Any]] = None) -> Path:
        document = self.to_dict()
        if extra:
            document.update(extra)
        return write_json(document, filename)


def invariant_profile(series: PriceSeries,
                      dt_grid: Union[LogGrid, Sequence[float]],
                      delta_grid: Union[LogGrid, Sequence[float]],
                      workers: int = 1, progress: bool = False) -> InvariantProfile:
    """
    C^T and C^tau for every grid index.

    Raises:
        ValueError: If the grids differ in length
        GridError: If any index fails (names the index)
    """
    require_analysable(series)
    dts = grid_points(dt_grid)
    deltas = grid_points(delta_grid)
    if dts.size != deltas.size:
        raise ValueError(f"Grids must have the same length, got {dts.size} and {deltas.size}")

    def evaluate(i: int):
        try:
            return c_physical(series, dts[i]), c_intrinsic(series, deltas[i])
        except TimeBridgeError as e:
            raise GridError(f"Index {i} (dt={dts[i]:g}, delta={deltas[i]:g}): {e}",
                            point=float(i)) from e

    values = map_grid(evaluate, range(dts.size), workers, progress, "invariants")
    profile = InvariantProfile(
        dt_grid=dts,
        delta_grid=deltas,
        c_physical=np.array([v[0] for v in values]),
        c_intrinsic=np.array([v[1] for v in values]),
        label=series.label,
    )
    summary = profile.summary()
    logger.info("Invariants: mean=%.4e std=%.4e", summary["mean"], summary["std"])
    return profile


def average_profiles(profiles: Sequence[InvariantProfile]) -> InvariantProfile:
    """
    Index-wise mean of profiles measured on the same grids (one per seed, say).

    Raises:
        ValueError: If no profile is given or the grids differ
    """
    profiles = list(profiles)
    if not profiles:
        raise ValueError("Need at least one profile to average")
    first = profiles[0]
    for profile in profiles[1:]:
        if not (np.array_equal(profile.dt_grid, first.dt_grid)
                and np.array_equal(profile.delta_grid, first.delta_grid)):
            raise ValueError("Profiles must share their dt and delta grids")
    return InvariantProfile(
        dt_grid=first.dt_grid,
        delta_grid=first.delta_grid,
        c_physical=np.mean([p.c_physical for p in profiles], axis=0),
        c_intrinsic=np.mean([p.c_intrinsic for p in profiles], axis=0),
        label=f"mean of {len(profiles)}",
        source="averaged",
    )


def model_invariants(report: ScalingReport) -> InvariantProfile:
    """
    Invariants implied by the fitted scaling laws.

    C^T(dt) = alpha_r * dt**(E_r - 1) and
    C^tau(delta) = alpha_os * delta**E_os * alpha_N * delta**E_N.
    """
    r = report.fits[ScalingLaws.SQUARED_RETURNS]
    os_var = report.fits[ScalingLaws.OS_VARIABILITY]
    rate = report.fits[ScalingLaws.NORMALIZED_DC_COUNT]
    dts = report.points[ScalingLaws.SQUARED_RETURNS][0]
    deltas = report.points[ScalingLaws.OS_VARIABILITY][0]
    return InvariantProfile(
        dt_grid=dts,
        delta_grid=deltas,
        c_physical=r.alpha * np.power(dts, r.exponent_E - 1.0),
        c_intrinsic=os_var.predict(deltas) * rate.predict(deltas),
        label=report.label,
        source="model",
    )


@dataclass(frozen=True)
class BridgeCheck:
    """Both sides of (T/dt) <r(dt)>_2 ~ <(omega - delta)^2> N(delta, T)."""

    lhs: float
    rhs: float
    rel_gap: float
    dt: float
    delta: float

    @property
    def ratio(self) -> float:
        """rhs / lhs."""
        return self.rhs / self.lhs if self.lhs > 0 else float("nan")

    def to_dict(self) -> Dict[str, Any]:
        return {"lhs": self.lhs, "rhs": self.rhs, "rel_gap": self.rel_gap,
                "ratio": self.ratio, "dt": self.dt, "delta": self.delta}


def bridge_check(series: PriceSeries, dt: float, delta: float) -> BridgeCheck:
    """Evaluate both sides of the bridge identity and their relative gap."""
    T = require_analysable(series)
    lhs = T / dt * squared_return_mean(sample_returns(series, dt))
    d = dissect(series, delta)
    if d.overshoots.size == 0:
        raise InsufficientDataError(
            f"Bridge check needs at least 2 directional changes, got {d.n_dc} at delta={delta:g}")
    rhs = overshoot_stats(d).var_os * d.n_dc
    largest = max(lhs, rhs)
    rel_gap = abs(lhs - rhs) / largest if largest > 0 else 0.0
    return BridgeCheck(lhs, rhs, rel_gap, float(dt), float(delta))


@dataclass(frozen=True)
class LambdaEstimate:
    """Correction factor with C^tau ~ lambda * C^T."""

    lambda_: float
    method: str
    dispersion: float
    n_points: int

    def to_dict(self) -> Dict[str, Any]:
        return {"lambda": self.lambda_, "method": self.method,
                "dispersion": self.dispersion, "n_points": self.n_points}


def estimate_lambda(profile: InvariantProfile) -> LambdaEstimate:
    """
    lambda = mean(C^tau) / mean(C^T); dispersion is the standard deviation
    of the per-index ratios C^tau_I / C^T_I.

    Raises:
        InsufficientDataError: Empty profile, a zero C^T, or zero C^tau overall
    """
    c_t = profile.c_physical.tolist()
    c_tau = profile.c_intrinsic.tolist()
    if not c_t or not c_tau:
        raise InsufficientDataError("Cannot estimate lambda from an empty profile")
    if any(v <= 0 for v in c_t):
        raise InsufficientDataError("Cannot estimate lambda: a C^T value is zero")

    mean_t = math.fsum(c_t) / len(c_t)
    mean_tau = math.fsum(c_tau) / len(c_tau)
    if mean_tau <= 0:
        raise InsufficientDataError("Cannot estimate lambda: all C^tau values are zero")

    ratios = [b / a for a, b in zip(c_t, c_tau)]
    ratio_mean = math.fsum(ratios) / len(ratios)
    dispersion = math.sqrt(math.fsum((r - ratio_mean) ** 2 for r in ratios) / len(ratios))

    lam = mean_tau / mean_t
    if abs(lam - 1.0) > 0.2:
        logger.warning("lambda=%.4f: the bridge identity does not hold without correction", lam)
    return LambdaEstimate(lam, LAMBDA_METHOD, dispersion, len(ratios))


@dataclass(frozen=True)
class WindowActivity:
    """Volatility and liquidity proxies for one physical-time window."""

    window_start: float
    volatility_proxy: int
    liquidity_proxy: Optional[float]
    os_variability: Optional[float] = None

    @property
    def activity(self) -> Optional[float]:
        """N * <(omega - delta)^2>, the window's share of the bridge right-hand side."""
        if self.os_variability is None:
            return None
        return self.volatility_proxy * self.os_variability


def decompose(series: PriceSeries, delta: float, window: float) -> List[WindowActivity]:
    """
    Directional change count and mean overshoot per non-overlapping window.

    Events, and the overshoot they close, belong to the window containing
    their confirmation time. The last window may be partial.
    """
    window = validate_positive(window, "window")
    T = require_analysable(series)
    if T < window:
        raise SeriesError(f"Span {T} s is shorter than one window of {window} s")

    d = dissect(series, delta)
    n_windows = max(1, int(math.ceil(T / window * (1.0 - GRID_RTOL))))
    t0 = float(series.times[0])
    position = (d.confirm_times - t0) / window * (1.0 + GRID_RTOL)
    slot = np.minimum(np.floor(position).astype(np.int64), n_windows - 1)

    counts = np.bincount(slot, minlength=n_windows)
    os_slot = slot[1:]
    os_counts = np.bincount(os_slot, minlength=n_windows)
    os_sums = np.bincount(os_slot, weights=d.overshoots, minlength=n_windows)
    var_sums = np.bincount(os_slot, weights=np.square(d.overshoots - d.delta), minlength=n_windows)

    result = []
    for w in range(n_windows):
        has_os = os_counts[w] > 0
        result.append(WindowActivity(
            window_start=t0 + w * window,
            volatility_proxy=int(counts[w]),
            liquidity_proxy=float(os_sums[w] / os_counts[w]) if has_os else None,
            os_variability=float(var_sums[w] / os_counts[w]) if has_os else None,
        ))
    return result


def write_decomposition(windows: Sequence[WindowActivity], filename: PathLike) -> Path:
    return write_columns_csv({
        "window_start": [w.window_start for w in windows],
        "volatility_proxy": [w.volatility_proxy for w in windows],
        "liquidity_proxy": [w.liquidity_proxy for w in windows],
        "os_variability": [w.os_variability for w in windows],
        "activity": [w.activity for w in windows],
    }, filename)


@dataclass(frozen=True)
class BrownianExpectation:
    """Closed-form Brownian expectations at one threshold."""

    expected_n: float
    expected_os: float
    var_os: float
    rhs_product: float
    # Threshold the count law sees; equals delta under continuous monitoring
    effective_delta: float


def bm_theoretical(delta: float, sigma: float, T: float,
                   dt: Optional[float] = None) -> BrownianExpectation:
    """
    E[N] = sigma^2 T / delta^2, E[omega] = delta, <(omega - delta)^2> = delta^2 and
    their product <(omega - delta)^2> * E[N] = sigma^2 T.

    With dt the path is observed only every dt seconds, with step size
    s = sigma * sqrt(dt) and rho = STEP_OVERSHOOT. A reversal is confirmed on
    average rho * s past the threshold and the recorded extreme falls short
    of the true one by rho * s, so the count law sees delta + 2 * rho * s,
    the mean overshoot is delta + rho * s and <(omega - delta)^2> is
    (delta + 2 * rho * s)^2 + (rho * s)^2.

    Args:
        delta: Threshold as a fraction
        sigma: Volatility per square-root second, relative to the price level
        T: Span in seconds
        dt: Observation spacing in seconds; None for continuous monitoring
    """
    delta = validate_positive(delta, "delta")
    sigma = validate_positive(sigma, "sigma")
    T = validate_positive(T, "T")
    shift = 0.0 if dt is None else STEP_OVERSHOOT * sigma * math.sqrt(validate_positive(dt, "dt"))
    effective = delta + 2.0 * shift
    expected_n = sigma ** 2 * T / effective ** 2
    var_os = effective ** 2 + shift ** 2
    return BrownianExpectation(expected_n, delta + shift, var_os, var_os * expected_n, effective)


def reference_comparison(name: str, profile: Optional[InvariantProfile] = None,
                         lambda_estimate: Optional[LambdaEstimate] = None,
                         report: Optional[ScalingReport] = None) -> Dict[str, Any]:
    """
    Side-by-side comparison with a published reference dataset.

    Args:
        name: 'brownian', 'ethusdt' or 'usdjpy'
    """
    try:
        reference = ReferenceValues.ALL[name.lower()]
    except KeyError:
        raise ValueError(f"Unknown reference {name!r}; choose from {sorted(ReferenceValues.ALL)}")

    comparison: Dict[str, Any] = {"reference": reference["label"]}
    if report is not None:
        comparison["exponents"] = {
            law: {"measured": report.fits[law].exponent_E, "reference": value}
            for law, value in reference["exponents"].items() if law in report.fits
        }
    if profile is not None and "c_mean" in reference:
        comparison["c_mean"] = {"measured": profile.summary()["mean"],
                                "reference": reference["c_mean"]}
    if lambda_estimate is not None:
        comparison["lambda"] = {"measured": lambda_estimate.lambda_,
                                "reference": reference["lambda"]}
    return comparison
