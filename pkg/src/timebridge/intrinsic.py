"""
Intrinsic time: dissection of a price series into directional changes and overshoots.

A directional change of threshold delta is confirmed when the price reverses
by at least delta (relative) from the running extreme. The overshoot of a
trend is the relative move from its confirmation price to the extreme that
the next directional change reverses from.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from numba import njit
from scipy import stats

from .constants import Directions, ProtocolDefaults
from .exceptions import InsufficientDataError, SeriesError
from .series import PriceSeries, Tick
from .utils import PathLike, validate_delta, write_columns_csv

logger = logging.getLogger(__name__)

_UNSEEDED = 0
_UP = 1
_DOWN = -1


@dataclass(frozen=True)
class DcConfig:
    """Directional change threshold as a fraction (0.005 is 0.5%)."""

    delta: float

    def __post_init__(self):
        object.__setattr__(self, "delta", validate_delta(self.delta))


@dataclass(frozen=True)
class DcEvent:
    """A confirmed directional change."""

    direction: str
    confirm_time: float
    confirm_price: float
    prev_extreme_price: float
    # Overshoot of the trend this event ends; None for the first event
    prev_overshoot: Optional[float] = None


class DcClock:
    """
    Streaming directional change detector.

    Single-writer state machine: feed ticks in time order with step().
    """

    def __init__(self, config: DcConfig):
        self.config = config
        self.mode = _UNSEEDED
        self.ext_max: Optional[float] = None
        self.ext_min: Optional[float] = None
        self.last_dc_price: Optional[float] = None
        self.last_dc_time: Optional[float] = None
        self.last_time: Optional[float] = None
        self.n_events = 0

    @property
    def delta(self) -> float:
        return self.config.delta

    @property
    def mode_name(self) -> str:
        return {_UNSEEDED: "unseeded", _UP: Directions.UP, _DOWN: Directions.DOWN}[self.mode]

    def _emit(self, direction: int, time: float, price: float, extreme: float) -> DcEvent:
        overshoot = None
        if self.last_dc_price is not None:
            if direction == _DOWN:
                overshoot = (extreme - self.last_dc_price) / self.last_dc_price
            else:
                overshoot = (self.last_dc_price - extreme) / self.last_dc_price
        self.mode = direction
        self.ext_max = price
        self.ext_min = price
        self.last_dc_price = price
        self.last_dc_time = time
        self.n_events += 1
        name = Directions.UP if direction == _UP else Directions.DOWN
        return DcEvent(name, time, price, extreme, overshoot)

    def step(self, tick: Tick) -> Optional[DcEvent]:
        """
        Feed one tick; returns the directional change it confirms, if any.

        Raises:
            SeriesError: If the tick is earlier than the previous one
        """
        time, price = tick.time, tick.price
        if self.last_time is not None and time < self.last_time:
            raise SeriesError(f"Time regression: tick at {time} after tick at {self.last_time}")
        self.last_time = time
        delta = self.config.delta

        if self.ext_max is None:
            self.ext_max = price
            self.ext_min = price
            return None

        if self.mode == _UP:
            if price > self.ext_max:
                self.ext_max = price
            elif (self.ext_max - price) / self.ext_max >= delta:
                return self._emit(_DOWN, time, price, self.ext_max)
        elif self.mode == _DOWN:
            if price < self.ext_min:
                self.ext_min = price
            elif (price - self.ext_min) / self.ext_min >= delta:
                return self._emit(_UP, time, price, self.ext_min)
        else:
            if price > self.ext_max:
                self.ext_max = price
            if price < self.ext_min:
                self.ext_min = price
            if (price - self.ext_min) / self.ext_min >= delta:
                return self._emit(_UP, time, price, self.ext_min)
            if (self.ext_max - price) / self.ext_max >= delta:
                return self._emit(_DOWN, time, price, self.ext_max)
        return None

    def feed(self, times: Sequence[float], prices: Sequence[float]) -> Tuple[DcEvent, ...]:
        """Step through parallel arrays of times and prices; returns the events."""
        events = []
        for t, p in zip(times, prices):
            event = self.step(Tick(float(t), float(p)))
            if event is not None:
                events.append(event)
        return tuple(events)


def new_clock(config: DcConfig) -> DcClock:
    """Create an unseeded clock."""
    if not isinstance(config, DcConfig):
        config = DcConfig(config)
    return DcClock(config)


@njit(cache=True, nogil=True)
def _dc_kernel(prices, delta, index_out, extreme_out, direction_out, record):
    """
    Compiled twin of DcClock.step over a whole price array.

    Returns the number of events. When record is set, writes each event's
    tick index, reversed-from extreme and direction into the outputs.
    """
    n = prices.shape[0]
    count = 0
    if n == 0:
        return count
    mode = 0
    ext_max = prices[0]
    ext_min = prices[0]
    for i in range(1, n):
        p = prices[i]
        fired = 0
        extreme = 0.0
        if mode == 1:
            if p > ext_max:
                ext_max = p
            elif (ext_max - p) / ext_max >= delta:
                fired = -1
                extreme = ext_max
        elif mode == -1:
            if p < ext_min:
                ext_min = p
            elif (p - ext_min) / ext_min >= delta:
                fired = 1
                extreme = ext_min
        else:
            if p > ext_max:
                ext_max = p
            if p < ext_min:
                ext_min = p
            if (p - ext_min) / ext_min >= delta:
                fired = 1
                extreme = ext_min
            elif (ext_max - p) / ext_max >= delta:
                fired = -1
                extreme = ext_max
        if fired != 0:
            if record:
                index_out[count] = i
                extreme_out[count] = extreme
                direction_out[count] = fired
            count += 1
            mode = fired
            ext_max = p
            ext_min = p
    return count


@dataclass(frozen=True, eq=False)
class Dissection:
    """
    Directional change events of one series at one threshold.

    Event fields are stored column-wise; overshoots[k] belongs to the trend
    ended by event k + 1.
    """

    delta: float
    span: float
    confirm_times: np.ndarray
    confirm_prices: np.ndarray
    prev_extreme_prices: np.ndarray
    directions: np.ndarray
    overshoots: np.ndarray

    @property
    def n_dc(self) -> int:
        """N(delta, T)."""
        return int(self.confirm_times.size)

    @property
    def events(self) -> Tuple[DcEvent, ...]:
        """Events as DcEvent objects."""
        result = []
        for k in range(self.n_dc):
            result.append(DcEvent(
                direction=Directions.UP if self.directions[k] > 0 else Directions.DOWN,
                confirm_time=float(self.confirm_times[k]),
                confirm_price=float(self.confirm_prices[k]),
                prev_extreme_price=float(self.prev_extreme_prices[k]),
                prev_overshoot=float(self.overshoots[k - 1]) if k > 0 else None,
            ))
        return tuple(result)

    def overshoots_by_direction(self) -> Dict[str, np.ndarray]:
        """
        Overshoots split by the direction of the trend they extend.

        An overshoot recorded at a down event extends an upward trend.
        """
        if self.n_dc < 2:
            empty = np.empty(0)
            return {Directions.UP: empty, Directions.DOWN: empty.copy()}
        trend = self.directions[:-1]
        return {
            Directions.UP: self.overshoots[trend > 0],
            Directions.DOWN: self.overshoots[trend < 0],
        }


def _prev_overshoots(confirm_prices: np.ndarray, extremes: np.ndarray,
                     directions: np.ndarray) -> np.ndarray:
    if confirm_prices.size < 2:
        return np.empty(0)
    last_dc = confirm_prices[:-1]
    ext = extremes[1:]
    return np.where(directions[1:] < 0, (ext - last_dc) / last_dc, (last_dc - ext) / last_dc)


def dissect(series: PriceSeries, delta: float) -> Dissection:
    """
    Dissect a series into directional changes and overshoots.

    Equivalent to folding DcClock.step over every tick; the final,
    unconfirmed trend contributes no overshoot.
    """
    delta = validate_delta(delta)
    prices = np.ascontiguousarray(series.prices)
    T = float(series.times[-1] - series.times[0]) if len(series) else 0.0

    dummy_f = np.empty(0)
    dummy_i = np.empty(0, dtype=np.int64)
    dummy_d = np.empty(0, dtype=np.int8)
    count = _dc_kernel(prices, delta, dummy_i, dummy_f, dummy_d, False)

    index = np.empty(count, dtype=np.int64)
    extremes = np.empty(count)
    directions = np.empty(count, dtype=np.int8)
    _dc_kernel(prices, delta, index, extremes, directions, True)

    confirm_prices = prices[index]
    overshoots = _prev_overshoots(confirm_prices, extremes, directions)
    logger.debug("delta=%g: %d directional changes over %d ticks", delta, count, len(series))
    return Dissection(
        delta=delta,
        span=T,
        confirm_times=series.times[index].copy(),
        confirm_prices=confirm_prices,
        prev_extreme_prices=extremes,
        directions=directions,
        overshoots=overshoots,
    )


@dataclass(frozen=True)
class OvershootStats:
    """Overshoot moments of a dissection; None when no overshoot was recorded."""

    mean_os: Optional[float]
    var_os: Optional[float]
    n_dc: int
    n_os: int = 0


def overshoot_stats(d: Dissection) -> OvershootStats:
    """
    Mean overshoot and the delta-offset variability <(omega - delta)^2>.

    The variability is centred on delta, not on the sample mean.
    """
    n_os = int(d.overshoots.size)
    if n_os == 0:
        return OvershootStats(None, None, d.n_dc, 0)
    mean_os = float(np.mean(d.overshoots))
    var_os = float(np.mean(np.square(d.overshoots - d.delta)))
    zeros = int(np.count_nonzero(d.overshoots == 0))
    if zeros:
        logger.debug("delta=%g: %d of %d overshoots are zero", d.delta, zeros, n_os)
    return OvershootStats(mean_os, var_os, d.n_dc, n_os)


@dataclass(frozen=True)
class ExpCheck:
    """Kolmogorov-Smirnov distance of overshoots to Exp(mean delta)."""

    ks_distance: float
    n: int
    delta: float


def ks_exponential(samples: np.ndarray, mean: float) -> float:
    """KS distance between samples and an exponential law with the given mean."""
    return float(stats.kstest(samples, "expon", args=(0.0, mean)).statistic)


def overshoot_exp_check(d: Dissection,
                        min_samples: int = ProtocolDefaults.MIN_EXP_CHECK_SAMPLES) -> ExpCheck:
    """
    Compare the overshoot distribution with an exponential law of mean delta.

    Diagnostic only; no pass/fail threshold is applied.

    Raises:
        InsufficientDataError: If fewer than min_samples overshoots exist
    """
    n = int(d.overshoots.size)
    if n < min_samples:
        raise InsufficientDataError(
            f"Exponential check needs at least {min_samples} overshoots, got {n} at delta={d.delta:g}")
    return ExpCheck(ks_exponential(d.overshoots, d.delta), n, d.delta)


def events_to_csv(d: Dissection, filename: PathLike) -> None:
    """Write the event log of a dissection."""
    prev = [None] + d.overshoots.tolist() if d.n_dc else []
    write_columns_csv({
        "confirm_time": d.confirm_times.tolist(),
        "direction": [Directions.UP if x > 0 else Directions.DOWN for x in d.directions.tolist()],
        "confirm_price": d.confirm_prices.tolist(),
        "prev_extreme_price": d.prev_extreme_prices.tolist(),
        "prev_overshoot": prev,
    }, filename)
