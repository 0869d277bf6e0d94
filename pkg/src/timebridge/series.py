"""
Price series representation, tick CSV ingestion and synthetic Brownian paths.
"""

import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .constants import PriceModes, ProtocolDefaults
from .exceptions import DataError, SeriesError
from .utils import (
    PathLike, validate_count, validate_non_negative, validate_positive,
    validate_price_mode, write_columns_csv,
)

logger = logging.getLogger(__name__)

GENERATOR_NAME = "numpy.random.default_rng/PCG64"

# Largest time value representable with integer-second precision in a double
_MAX_TIME = float(2 ** 53)

ColumnRef = Union[int, str]


@dataclass(frozen=True)
class Tick:
    """A single timestamped price."""

    time: float
    price: float

    def __post_init__(self):
        if not math.isfinite(self.time):
            raise ValueError(f"Tick time must be finite, got {self.time}")
        if not (math.isfinite(self.price) and self.price > 0):
            raise ValueError(f"Tick price must be > 0, got {self.price}")


class PriceSeries:
    """
    Immutable ordered sequence of ticks.

    Times and prices are stored as read-only float64 arrays so a series can
    be shared between analyses running in parallel.
    """

    __slots__ = ("_times", "_prices", "label")

    def __init__(self, times: Sequence[float], prices: Sequence[float], label: str = ""):
        times = np.array(times, dtype=np.float64).ravel()
        prices = np.array(prices, dtype=np.float64).ravel()

        if times.shape != prices.shape:
            raise ValueError(f"times and prices differ in length: {times.size} != {prices.size}")
        if not np.all(np.isfinite(times)):
            raise ValueError("Tick times must be finite")
        if not np.all(np.isfinite(prices) & (prices > 0)):
            bad = int(np.argmin(np.isfinite(prices) & (prices > 0)))
            raise ValueError(f"Tick prices must be > 0 (index {bad}: {prices[bad]})")
        if times.size > 1 and np.any(np.diff(times) < 0):
            bad = int(np.argmax(np.diff(times) < 0)) + 1
            raise ValueError(f"Tick times must be non-decreasing (index {bad})")

        times.setflags(write=False)
        prices.setflags(write=False)
        self._times = times
        self._prices = prices
        self.label = label

    @classmethod
    def from_arrays(cls, times: np.ndarray, prices: np.ndarray, label: str = "") -> "PriceSeries":
        """Build a series from parallel arrays (copied)."""
        return cls(times, prices, label)

    @classmethod
    def from_ticks(cls, ticks: Sequence[Tick], label: str = "") -> "PriceSeries":
        """Build a series from Tick objects."""
        ticks = list(ticks)
        return cls([t.time for t in ticks], [t.price for t in ticks], label)

    @property
    def times(self) -> np.ndarray:
        """Tick times in seconds (read-only view)."""
        return self._times

    @property
    def prices(self) -> np.ndarray:
        """Tick prices (read-only view)."""
        return self._prices

    @property
    def ticks(self) -> Tuple[Tick, ...]:
        """All ticks as Tick objects. Materializes one object per tick."""
        return tuple(self)

    def __len__(self) -> int:
        return int(self._times.size)

    def __iter__(self) -> Iterator[Tick]:
        for t, p in zip(self._times.tolist(), self._prices.tolist()):
            yield Tick(t, p)

    def __getitem__(self, index: int) -> Tick:
        return Tick(float(self._times[index]), float(self._prices[index]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (self.label == other.label
                and np.array_equal(self._times, other._times)
                and np.array_equal(self._prices, other._prices))

    def __repr__(self) -> str:
        return f"PriceSeries(label={self.label!r}, n={len(self)})"


def span(series: PriceSeries) -> float:
    """
    Time span T of a series in seconds.

    Raises:
        SeriesError: If the series has fewer than 2 ticks
    """
    if len(series) < 2:
        raise SeriesError(f"Series needs at least 2 ticks, got {len(series)}")
    return float(series.times[-1] - series.times[0])


def require_analysable(series: PriceSeries) -> float:
    """Check the series supports analysis and return its span."""
    T = span(series)
    if T <= 0:
        raise SeriesError(f"Series span must be > 0, got {T}")
    return T


# ---------------------------------------------------------------------------
# Tick CSV ingestion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TickCsvFormat:
    """
    Description of a tick CSV layout.

    Columns are referenced by 0-based index or by header name. A header
    row is detected automatically unless has_header is given.
    """

    time_column: ColumnRef = 0
    price_column: ColumnRef = 1
    bid_column: Optional[ColumnRef] = None
    ask_column: Optional[ColumnRef] = None
    delimiter: str = ","
    has_header: Optional[bool] = None

    def columns_for(self, price_mode: str) -> Dict[str, ColumnRef]:
        """Columns needed to build ticks in the given price mode."""
        if price_mode == PriceModes.MID:
            if self.bid_column is None or self.ask_column is None:
                raise ValueError("Mid price mode requires bid and ask columns")
            return {"time": self.time_column, "bid": self.bid_column, "ask": self.ask_column}
        return {"time": self.time_column, "price": self.price_column}


_EPOCH = pd.Timestamp(0, tz="UTC")


def _parse_numbers(cells: pd.Series) -> Tuple[np.ndarray, np.ndarray]:
    """Parse strings to floats; returns (values, ok_mask)."""
    coerced = pd.to_numeric(cells, errors="coerce")
    ok = coerced.notna().to_numpy()
    values = np.full(len(cells), np.nan)
    if ok.any():
        # Python float() parsing round-trips repr output exactly
        values[ok] = cells[ok].astype(float).to_numpy()
    ok &= np.isfinite(values)
    return values, ok


def _parse_times(cells: pd.Series) -> Tuple[np.ndarray, np.ndarray]:
    """Parse epoch seconds or ISO-8601 UTC timestamps to epoch seconds."""
    values, ok = _parse_numbers(cells)
    if not ok.all():
        rest = cells[~ok]
        stamps = pd.to_datetime(rest, utc=True, errors="coerce", format="ISO8601")
        parsed = stamps.notna().to_numpy()
        seconds = ((stamps[parsed] - _EPOCH) / pd.Timedelta(seconds=1)).to_numpy(dtype=np.float64)
        idx = np.flatnonzero(~ok)
        values[idx[parsed]] = seconds
        ok[idx[parsed]] = True
    return values, ok


def _looks_like_header(first_row: pd.Series, time_ref: ColumnRef) -> bool:
    if isinstance(time_ref, str):
        return True
    cell = first_row.iloc[time_ref] if time_ref < len(first_row) else ""
    _, ok = _parse_times(pd.Series([str(cell).strip()]))
    return not bool(ok[0])


def _resolve_column(ref: ColumnRef, header: Optional[List[str]], n_columns: int) -> int:
    if isinstance(ref, str):
        if ref.isdigit():
            ref = int(ref)
        else:
            if header is None:
                raise DataError(f"Column {ref!r} referenced by name but input has no header")
            if ref not in header:
                raise DataError(f"Column {ref!r} not found in header {header}")
            return header.index(ref)
    if ref < 0 or ref >= n_columns:
        raise DataError(f"Column index {ref} out of range for {n_columns} columns")
    return ref


def ingest_ticks(source: Union[PathLike, BinaryIO, bytes],
                 fmt: Optional[TickCsvFormat] = None,
                 price_mode: str = PriceModes.TRADE,
                 label: Optional[str] = None) -> PriceSeries:
    """
    Read a tick CSV into a PriceSeries.

    Args:
        source: Path, binary stream or raw bytes
        fmt: Column layout (defaults to time in column 0, price in column 1)
        price_mode: 'trade' uses the price column, 'mid' uses (bid+ask)/2
        label: Series label (defaults to the file name)

    Returns:
        PriceSeries in input order

    Raises:
        DataError: Malformed row, non-positive price, time regression or empty input
    """
    fmt = fmt or TickCsvFormat()
    price_mode = validate_price_mode(price_mode)
    columns = fmt.columns_for(price_mode)

    if label is None:
        label = Path(source).name if isinstance(source, (str, Path)) else ""
    if isinstance(source, bytes):
        source = io.BytesIO(source)

    try:
        frame = pd.read_csv(source, header=None, dtype=str, sep=fmt.delimiter,
                            keep_default_na=False, skip_blank_lines=False,
                            skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataError("empty input: no tick rows")
    except pd.errors.ParserError as e:
        raise DataError(f"malformed tick CSV: {e}") from e
    except OSError as e:
        raise DataError(f"cannot read tick input: {e}") from e

    frame = frame.fillna("")
    # Row index i is file line i + 1; blank lines are dropped after numbering
    frame = frame[(frame != "").any(axis=1)]
    if frame.empty:
        raise DataError("empty input: no tick rows")

    has_header = fmt.has_header
    if has_header is None:
        has_header = _looks_like_header(frame.iloc[0], fmt.time_column)
    header = None
    if has_header:
        header = [str(c).strip() for c in frame.iloc[0].tolist()]
        frame = frame.iloc[1:]
    if frame.empty:
        raise DataError("empty input: header without tick rows")

    n_columns = frame.shape[1]
    resolved = {key: _resolve_column(ref, header, n_columns) for key, ref in columns.items()}
    lines = frame.index.to_numpy() + 1

    def column(key: str) -> pd.Series:
        return frame.iloc[:, resolved[key]].astype(str).str.strip().reset_index(drop=True)

    times, ok = _parse_times(column("time"))
    if not ok.all():
        bad = int(np.argmin(ok))
        raise DataError(f"malformed timestamp {column('time')[bad]!r}", line=int(lines[bad]))

    if price_mode == PriceModes.MID:
        bid, bid_ok = _parse_numbers(column("bid"))
        ask, ask_ok = _parse_numbers(column("ask"))
        ok = bid_ok & ask_ok
        prices = (bid + ask) / 2.0
        raw = column("bid") + "/" + column("ask")
    else:
        prices, ok = _parse_numbers(column("price"))
        raw = column("price")
    if not ok.all():
        bad = int(np.argmin(ok))
        raise DataError(f"malformed price {raw[bad]!r}", line=int(lines[bad]))

    positive = prices > 0
    if not positive.all():
        bad = int(np.argmin(positive))
        raise DataError(f"non-positive price {prices[bad]!r}", line=int(lines[bad]))

    if times.size > 1:
        steps = np.diff(times)
        if np.any(steps < 0):
            bad = int(np.argmax(steps < 0)) + 1
            raise DataError(f"timestamp {times[bad]!r} earlier than previous tick {times[bad - 1]!r}",
                            line=int(lines[bad]))
        duplicates = int(np.count_nonzero(steps == 0))
        if duplicates:
            logger.warning("%d ticks share a timestamp with their predecessor; input order kept",
                           duplicates)

    series = PriceSeries(times, prices, label=label)
    logger.info("Ingested %d ticks (%s mode) spanning %s s", len(series), price_mode,
                times[-1] - times[0])
    return series


def write_ticks(series: PriceSeries, filename: PathLike) -> Path:
    """Write a series as 'time,price' CSV in full double precision."""
    return write_columns_csv({"time": series.times.tolist(), "price": series.prices.tolist()},
                             filename)


# ---------------------------------------------------------------------------
# Synthetic Brownian motion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthConfig:
    """
    Parameters of an arithmetic Brownian path P_{k+1} = P_k + sigma*sqrt(dt)*Z_k.

    sigma is the volatility per square-root second.
    """

    sigma: float
    dt: float = ProtocolDefaults.SYNTH_DT
    n: int = 1_000_000
    p0: float = ProtocolDefaults.P0
    seed: int = ProtocolDefaults.SEED

    def __post_init__(self):
        validate_non_negative(self.sigma, "sigma")
        validate_positive(self.dt, "dt")
        validate_count(self.n, "n", 2)
        validate_positive(self.p0, "p0")
        validate_count(self.seed, "seed", 0)

    @property
    def horizon(self) -> float:
        """n*dt, the duration covered by the n points."""
        return self.n * self.dt

    def metadata(self) -> Dict[str, object]:
        return {
            "sigma": self.sigma,
            "sigma_unit": "1/sqrt(s)",
            "dt": self.dt,
            "n": self.n,
            "p0": self.p0,
            "seed": self.seed,
            "generator": GENERATOR_NAME,
        }


@dataclass(frozen=True)
class RegimeSegment:
    """One constant-volatility stretch of a piecewise Brownian path."""

    sigma: float
    n: int
    dt: float = ProtocolDefaults.SYNTH_DT

    def __post_init__(self):
        validate_non_negative(self.sigma, "sigma")
        validate_count(self.n, "n", 1)
        validate_positive(self.dt, "dt")


def _check_time_range(last_time: float) -> None:
    if not math.isfinite(last_time) or last_time > _MAX_TIME:
        raise SeriesError(f"n*dt = {last_time} exceeds the time representation (max {_MAX_TIME:.0f} s)")


def _finish_path(times: np.ndarray, prices: np.ndarray, label: str) -> PriceSeries:
    if np.any(prices <= 0):
        bad = int(np.argmax(prices <= 0))
        raise SeriesError(f"Brownian path reached a non-positive price at index {bad}; "
                          f"lower sigma or raise p0")
    return PriceSeries(times, prices, label=label)


def synth_brownian(config: SynthConfig, label: Optional[str] = None) -> PriceSeries:
    """
    Generate one realization of arithmetic Brownian motion.

    The first tick is at time 0 with price p0. Identical configs produce
    bitwise-identical series.
    """
    _check_time_range(config.horizon)
    rng = np.random.default_rng(config.seed)
    z = rng.standard_normal(config.n - 1)

    prices = np.empty(config.n)
    prices[0] = config.p0
    np.cumsum(config.sigma * math.sqrt(config.dt) * z, out=prices[1:])
    prices[1:] += config.p0
    times = np.arange(config.n, dtype=np.float64) * config.dt

    if label is None:
        label = f"brownian(sigma={config.sigma:g}, n={config.n}, seed={config.seed})"
    logger.debug("Synthesized %d points with %s", config.n, GENERATOR_NAME)
    return _finish_path(times, prices, label)


def synth_regimes(segments: Sequence[RegimeSegment], p0: float = ProtocolDefaults.P0,
                  seed: int = ProtocolDefaults.SEED, label: str = "regimes") -> PriceSeries:
    """
    Generate a piecewise-volatility Brownian path.

    Each segment continues from the last time and price of the previous one.
    """
    if not segments:
        raise ValueError("At least one regime segment is required")
    validate_positive(p0, "p0")
    rng = np.random.default_rng(seed)

    steps: List[np.ndarray] = []
    gaps: List[np.ndarray] = []
    for segment in segments:
        z = rng.standard_normal(segment.n)
        steps.append(segment.sigma * math.sqrt(segment.dt) * z)
        gaps.append(np.full(segment.n, segment.dt))

    increments = np.concatenate(steps)
    spacing = np.concatenate(gaps)
    times = np.concatenate([[0.0], np.cumsum(spacing)])
    _check_time_range(float(times[-1]))
    prices = p0 + np.concatenate([[0.0], np.cumsum(increments)])
    return _finish_path(times, prices, label)
