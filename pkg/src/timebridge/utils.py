"""
Utility functions shared by the timebridge modules.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TypeVar, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from .constants import PriceModes

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

PathLike = Union[str, Path]


def validate_positive(value: float, name: str) -> float:
    """
    Validate that a parameter is a finite, strictly positive number.

    Args:
        value: Value to validate
        name: Parameter name used in the error message

    Returns:
        The value as float

    Raises:
        ValueError: If value is not finite or not > 0
    """
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a finite number > 0, got {value}")
    return value


def validate_non_negative(value: float, name: str) -> float:
    """Validate that a parameter is a finite number >= 0."""
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite number >= 0, got {value}")
    return value


def validate_delta(delta: float) -> float:
    """
    Validate a directional change threshold given as a fraction.

    Raises:
        ValueError: If delta is not in the open interval (0, 1)
    """
    try:
        delta = float(delta)
    except (TypeError, ValueError):
        raise ValueError(f"delta must be a number, got {delta!r}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must satisfy 0 < delta < 1, got {delta}")
    return delta


def validate_count(value: int, name: str, minimum: int) -> int:
    """Validate an integer count with a lower bound."""
    if isinstance(value, bool) or int(value) != value:
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def validate_price_mode(mode: str) -> str:
    """
    Validate and normalize a price mode.

    Returns:
        Normalized mode string ('trade' or 'mid')
    """
    mode = str(mode).lower()
    if mode in ("mid-of-bid-ask", "mid_of_bid_ask"):
        mode = PriceModes.MID
    if mode not in PriceModes.ALL:
        raise ValueError(f"Price mode must be one of: {list(PriceModes.ALL)}")
    return mode


def percent_to_fraction(value: float) -> float:
    """Convert a threshold given in percent to a fraction."""
    return float(value) / 100.0


def format_scientific(value: Optional[float], precision: int = 4) -> str:
    """
    Format a number for human-readable summaries.

    Args:
        value: Number to format, or None
        precision: Number of significant decimals

    Returns:
        Formatted string ('n/a' for None or non-finite values)
    """
    if value is None or not math.isfinite(value):
        return "n/a"
    if value == 0:
        return "0"
    if 1e-3 <= abs(value) < 1e4:
        return f"{value:.{precision}f}"
    return f"{value:.{precision}e}"


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(document: Dict[str, Any], filename: PathLike) -> Path:
    """Write a JSON document with full double precision."""
    path = Path(filename)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(document), f, indent=2, allow_nan=False)
    logger.debug("Wrote %s", path)
    return path


def write_columns_csv(columns: Dict[str, Sequence[Any]], filename: PathLike) -> Path:
    """
    Write named columns to a CSV file.

    Floats are written in shortest round-trip form; None and NaN
    become empty fields.

    Args:
        columns: Ordered mapping of header name to column values
        filename: Output filename

    Returns:
        Path of the written file
    """
    path = Path(filename)
    path.parent.mkdir(parents=True, exist_ok=True)
    lengths = {len(values) for values in columns.values()}
    if len(lengths) > 1:
        raise ValueError(f"Columns have different lengths: {sorted(lengths)}")

    frame = pd.DataFrame({name: list(values) for name, values in columns.items()})
    frame.to_csv(path, index=False, na_rep="", lineterminator="\n")
    logger.debug("Wrote %s", path)
    return path


def map_grid(func: Callable[[T], R], points: Iterable[T], workers: int = 1,
             progress: bool = False, desc: Optional[str] = None) -> List[R]:
    """
    Evaluate func over grid points, optionally on a thread pool.

    Results keep the input order regardless of the worker count.
    """
    points = list(points)
    if workers is None or workers <= 1:
        return [func(p) for p in tqdm(points, desc=desc, disable=not progress, leave=False)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(tqdm(pool.map(func, points), total=len(points), desc=desc,
                         disable=not progress, leave=False))
