"""
Custom exceptions for timebridge.
"""

from typing import Optional


class TimeBridgeError(Exception):
    """Base exception for all timebridge errors."""
    pass


class DataError(TimeBridgeError):
    """Raised when tick input cannot be decoded or violates a tick invariant."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SeriesError(TimeBridgeError):
    """Raised when a price series is unusable for the requested analysis."""
    pass


class GridError(TimeBridgeError):
    """Raised when a grid point yields no observations."""

    def __init__(self, message: str, point: Optional[float] = None):
        self.point = point
        super().__init__(message)


class FitError(TimeBridgeError):
    """Raised when a power-law fit cannot be computed."""
    pass


class InsufficientDataError(TimeBridgeError):
    """Raised when too few events or samples exist for a statistic."""
    pass
