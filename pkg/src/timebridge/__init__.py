"""
timebridge

Physical-time and intrinsic-time (directional change) analysis of price
series, with the scaling laws and invariants that connect the two.
"""

from .bridge import (
    BridgeCheck, BrownianExpectation, InvariantProfile, LambdaEstimate, WindowActivity,
    average_profiles, bm_theoretical, bridge_check, c_intrinsic, c_intrinsic_from, c_physical,
    decompose, estimate_lambda, invariant_profile, model_invariants, reference_comparison,
    write_decomposition,
)
from .exceptions import (
    DataError, FitError, GridError, InsufficientDataError, SeriesError, TimeBridgeError,
)
from .intrinsic import (
    DcClock, DcConfig, DcEvent, Dissection, ExpCheck, OvershootStats, dissect,
    events_to_csv, new_clock, overshoot_exp_check, overshoot_stats,
)
from .physical import ReturnSample, sample_prices, sample_returns, squared_return_mean
from .scaling import (
    LogGrid, PowerLawFit, ScalingReport, average_reports, fit_power_law, log_grid,
    scaling_suite, theoretical_exponents,
)
from .series import (
    PriceSeries, RegimeSegment, SynthConfig, Tick, TickCsvFormat, ingest_ticks, span,
    synth_brownian, synth_regimes, write_ticks,
)

__version__ = "1.0.0"

__all__ = [
    "Tick",
    "PriceSeries",
    "TickCsvFormat",
    "SynthConfig",
    "RegimeSegment",
    "ingest_ticks",
    "write_ticks",
    "synth_brownian",
    "synth_regimes",
    "span",
    "DcConfig",
    "DcEvent",
    "DcClock",
    "Dissection",
    "OvershootStats",
    "ExpCheck",
    "new_clock",
    "dissect",
    "overshoot_stats",
    "overshoot_exp_check",
    "events_to_csv",
    "ReturnSample",
    "sample_prices",
    "sample_returns",
    "squared_return_mean",
    "LogGrid",
    "PowerLawFit",
    "ScalingReport",
    "log_grid",
    "fit_power_law",
    "scaling_suite",
    "average_reports",
    "theoretical_exponents",
    "InvariantProfile",
    "BridgeCheck",
    "LambdaEstimate",
    "WindowActivity",
    "BrownianExpectation",
    "c_physical",
    "c_intrinsic",
    "c_intrinsic_from",
    "invariant_profile",
    "average_profiles",
    "model_invariants",
    "bridge_check",
    "estimate_lambda",
    "decompose",
    "write_decomposition",
    "bm_theoretical",
    "reference_comparison",
    "TimeBridgeError",
    "DataError",
    "SeriesError",
    "GridError",
    "FitError",
    "InsufficientDataError",
]
