"""
Run configuration and the key-value config file format.

A config file holds one 'key = value' pair per line; '#' starts a comment.
Keys apply to every command unless prefixed with a command name
('scaling.dt_hi = 30000').
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, Optional, Union

from .constants import PriceModes, ProtocolDefaults
from .scaling import LogGrid
from .series import PriceSeries, SynthConfig, TickCsvFormat, ingest_ticks, synth_brownian
from .utils import PathLike, percent_to_fraction, validate_price_mode

logger = logging.getLogger(__name__)


def _column(value: Optional[str]) -> Optional[Union[int, str]]:
    if value is None or value == "":
        return None
    value = str(value)
    return int(value) if value.isdigit() else value


@dataclass
class RunConfig:
    """Fully resolved parameters of one CLI run."""

    input: Optional[str] = None
    sigma: Optional[float] = None
    n: int = 1_000_000
    dt: float = ProtocolDefaults.SYNTH_DT
    p0: float = ProtocolDefaults.P0
    seed: int = ProtocolDefaults.SEED
    label: Optional[str] = None
    price_mode: str = PriceModes.TRADE
    time_column: str = "0"
    price_column: str = "1"
    bid_column: Optional[str] = None
    ask_column: Optional[str] = None
    dt_lo: float = ProtocolDefaults.DT_LO
    dt_hi: float = ProtocolDefaults.DT_HI
    dt_k: int = ProtocolDefaults.DT_K
    delta_lo: float = ProtocolDefaults.DELTA_LO_PCT
    delta_hi: float = ProtocolDefaults.DELTA_HI_PCT
    delta_k: int = ProtocolDefaults.DELTA_K
    window: Optional[float] = None
    output_dir: str = ProtocolDefaults.OUTPUT_DIR
    workers: int = 1

    def validate(self) -> "RunConfig":
        """
        Raises:
            ValueError: Unless exactly one of input and synth parameters is given
        """
        if (self.input is None) == (self.sigma is None):
            raise ValueError("Give exactly one of --input or synth parameters (--sigma)")
        self.price_mode = validate_price_mode(self.price_mode)
        return self

    @property
    def is_synthetic(self) -> bool:
        return self.sigma is not None

    def synth_config(self) -> SynthConfig:
        return SynthConfig(sigma=self.sigma, dt=self.dt, n=self.n, p0=self.p0, seed=self.seed)

    def tick_format(self) -> TickCsvFormat:
        return TickCsvFormat(
            time_column=_column(self.time_column),
            price_column=_column(self.price_column),
            bid_column=_column(self.bid_column),
            ask_column=_column(self.ask_column),
        )

    def dt_grid(self) -> LogGrid:
        return LogGrid(self.dt_lo, self.dt_hi, self.dt_k)

    def delta_grid(self) -> LogGrid:
        """Threshold grid as fractions (bounds are configured in percent)."""
        return LogGrid(percent_to_fraction(self.delta_lo), percent_to_fraction(self.delta_hi),
                       self.delta_k)

    def load_series(self) -> PriceSeries:
        """Read the input file or synthesize the Brownian path."""
        if self.is_synthetic:
            return synth_brownian(self.synth_config(), label=self.label)
        return ingest_ticks(self.input, self.tick_format(), self.price_mode, label=self.label)

    def to_dict(self) -> Dict[str, Any]:
        document = asdict(self)
        document["delta_unit"] = "percent"
        if self.is_synthetic:
            document["synth"] = self.synth_config().metadata()
        return document


def read_config_file(path: PathLike) -> Dict[str, str]:
    """
    Parse a key-value config file.

    Raises:
        ValueError: On a line without '='
    """
    values: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{number}: expected 'key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = value.strip("\"'")
    logger.debug("Read %d settings from %s", len(values), path)
    return values


def build_default_map(values: Dict[str, str], commands: Iterable[str]) -> Dict[str, Any]:
    """
    Spread config file values over the commands as click defaults.

    Unprefixed keys also stay at the top level so group options
    (log_level, workers) can be set from the file.
    """
    commands = list(commands)
    default_map: Dict[str, Any] = {name: {} for name in commands}
    for key, value in values.items():
        if "." in key:
            command, key = key.split(".", 1)
            if command in commands:
                default_map[command][key] = value
            else:
                logger.warning("Ignoring setting for unknown command %r", command)
            continue
        if key in commands:
            raise ValueError(f"Setting name {key!r} clashes with a command name")
        default_map[key] = value
        for name in commands:
            default_map[name].setdefault(key, value)
    return default_map
