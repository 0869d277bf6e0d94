"""
Command-line interface for timebridge.

Commands: synth, dissect, scaling, invariants, check, decompose.
Thresholds are given in percent on the command line and stored as fractions.
"""

import contextlib
import logging
import traceback
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import click

from . import __version__
from .bridge import (
    bridge_check, decompose, estimate_lambda, invariant_profile, model_invariants,
    reference_comparison, write_decomposition,
)
from .config import RunConfig, build_default_map, read_config_file
from .constants import PriceModes, ProtocolDefaults, ReferenceValues, Units
from .exceptions import InsufficientDataError, TimeBridgeError
from .intrinsic import dissect, events_to_csv, overshoot_exp_check, overshoot_stats
from .scaling import scaling_suite
from .series import write_ticks
from .utils import format_scientific, percent_to_fraction, write_json

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
COMMANDS = ("synth", "dissect", "scaling", "invariants", "check", "decompose")


def _load_config(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> None:
    if value is None:
        return
    try:
        values = read_config_file(value)
    except (OSError, ValueError) as e:
        raise click.BadParameter(str(e), ctx=ctx, param=param)
    ctx.default_map = build_default_map(values, COMMANDS)


@contextlib.contextmanager
def _reporting_errors(ctx: click.Context):
    """Turn library errors into a one-line message and exit status 1."""
    try:
        yield
    except (TimeBridgeError, ValueError, OSError) as e:
        if ctx.find_root().obj.get("verbose"):
            traceback.print_exc()
        raise click.ClickException(str(e))


def _series_options(func: Callable) -> Callable:
    """Options selecting the input series: a tick file or a synthetic path."""
    options = [
        click.option("--input", type=click.Path(dir_okay=False),
                     help="Tick CSV file."),
        click.option("--price-mode", type=click.Choice(PriceModes.ALL), default=PriceModes.TRADE,
                     show_default=True, help="Trade price or mid of bid/ask."),
        click.option("--time-column", default="0", show_default=True,
                     help="Time column (index or header name)."),
        click.option("--price-column", default="1", show_default=True,
                     help="Price column (index or header name)."),
        click.option("--bid-column", default=None, help="Bid column for mid mode."),
        click.option("--ask-column", default=None, help="Ask column for mid mode."),
        click.option("--sigma", type=float, default=None,
                     help="Synthesize Brownian motion with this volatility per sqrt(second)."),
        click.option("--n", type=click.IntRange(min=2), default=1_000_000, show_default=True,
                     help="Number of synthetic points."),
        click.option("--dt", type=float, default=ProtocolDefaults.SYNTH_DT, show_default=True,
                     help="Synthetic tick spacing in seconds."),
        click.option("--p0", type=float, default=ProtocolDefaults.P0, show_default=True,
                     help="Synthetic initial price."),
        click.option("--seed", type=click.IntRange(min=0), default=ProtocolDefaults.SEED,
                     show_default=True, help="Seed of the random generator."),
        click.option("--label", default=None, help="Series label written to reports."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _grid_options(func: Callable) -> Callable:
    options = [
        click.option("--dt-lo", type=float, default=ProtocolDefaults.DT_LO, show_default=True,
                     help="Smallest sampling interval in seconds."),
        click.option("--dt-hi", type=float, default=ProtocolDefaults.DT_HI, show_default=True,
                     help="Largest sampling interval in seconds."),
        click.option("--dt-k", type=click.IntRange(min=2), default=ProtocolDefaults.DT_K,
                     show_default=True, help="Number of sampling intervals."),
        click.option("--delta-lo", type=float, default=ProtocolDefaults.DELTA_LO_PCT,
                     show_default=True, help="Smallest threshold in percent."),
        click.option("--delta-hi", type=float, default=ProtocolDefaults.DELTA_HI_PCT,
                     show_default=True, help="Largest threshold in percent."),
        click.option("--delta-k", type=click.IntRange(min=2), default=ProtocolDefaults.DELTA_K,
                     show_default=True, help="Number of thresholds."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _output_option(func: Callable) -> Callable:
    return click.option("--output-dir", "-o", type=click.Path(file_okay=False),
                        envvar=ProtocolDefaults.OUTPUT_DIR_ENV,
                        default=ProtocolDefaults.OUTPUT_DIR, show_default=True,
                        help=f"Output directory (env: {ProtocolDefaults.OUTPUT_DIR_ENV}).")(func)


def _run_config(ctx: click.Context, params: Dict[str, Any]) -> RunConfig:
    """Resolve the command parameters into a validated RunConfig."""
    known = RunConfig.__dataclass_fields__
    values = {key: value for key, value in params.items() if key in known}
    values["workers"] = ctx.find_root().obj.get("workers", 1)
    try:
        return RunConfig(**values).validate()
    except ValueError as e:
        raise click.UsageError(str(e), ctx=ctx)


def _prepare_output(config: RunConfig) -> Path:
    output = Path(config.output_dir)
    output.mkdir(parents=True, exist_ok=True)
    return output


def _write_sidecar(path: Path, config: RunConfig, extra: Optional[Dict[str, Any]] = None) -> None:
    """Embed the run configuration next to a CSV output."""
    document = {"file": path.name, "run_config": config.to_dict()}
    if extra:
        document.update(extra)
    write_json(document, path.with_name(path.name + ".meta.json"))


def _progress(ctx: click.Context) -> bool:
    return not ctx.find_root().obj.get("no_progress", False)


@click.group()
@click.version_option(version=__version__)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), is_eager=True,
              expose_value=False, callback=_load_config,
              help="Key-value config file; flags override its values.")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]),
              default="WARNING", show_default=True)
@click.option("-v", "--verbose", is_flag=True, help="Verbose logging and tracebacks on error.")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True,
              help="Threads used to evaluate grid points.")
@click.option("--no-progress", is_flag=True, help="Hide progress bars.")
@click.pass_context
def cli(ctx: click.Context, log_level: str, verbose: bool, workers: int, no_progress: bool) -> None:
    """Link physical-time and intrinsic-time descriptions of price series."""
    level = logging.INFO if verbose and log_level == "WARNING" else getattr(logging, log_level)
    logging.basicConfig(level=level, format=LOG_FORMAT)
    ctx.ensure_object(dict)
    ctx.obj.update(verbose=verbose, workers=workers, no_progress=no_progress)


@cli.command()
@click.option("--sigma", type=float, required=True,
              help="Volatility per sqrt(second).")
@click.option("--n", type=click.IntRange(min=2), default=1_000_000, show_default=True,
              help="Number of points.")
@click.option("--dt", type=float, default=ProtocolDefaults.SYNTH_DT, show_default=True,
              help="Tick spacing in seconds.")
@click.option("--p0", type=float, default=ProtocolDefaults.P0, show_default=True,
              help="Initial price.")
@click.option("--seed", type=click.IntRange(min=0), default=ProtocolDefaults.SEED,
              show_default=True)
@click.option("--label", default=None)
@click.option("--name", default="series.csv", show_default=True, help="Output file name.")
@_output_option
@click.pass_context
def synth(ctx: click.Context, name: str, **params) -> None:
    """Write one realization of Brownian motion as tick CSV."""
    config = _run_config(ctx, params)
    with _reporting_errors(ctx):
        series = config.load_series()
        path = write_ticks(series, _prepare_output(config) / name)
        _write_sidecar(path, config, {"n_ticks": len(series), "span": float(series.times[-1])})
    click.echo(f"Wrote {len(series)} ticks to {path}")


@cli.command("dissect")
@_series_options
@click.option("--delta", type=float, required=True, help="Threshold in percent.")
@_output_option
@click.pass_context
def dissect_command(ctx: click.Context, delta: float, **params) -> None:
    """Export the directional change event log at one threshold."""
    config = _run_config(ctx, params)
    with _reporting_errors(ctx):
        series = config.load_series()
        d = dissect(series, percent_to_fraction(delta))
        output = _prepare_output(config)
        events_path = output / "events.csv"
        events_to_csv(d, events_path)
        _write_sidecar(events_path, config, {"delta": d.delta, "delta_unit": Units.FRACTION})

        os_stats = overshoot_stats(d)
        document = {
            "run_config": config.to_dict(),
            "delta": d.delta,
            "delta_unit": Units.FRACTION,
            "span": d.span,
            "n_dc": d.n_dc,
            "mean_os": os_stats.mean_os,
            "var_os": os_stats.var_os,
        }
        try:
            document["ks_distance"] = overshoot_exp_check(d).ks_distance
        except InsufficientDataError as e:
            logger.info("Skipping exponential check: %s", e)
            document["ks_distance"] = None
        write_json(document, output / "dissection.json")
    click.echo(f"delta={d.delta:g}: {d.n_dc} directional changes, "
               f"mean overshoot {format_scientific(os_stats.mean_os)}")


@cli.command()
@_series_options
@_grid_options
@click.option("--reference", type=click.Choice(sorted(ReferenceValues.ALL)), default=None,
              help="Compare with a published reference dataset.")
@_output_option
@click.pass_context
def scaling(ctx: click.Context, reference: Optional[str], **params) -> None:
    """Fit the four scaling laws over the dt and delta grids."""
    config = _run_config(ctx, params)
    with _reporting_errors(ctx):
        series = config.load_series()
        report = scaling_suite(series, config.dt_grid(), config.delta_grid(),
                               workers=config.workers, progress=_progress(ctx))
        output = _prepare_output(config)
        extra: Dict[str, Any] = {"run_config": config.to_dict()}
        if reference:
            extra["reference_comparison"] = reference_comparison(reference, report=report)
        report.write_json(output / "scaling.json", extra)
        for path in report.write_points(output):
            _write_sidecar(path, config)

    for law, fit in report.fits.items():
        click.echo(f"{law:22s} E={fit.exponent_E:+.4f}  alpha={format_scientific(fit.alpha)}  "
                   f"r2={fit.r_squared:.4f}")


def _summary_text(profile, model, estimate, report) -> str:
    summary = profile.summary()
    lines = [
        f"Invariant summary: {profile.label}",
        "=" * 50,
        f"Mean C^T:       {format_scientific(summary['mean_c_physical'])} 1/s",
        f"Mean C^tau:     {format_scientific(summary['mean_c_intrinsic'])} 1/s",
        f"Pooled mean:    {format_scientific(summary['mean'])} 1/s",
        f"Pooled std:     {format_scientific(summary['std'])} 1/s",
        f"Pooled CV:      {format_scientific(summary['cv'])}",
        f"Lambda:         {format_scientific(estimate.lambda_)} ({estimate.method})",
        f"Lambda spread:  {format_scientific(estimate.dispersion)}",
        "",
        "Model invariants (from fitted scaling laws):",
        f"  Mean C^T:     {format_scientific(model.summary()['mean_c_physical'])} 1/s",
        f"  Mean C^tau:   {format_scientific(model.summary()['mean_c_intrinsic'])} 1/s",
        "",
        "Scaling exponents:",
    ]
    for law, fit in report.fits.items():
        lines.append(f"  {law:22s} {fit.exponent_E:+.4f}")
    return "\n".join(lines) + "\n"


@cli.command()
@_series_options
@_grid_options
@click.option("--reference", type=click.Choice(sorted(ReferenceValues.ALL)), default=None,
              help="Compare with a published reference dataset.")
@_output_option
@click.pass_context
def invariants(ctx: click.Context, reference: Optional[str], **params) -> None:
    """Compute C^T and C^tau per grid index and estimate lambda."""
    config = _run_config(ctx, params)
    with _reporting_errors(ctx):
        series = config.load_series()
        dt_grid, delta_grid = config.dt_grid(), config.delta_grid()
        if dt_grid.k != delta_grid.k:
            raise click.UsageError("--dt-k and --delta-k must be equal for paired invariants")
        profile = invariant_profile(series, dt_grid, delta_grid,
                                    workers=config.workers, progress=_progress(ctx))
        estimate = estimate_lambda(profile)
        report = scaling_suite(series, dt_grid, delta_grid,
                               workers=config.workers, progress=_progress(ctx))
        model = model_invariants(report)

        output = _prepare_output(config)
        run = {"run_config": config.to_dict()}
        profile_csv = profile.write_csv(output / "invariants.csv")
        _write_sidecar(profile_csv, config)
        profile.write_json(output / "invariants.json", run)
        model_csv = model.write_csv(output / "model_invariants.csv")
        _write_sidecar(model_csv, config)
        lambda_doc = {**estimate.to_dict(), **run}
        if reference:
            lambda_doc["reference_comparison"] = reference_comparison(
                reference, profile=profile, lambda_estimate=estimate, report=report)
        write_json(lambda_doc, output / "lambda.json")

        text = _summary_text(profile, model, estimate, report)
        (output / "summary.txt").write_text(text, encoding="utf-8")
        _write_sidecar(output / "summary.txt", config)
    click.echo(text, nl=False)


@cli.command()
@_series_options
@click.option("--interval", type=float, required=True, help="Sampling interval dt in seconds.")
@click.option("--delta", type=float, required=True, help="Threshold in percent.")
@_output_option
@click.pass_context
def check(ctx: click.Context, interval: float, delta: float, **params) -> None:
    """Evaluate both sides of the bridge identity at one (dt, delta)."""
    config = _run_config(ctx, params)
    with _reporting_errors(ctx):
        series = config.load_series()
        result = bridge_check(series, interval, percent_to_fraction(delta))
        write_json({**result.to_dict(), "run_config": config.to_dict()},
                   _prepare_output(config) / "check.json")
    click.echo(f"lhs={result.lhs!r} rhs={result.rhs!r} rel_gap={result.rel_gap!r}")


@cli.command("decompose")
@_series_options
@click.option("--delta", type=float, required=True, help="Threshold in percent.")
@click.option("--window", type=float, required=True, help="Window length in seconds.")
@_output_option
@click.pass_context
def decompose_command(ctx: click.Context, delta: float, window: float, **params) -> None:
    """Per-window volatility (DC count) and liquidity (mean overshoot) proxies."""
    config = _run_config(ctx, {**params, "window": window})
    with _reporting_errors(ctx):
        series = config.load_series()
        windows = decompose(series, percent_to_fraction(delta), config.window)
        path = write_decomposition(windows, _prepare_output(config) / "decomposition.csv")
        _write_sidecar(path, config, {"delta": percent_to_fraction(delta),
                                      "delta_unit": Units.FRACTION})
    click.echo(f"Wrote {len(windows)} windows to {path}")


def main() -> None:
    """Console script entry point."""
    cli(obj={}, prog_name="timebridge")


if __name__ == "__main__":
    main()
