#!/usr/bin/env python3
"""
Seed-averaged Brownian motion study.

Synthesizes several Brownian paths and reports the directional change
count law, the overshoot moments, the four scaling exponents, both
invariants, lambda, the exponential overshoot check and dissection
throughput, each next to its closed-form expectation. Paths observed every
dt seconds are compared with both the continuous closed forms and the
dt-sampled ones.
"""

import argparse
import sys
import os
import time

import numpy as np

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from timebridge import (
    LogGrid, SynthConfig, TimeBridgeError, average_profiles, average_reports, bm_theoretical,
    dissect, estimate_lambda, invariant_profile, overshoot_exp_check, overshoot_stats,
    scaling_suite, span, synth_brownian, theoretical_exponents,
)
from timebridge.constants import ProtocolDefaults
from timebridge.utils import format_scientific, percent_to_fraction, write_json


def threshold_study(paths, deltas, sigma, dt, verbose=False):
    """
    Seed-averaged N, <omega> and <(omega - delta)^2> per threshold.

    Each is given as a ratio to the continuous closed form and to the
    closed form for a path observed every dt seconds.

    Returns:
        List of per-threshold result dictionaries
    """
    T = span(paths[0])
    rows = []
    for delta in deltas:
        counts, means, variances = [], [], []
        for path in paths:
            d = dissect(path, delta)
            stats = overshoot_stats(d)
            counts.append(d.n_dc)
            if stats.mean_os is not None:
                means.append(stats.mean_os)
                variances.append(stats.var_os)
        continuous = bm_theoretical(delta, sigma, T)
        sampled = bm_theoretical(delta, sigma, T, dt=dt)
        mean_n, mean_os, var_os = float(np.mean(counts)), float(np.mean(means)), float(np.mean(variances))
        rows.append({
            "delta": delta,
            "mean_n": mean_n,
            "expected_n": continuous.expected_n,
            "n_ratio": mean_n / continuous.expected_n,
            "os_mean_ratio": mean_os / delta,
            "os_var_ratio": var_os / delta ** 2,
            "effective_delta": sampled.effective_delta,
            "sampled_n_ratio": mean_n / sampled.expected_n,
            "sampled_os_mean_ratio": mean_os / sampled.expected_os,
            "sampled_os_var_ratio": var_os / sampled.var_os,
        })
        if verbose:
            print(f"  delta={delta:g}: N={mean_n:.1f} (expected {continuous.expected_n:.1f}, "
                  f"{sampled.expected_n:.1f} when sampled every {dt:g} s)")
    return rows


def measure_throughput(path, delta, repeats=3):
    """Best-of-repeats dissection speed in ticks per second."""
    dissect(path, delta)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        dissect(path, delta)
        best = min(best, time.perf_counter() - start)
    return len(path) / best if best > 0 else float("inf")


def main():
    """Main command-line interface."""
    parser = argparse.ArgumentParser(
        description="Seed-averaged directional change and invariant study on Brownian motion",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s
  %(prog)s --seeds 20 --n 1000000 --output outputs/brownian
  %(prog)s --sigma 1e-4 --seeds 5 --verbose
        """
    )

    parser.add_argument("--sigma", type=float, default=5e-5,
                        help="Volatility per sqrt(second) (default: 5e-5)")
    parser.add_argument("--n", type=int, default=1_000_000,
                        help="Points per path (default: 1000000)")
    parser.add_argument("--dt", type=float, default=1.0,
                        help="Tick spacing in seconds (default: 1.0)")
    parser.add_argument("--seeds", type=int, default=20,
                        help="Number of seeds averaged (default: 20)")
    parser.add_argument("--deltas", default="0.0005,0.001,0.002",
                        help="Thresholds as fractions (default: 0.0005,0.001,0.002)")
    parser.add_argument("-o", "--output", metavar="DIRECTORY", default="outputs",
                        help="Output directory (default: outputs)")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="Enable verbose output")

    args = parser.parse_args()

    try:
        deltas = [float(x) for x in args.deltas.split(",")]
    except ValueError:
        parser.error("Invalid --deltas. Use comma-separated fractions (e.g., '0.001,0.002')")
    if args.seeds < 1:
        parser.error("--seeds must be at least 1")

    try:
        print(f"Synthesizing {args.seeds} paths of {args.n} points (sigma={args.sigma:g})")
        paths = [synth_brownian(SynthConfig(sigma=args.sigma, dt=args.dt, n=args.n, seed=s))
                 for s in range(args.seeds)]
        T = span(paths[0])
        sigma_sq = args.sigma ** 2

        print("\nDIRECTIONAL CHANGE LAWS")
        print("=" * 50)
        thresholds = threshold_study(paths, deltas, args.sigma, args.dt, args.verbose)
        for row in thresholds:
            print(f"delta={row['delta']:<8g} N/E[N]={row['n_ratio']:.4f}  "
                  f"<w>/delta={row['os_mean_ratio']:.4f}  "
                  f"<(w-delta)^2>/delta^2={row['os_var_ratio']:.4f}")
            print(f"{'':15s}sampled every {args.dt:g} s: N {row['sampled_n_ratio']:.4f}  "
                  f"<w> {row['sampled_os_mean_ratio']:.4f}  "
                  f"<(w-delta)^2> {row['sampled_os_var_ratio']:.4f}")

        # Protocol threshold grid; interval grid scaled to the path span
        dt_grid = LogGrid(60.0, T / 100.0, ProtocolDefaults.DT_K)
        delta_grid = LogGrid(percent_to_fraction(ProtocolDefaults.DELTA_LO_PCT),
                             percent_to_fraction(ProtocolDefaults.DELTA_HI_PCT),
                             ProtocolDefaults.DELTA_K)

        print("\nSCALING EXPONENTS (seed-averaged points)")
        print("=" * 50)
        report = average_reports([scaling_suite(path, dt_grid, delta_grid) for path in paths])
        reference = theoretical_exponents()
        for law, fit in report.fits.items():
            print(f"{law:22s} E={fit.exponent_E:+.4f} (Brownian {reference[law]:+.1f})  "
                  f"r2={fit.r_squared:.4f}")

        print("\nINVARIANTS (seed-averaged profile)")
        print("=" * 50)
        profile = average_profiles([invariant_profile(path, dt_grid, delta_grid)
                                    for path in paths])
        summary = profile.summary()
        estimate = estimate_lambda(profile)
        print(f"Mean C^T / sigma^2:   {summary['mean_c_physical'] / sigma_sq:.4f}")
        print(f"Mean C^tau / sigma^2: {summary['mean_c_intrinsic'] / sigma_sq:.4f}")
        print(f"Pooled CV:            {summary['cv']:.4f}")
        print(f"Lambda:               {estimate.lambda_:.4f}")

        ks_delta = deltas[len(deltas) // 2]
        check = overshoot_exp_check(dissect(paths[0], ks_delta))
        speed = measure_throughput(paths[0], ks_delta)
        print(f"\nKS distance at delta={ks_delta:g}: {check.ks_distance:.4f} ({check.n} overshoots)")
        print(f"Dissection throughput: {format_scientific(speed)} ticks/s")

        document = {
            "sigma": args.sigma,
            "dt": args.dt,
            "n": args.n,
            "seeds": args.seeds,
            "thresholds": thresholds,
            "scaling": report.to_dict(),
            "invariants": profile.to_dict(),
            "c_physical_ratio": summary["mean_c_physical"] / sigma_sq,
            "c_intrinsic_ratio": summary["mean_c_intrinsic"] / sigma_sq,
            "pooled_cv": summary["cv"],
            "lambda": estimate.lambda_,
            "ks_distance": check.ks_distance,
            "ticks_per_second": speed,
        }
        path = write_json(document, os.path.join(args.output, "brownian_study.json"))
        print(f"\nResults written to {path}")

    except TimeBridgeError as e:
        print(f"Analysis failed: {e}")
        sys.exit(1)
    except KeyboardInterrupt:
        print("\nInterrupted by user")
        sys.exit(1)


if __name__ == "__main__":
    main()
