"""
Test the physical/intrinsic invariants, the bridge identity and lambda.
"""

import sys
import os
import random
import tempfile
import unittest

import numpy as np

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from timebridge import (
    GridError, InsufficientDataError, InvariantProfile, LogGrid, PowerLawFit, PriceSeries,
    RegimeSegment, ScalingReport, SynthConfig, average_profiles, bm_theoretical, bridge_check,
    c_intrinsic, c_intrinsic_from, c_physical, decompose, dissect, estimate_lambda, invariant_profile,
    model_invariants, reference_comparison, sample_returns, span, squared_return_mean,
    synth_brownian, synth_regimes, write_decomposition,
)
from timebridge.bridge import STEP_OVERSHOOT
from timebridge.constants import ProtocolDefaults, ScalingLaws
from timebridge.intrinsic import Dissection
from timebridge.utils import percent_to_fraction

SIGMA = 5e-5


def _dissection(overshoots, delta, n_dc, T):
    overshoots = np.asarray(overshoots, dtype=float)
    return Dissection(delta=delta, span=T, confirm_times=np.arange(n_dc, dtype=float),
                      confirm_prices=np.ones(n_dc), prev_extreme_prices=np.ones(n_dc),
                      directions=np.ones(n_dc, dtype=np.int8), overshoots=overshoots)


def _profile(c_t, c_tau):
    c_t = np.asarray(c_t, dtype=float)
    return InvariantProfile(dt_grid=np.arange(1, c_t.size + 1, dtype=float),
                            delta_grid=np.linspace(0.001, 0.005, c_t.size),
                            c_physical=c_t, c_intrinsic=np.asarray(c_tau, dtype=float))


class TestInvariants(unittest.TestCase):
    """Test C^T and C^tau."""

    def test_constant_price_has_zero_physical_invariant(self):
        series = PriceSeries(np.arange(1000), np.full(1000, 2.0))
        self.assertEqual(c_physical(series, 10.0), 0.0)

    def test_intrinsic_invariant_from_overshoots(self):
        d = _dissection([0.02, 0.02], 0.01, n_dc=3, T=100.0)
        self.assertAlmostEqual(c_intrinsic_from(d), 3e-6, places=18)

    def test_zero_overshoot_variability(self):
        d = _dissection([0.01, 0.01, 0.01], 0.01, n_dc=4, T=50.0)
        self.assertEqual(c_intrinsic_from(d), 0.0)

    def test_too_few_events(self):
        with self.assertRaises(InsufficientDataError):
            c_intrinsic_from(_dissection([], 0.01, n_dc=1, T=10.0))
        series = PriceSeries([0, 1, 2, 3], [100, 102, 102.5, 102.4])
        with self.assertRaises(InsufficientDataError):
            c_intrinsic(series, 0.01)

    def test_single_pair_profile(self):
        series = synth_brownian(SynthConfig(sigma=SIGMA, n=100_000, seed=3))
        profile = invariant_profile(series, [60.0], [0.001])
        self.assertEqual(profile.c_physical.size, 1)
        self.assertEqual(profile.c_intrinsic.size, 1)
        self.assertEqual(profile.c_physical[0], c_physical(series, 60.0))
        self.assertEqual(profile.c_intrinsic[0], c_intrinsic(series, 0.001))

    def test_profile_grids_must_pair(self):
        series = synth_brownian(SynthConfig(sigma=SIGMA, n=10_000, seed=3))
        with self.assertRaises(ValueError):
            invariant_profile(series, [60.0, 120.0], [0.001])

    def test_failing_index_is_named(self):
        series = PriceSeries(np.arange(1000), np.full(1000, 2.0))
        with self.assertRaises(GridError) as ctx:
            invariant_profile(series, [10.0, 20.0], [0.001, 0.002])
        self.assertEqual(ctx.exception.point, 0.0)
        self.assertIn("Index 0", str(ctx.exception))

    def test_profile_csv(self):
        profile = _profile([1e-9, 2e-9], [3e-9, 4e-9])
        with tempfile.TemporaryDirectory() as tmp:
            path = profile.write_csv(os.path.join(tmp, "invariants.csv"))
            with open(path, encoding="utf-8") as f:
                lines = f.read().splitlines()
        self.assertEqual(lines[0], "I,dt,C_T,delta,C_tau")
        self.assertEqual(lines[1], "0,1.0,1e-09,0.001,3e-09")

    def test_model_invariants_from_exact_laws(self):
        dts = np.array([60.0, 600.0, 6000.0])
        deltas = np.array([0.001, 0.002, 0.004])
        fits = {
            ScalingLaws.SQUARED_RETURNS: PowerLawFit(2.5e-9, 1.0, 1.0, 3),
            ScalingLaws.OS_VARIABILITY: PowerLawFit(1.0, 2.0, 1.0, 3),
            ScalingLaws.NORMALIZED_DC_COUNT: PowerLawFit(2.5e-9, -2.0, 1.0, 3),
            ScalingLaws.MEAN_OVERSHOOT: PowerLawFit(1.0, 1.0, 1.0, 3),
        }
        points = {law: (dts if law == ScalingLaws.SQUARED_RETURNS else deltas, np.ones(3))
                  for law in fits}
        report = ScalingReport(fits=fits, points=points, span=1e6, n_ticks=10)
        model = model_invariants(report)
        self.assertEqual(model.source, "model")
        np.testing.assert_allclose(model.c_physical, 2.5e-9, rtol=1e-12)
        np.testing.assert_allclose(model.c_intrinsic, 2.5e-9, rtol=1e-12)


class TestBrownianInvariants(unittest.TestCase):
    """
    C^T and C^tau on Brownian motion both approach sigma^2 (one point per
    second, 10^6 points, profiles averaged over 20 seeds).
    """

    @classmethod
    def setUpClass(cls):
        delta_grid = LogGrid(percent_to_fraction(ProtocolDefaults.DELTA_LO_PCT),
                             percent_to_fraction(ProtocolDefaults.DELTA_HI_PCT),
                             ProtocolDefaults.DELTA_K)
        profiles = []
        for seed in range(20):
            series = synth_brownian(SynthConfig(sigma=SIGMA, n=1_000_000, seed=seed))
            dt_grid = LogGrid(60.0, span(series) / 100.0, ProtocolDefaults.DT_K)
            profiles.append(invariant_profile(series, dt_grid, delta_grid))
        cls.profiles = profiles
        cls.profile = average_profiles(profiles)

    def test_invariants_match_sigma_squared(self):
        summary = self.profile.summary()
        self.assertAlmostEqual(summary["mean_c_physical"] / SIGMA ** 2, 1.0, delta=0.1)
        self.assertAlmostEqual(summary["mean_c_intrinsic"] / SIGMA ** 2, 1.0, delta=0.1)
        self.assertAlmostEqual(summary["mean_c_intrinsic"] / summary["mean_c_physical"], 1.0,
                               delta=0.1)
        self.assertLess(summary["cv"], 0.1)
        self.assertEqual(summary["unit"], "1/s")

    def test_lambda_is_one(self):
        estimate = estimate_lambda(self.profile)
        self.assertAlmostEqual(estimate.lambda_, 1.0, delta=0.1)
        self.assertEqual(estimate.method, "ratio-of-pooled-means")
        self.assertEqual(estimate.n_points, 21)

    def test_values_non_negative(self):
        self.assertTrue(np.all(self.profile.c_physical >= 0))
        self.assertTrue(np.all(self.profile.c_intrinsic >= 0))

    def test_average_is_index_wise_mean(self):
        np.testing.assert_allclose(self.profile.c_intrinsic,
                                   np.mean([p.c_intrinsic for p in self.profiles], axis=0))
        self.assertEqual(self.profile.source, "averaged")

    def test_average_needs_shared_grids(self):
        with self.assertRaises(ValueError):
            average_profiles([])
        first = self.profiles[0]
        shifted = InvariantProfile(first.dt_grid * 2.0, first.delta_grid, first.c_physical,
                                   first.c_intrinsic)
        with self.assertRaises(ValueError):
            average_profiles([first, shifted])


class TestBridgeCheck(unittest.TestCase):
    """Test both sides of the bridge identity."""

    def test_lhs_is_consistent_with_sampling(self):
        series = synth_brownian(SynthConfig(sigma=SIGMA, n=200_000, seed=5))
        check = bridge_check(series, 60.0, 0.001)
        expected = span(series) / 60.0 * squared_return_mean(sample_returns(series, 60.0))
        self.assertEqual(check.lhs, expected)
        self.assertGreaterEqual(check.rhs, 0.0)

    def test_deterministic(self):
        series = synth_brownian(SynthConfig(sigma=SIGMA, n=200_000, seed=5))
        self.assertEqual(bridge_check(series, 60.0, 0.001), bridge_check(series, 60.0, 0.001))

    def test_brownian_sides_agree(self):
        """Both sides approach sigma^2 T."""
        ratios = []
        for seed in range(5):
            series = synth_brownian(SynthConfig(sigma=SIGMA, n=1_000_000, seed=100 + seed))
            check = bridge_check(series, 60.0, 0.001)
            self.assertLess(check.rel_gap, 0.3)
            ratios.append(check.ratio)
        self.assertAlmostEqual(float(np.mean(ratios)), 1.0, delta=0.1)

    def test_requires_overshoot(self):
        series = PriceSeries(np.arange(1000), np.full(1000, 2.0))
        with self.assertRaises(InsufficientDataError):
            bridge_check(series, 10.0, 0.001)


class TestEstimateLambda(unittest.TestCase):
    """Test the lambda estimator."""

    def test_constant_ratio(self):
        c_t = [1.1e-9, 2.3e-9, 0.7e-9, 5.0e-9]
        estimate = estimate_lambda(_profile(c_t, [2 * v for v in c_t]))
        self.assertEqual(estimate.lambda_, 2.0)
        self.assertEqual(estimate.dispersion, 0.0)

    def test_order_invariance(self):
        rng = np.random.default_rng(8)
        c_t = list(rng.uniform(1e-9, 3e-9, 21))
        c_tau = list(rng.uniform(1e-9, 3e-9, 21))
        base = estimate_lambda(_profile(c_t, c_tau))
        pairs = list(zip(c_t, c_tau))
        random.Random(1).shuffle(pairs)
        shuffled = estimate_lambda(_profile([a for a, _ in pairs], [b for _, b in pairs]))
        self.assertEqual(shuffled.lambda_, base.lambda_)
        self.assertEqual(shuffled.dispersion, base.dispersion)

    def test_zero_physical_invariant(self):
        with self.assertRaises(InsufficientDataError):
            estimate_lambda(_profile([0.0, 1e-9], [1e-9, 1e-9]))

    def test_divergence_is_reported(self):
        estimate = estimate_lambda(_profile([1e-9, 1e-9], [0.7e-9, 0.75e-9]))
        self.assertAlmostEqual(estimate.lambda_, 0.725, places=12)
        self.assertGreater(estimate.dispersion, 0.0)


class TestDecompose(unittest.TestCase):
    """Test per-window volatility and liquidity proxies."""

    def test_totals_reconcile(self):
        series = synth_brownian(SynthConfig(sigma=SIGMA, n=500_000, seed=6))
        windows = decompose(series, 0.001, 30_000.0)
        d = dissect(series, 0.001)
        self.assertEqual(len(windows), 17)
        self.assertEqual(sum(w.volatility_proxy for w in windows), d.n_dc)
        self.assertEqual(windows[0].window_start, 0.0)
        self.assertEqual(windows[1].window_start, 30_000.0)

    def test_single_window_matches_dissection(self):
        series = synth_brownian(SynthConfig(sigma=SIGMA, n=200_000, seed=7))
        d = dissect(series, 0.001)
        windows = decompose(series, 0.001, span(series))
        self.assertEqual(len(windows), 1)
        self.assertEqual(windows[0].volatility_proxy, d.n_dc)
        self.assertAlmostEqual(windows[0].liquidity_proxy, float(np.mean(d.overshoots)), places=15)

    def test_homogeneous_counts(self):
        series = synth_brownian(SynthConfig(sigma=SIGMA, n=1_000_000, seed=8))
        counts = np.array([w.volatility_proxy for w in decompose(series, 0.001, 100_000.0)])
        self.assertEqual(counts.size, 10)
        self.assertLess(counts.std() / counts.mean(), 0.2)

    def test_two_regimes(self):
        series = synth_regimes([RegimeSegment(1e-5, 100_000), RegimeSegment(1e-4, 100_000)])
        quiet, volatile = decompose(series, 0.002, 100_000.0)
        self.assertGreater(volatile.volatility_proxy, quiet.volatility_proxy)
        self.assertIsNotNone(volatile.liquidity_proxy)
        self.assertAlmostEqual(volatile.activity,
                               volatile.volatility_proxy * volatile.os_variability)

    def test_decimal_span_has_no_spurious_window(self):
        series = PriceSeries(np.round(np.arange(12) * 0.1, 10), np.full(12, 1.0))
        windows = decompose(series, 0.01, 0.1)
        self.assertEqual(len(windows), 11)
        self.assertEqual(sum(w.volatility_proxy for w in windows), 0)

    def test_invalid_window(self):
        series = synth_brownian(SynthConfig(sigma=SIGMA, n=1000, seed=1))
        with self.assertRaises(ValueError):
            decompose(series, 0.001, 0.0)

    def test_csv_has_empty_cells_for_quiet_windows(self):
        series = PriceSeries(np.arange(100, dtype=float), np.full(100, 1.0))
        windows = decompose(series, 0.01, 50.0)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_decomposition(windows, os.path.join(tmp, "decomposition.csv"))
            with open(path, encoding="utf-8") as f:
                lines = f.read().splitlines()
        self.assertEqual(lines[0], "window_start,volatility_proxy,liquidity_proxy,os_variability,activity")
        self.assertEqual(lines[1], "0.0,0,,,")


class TestBrownianTheory(unittest.TestCase):
    """Test closed-form Brownian expectations."""

    def test_reference_point(self):
        expected = bm_theoretical(0.001, 5e-5, 1e6)
        self.assertAlmostEqual(expected.expected_n / 2500.0, 1.0, places=12)
        self.assertEqual(expected.expected_os, 0.001)
        self.assertAlmostEqual(expected.var_os / 1e-6, 1.0, places=12)
        self.assertAlmostEqual(expected.rhs_product / 2.5e-3, 1.0, places=12)

    def test_unit_boundary(self):
        sigma, T = 5e-5, 1e6
        self.assertAlmostEqual(bm_theoretical(sigma * np.sqrt(T), sigma, T).expected_n, 1.0,
                               places=12)

    def test_doubling_threshold_quarters_count(self):
        a = bm_theoretical(0.001, 5e-5, 1e6).expected_n
        b = bm_theoretical(0.002, 5e-5, 1e6).expected_n
        self.assertAlmostEqual(b / a, 0.25, places=12)

    def test_invalid_inputs(self):
        with self.assertRaises(ValueError):
            bm_theoretical(0.0, 5e-5, 1e6)
        with self.assertRaises(ValueError):
            bm_theoretical(0.001, 5e-5, -1.0)
        with self.assertRaises(ValueError):
            bm_theoretical(0.001, 5e-5, 1e6, dt=0.0)

    def test_step_overshoot_constant(self):
        """-zeta(1/2) / sqrt(2 pi) for Gaussian steps."""
        self.assertAlmostEqual(STEP_OVERSHOOT, 0.582597, places=6)

    def test_discrete_monitoring(self):
        shift = STEP_OVERSHOOT * 5e-5
        expected = bm_theoretical(0.001, 5e-5, 1e6, dt=1.0)
        self.assertAlmostEqual(expected.effective_delta, 0.001 + 2 * shift, places=15)
        self.assertAlmostEqual(expected.expected_n / (2.5e-3 / (0.001 + 2 * shift) ** 2), 1.0,
                               places=12)
        self.assertAlmostEqual(expected.expected_os, 0.001 + shift, places=15)
        self.assertAlmostEqual(expected.expected_n / 2500.0, 0.893, delta=0.001)
        # N * <(omega - delta)^2> stays close to sigma^2 T
        self.assertAlmostEqual(expected.rhs_product / 2.5e-3, 1.0, delta=0.001)

    def test_continuous_monitoring_is_default(self):
        self.assertEqual(bm_theoretical(0.001, 5e-5, 1e6).effective_delta, 0.001)

    def test_coarser_observation_lowers_count(self):
        counts = [bm_theoretical(0.001, 5e-5, 1e6, dt=dt).expected_n for dt in (0.25, 1.0, 4.0)]
        self.assertTrue(counts[0] > counts[1] > counts[2])


class TestReferenceComparison(unittest.TestCase):
    """Test comparison with published reference values."""

    def test_lambda_reference(self):
        comparison = reference_comparison(
            "usdjpy", lambda_estimate=estimate_lambda(_profile([1e-9], [0.8e-9])))
        self.assertEqual(comparison["lambda"]["reference"], 0.7235)
        self.assertAlmostEqual(comparison["lambda"]["measured"], 0.8, places=12)

    def test_unknown_reference(self):
        with self.assertRaises(ValueError):
            reference_comparison("nasdaq")


if __name__ == '__main__':
    unittest.main()
