"""
Test equidistant sampling and mean squared returns.
"""

import sys
import os
import unittest

import numpy as np

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from timebridge import (
    InsufficientDataError, PriceSeries, SeriesError, SynthConfig, sample_prices,
    sample_returns, squared_return_mean, synth_brownian,
)
from timebridge.physical import ReturnSample


class TestSampleReturns(unittest.TestCase):
    """Test previous-tick sampling."""

    def test_simple_returns(self):
        series = PriceSeries([0, 1, 2], [1.0, 1.1, 1.21])
        sample = sample_returns(series, 1.0)
        np.testing.assert_allclose(sample.returns, [0.1, 0.1], rtol=1e-12)
        self.assertEqual(sample.n_windows, 2)

    def test_constant_price(self):
        series = PriceSeries(np.arange(100), np.full(100, 3.0))
        for dt in (1.0, 7.0, 33.0):
            self.assertTrue(np.all(sample_returns(series, dt).returns == 0.0))

    def test_previous_tick(self):
        """The grid takes the last price at or before each sampling time."""
        series = PriceSeries([0.0, 0.5, 2.0, 3.5], [1.0, 2.0, 4.0, 8.0])
        np.testing.assert_array_equal(sample_prices(series, 1.0), [1.0, 2.0, 4.0, 4.0])

    def test_window_count(self):
        series = PriceSeries(np.linspace(0.0, 10.0, 41), np.ones(41))
        for dt in (0.3, 1.0, 2.5, 3.0, 10.0):
            n = sample_returns(series, dt).n_windows
            self.assertLessEqual(n * dt, 10.0)
            self.assertLess(10.0, (n + 1) * dt)

    def test_equidistant_series_reproduces_tick_returns(self):
        series = synth_brownian(SynthConfig(sigma=1e-3, n=500, dt=2.0, seed=4))
        raw = np.diff(series.prices) / series.prices[:-1]
        np.testing.assert_array_equal(sample_returns(series, 2.0).returns, raw)

    def test_decimal_timestamps_keep_every_window(self):
        """T/dt just below an integer in floating point still counts the last window."""
        series = PriceSeries([0.0, 0.1, 0.2, 0.3], [1.0, 2.0, 4.0, 8.0])
        sample = sample_returns(series, 0.1)
        self.assertEqual(sample.n_windows, 3)
        np.testing.assert_array_equal(sample.returns, [1.0, 1.0, 1.0])

    def test_fractional_dt_reproduces_tick_returns(self):
        rng = np.random.default_rng(11)
        for dt in (0.1, 0.7):
            times = np.round(np.arange(100) * dt, 10)
            prices = 100.0 + np.cumsum(rng.standard_normal(100))
            series = PriceSeries(times, prices)
            raw = np.diff(prices) / prices[:-1]
            sample = sample_returns(series, dt)
            self.assertEqual(sample.n_windows, 99)
            np.testing.assert_array_equal(sample.returns, raw)

    def test_invalid_dt(self):
        series = PriceSeries([0, 1, 2], [1.0, 1.1, 1.21])
        with self.assertRaises(ValueError):
            sample_returns(series, 0.0)
        with self.assertRaises(SeriesError):
            sample_returns(series, 5.0)


class TestSquaredReturnMean(unittest.TestCase):
    """Test <r(dt)>_2."""

    def test_mean_of_squares(self):
        sample = ReturnSample(1.0, np.array([0.1, 0.1]), 2.0)
        self.assertAlmostEqual(squared_return_mean(sample), 0.01, places=15)

    def test_zero_returns(self):
        self.assertEqual(squared_return_mean(ReturnSample(1.0, np.zeros(4), 4.0)), 0.0)

    def test_empty_sample(self):
        with self.assertRaises(InsufficientDataError):
            squared_return_mean(ReturnSample(1.0, np.empty(0), 0.5))

    def test_brownian_variance(self):
        """<r(60)>_2 ~ sigma^2 * 60."""
        sigma = 5e-5
        series = synth_brownian(SynthConfig(sigma=sigma, n=1_000_000, seed=0))
        value = squared_return_mean(sample_returns(series, 60.0))
        self.assertAlmostEqual(value / (sigma ** 2 * 60.0), 1.0, delta=0.05)


if __name__ == '__main__':
    unittest.main()
