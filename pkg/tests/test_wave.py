"""
Unit tests for traveling-wave analysis
"""

import math
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np

from pycascade.analysis.wave import (
    WaveProfile, ahead_intercept_prediction, decay_velocity, dispersion_roots,
    effective_velocity, extract_profile, fit_velocity, profile_distance,
    selected_velocity, sliding_velocities, tail_fit, wave_equation_residual,
)
from pycascade.core.errors import DomainError, FitError
from pycascade.core.recurrence import FrontTrace, run
from pycascade.utils.serializer import read_csv

INV_E = 1.0 / math.e
BRAMSON_B = 1.5 / math.e


class TestVelocityFit(unittest.TestCase):
    """Test front velocity fits on synthetic traces"""

    def test_affine_trace(self):
        """x_f = 0.5 n + 2 is recovered exactly"""
        n = np.arange(101)
        fit = fit_velocity(FrontTrace(n, 0.5 * n + 2.0), (0, 100), with_log=False)
        self.assertAlmostEqual(fit.v, 0.5, places=10)
        self.assertAlmostEqual(fit.c0, 2.0, places=8)
        self.assertLess(fit.residual_rms, 1e-10)
        self.assertIsNone(fit.b)

    def test_log_corrected_trace(self):
        """x_f = n/e + (3/2e) ln n + 1 is recovered to 1e-9"""
        n = np.arange(1, 501)
        trace = FrontTrace(n, n * INV_E + BRAMSON_B * np.log(n) + 1.0)
        fit = fit_velocity(trace, (1, 500))
        self.assertAlmostEqual(fit.v, INV_E, delta=1e-9)
        self.assertAlmostEqual(fit.b, BRAMSON_B, delta=1e-9)
        self.assertEqual(fit.window, (1, 500))

    def test_short_window(self):
        """Fewer than ten fronts cannot be fitted"""
        n = np.arange(1, 50)
        trace = FrontTrace(n, 0.3 * n)
        with self.assertRaises(FitError):
            fit_velocity(trace, (1, 5))

    def test_log_fit_needs_positive_n(self):
        """ln n is undefined at n = 0"""
        n = np.arange(0, 50)
        with self.assertRaises(FitError):
            fit_velocity(FrontTrace(n, 0.3 * n + 1.0), (0, 40))

    def test_sliding_velocities_decrease_toward_limit(self):
        """With a positive log term, linear fits approach 1/e from above"""
        n = np.arange(1, 1001)
        trace = FrontTrace(n, n * INV_E + BRAMSON_B * np.log(n))
        fits = sliding_velocities(trace, width=100)
        self.assertEqual(len(fits), 10)
        velocities = [f.v for f in fits]
        self.assertTrue(all(v > INV_E for v in velocities))
        self.assertTrue(all(b < a for a, b in zip(velocities, velocities[1:])))

    def test_effective_velocity(self):
        """Last increment of the trace"""
        n = np.arange(10)
        trace = FrontTrace(n, n ** 2 + 1.0)
        self.assertEqual(effective_velocity(trace, 5), 9.0)
        with self.assertRaises(DomainError):
            effective_velocity(trace, 0)


class TestDispersion(unittest.TestCase):
    """Test the dispersion relation and velocity selection"""

    def test_double_root_at_selected_velocity(self):
        """v = 1/e has the single root a = e"""
        solution = dispersion_roots(INV_E)
        self.assertTrue(solution.double_root)
        self.assertAlmostEqual(solution.roots[0], math.e, delta=1e-9)

    def test_two_roots(self):
        """v = 0.2 has roots near 1.2959 and 12.713"""
        solution = dispersion_roots(0.2)
        self.assertEqual(len(solution.roots), 2)
        a_minus, a_plus = solution.roots
        self.assertAlmostEqual(a_minus, 1.2959, delta=1e-3)
        self.assertAlmostEqual(a_plus, 12.713, delta=1e-3)
        for a in solution.roots:
            self.assertLessEqual(abs(a * math.exp(-0.2 * a) - 1.0), 1e-12)
            self.assertAlmostEqual(decay_velocity(a), 0.2, delta=1e-9)

    def test_no_roots_above_limit(self):
        """v = 0.4 exceeds 1/e and has no root"""
        self.assertEqual(dispersion_roots(0.4).roots, [])

    def test_invalid_velocity(self):
        """v must be positive"""
        with self.assertRaises(ValueError):
            dispersion_roots(0.0)

    def test_selected_velocity(self):
        """Maximum of ln(a)/a is 1/e at a = e"""
        v, a = selected_velocity()
        self.assertAlmostEqual(v, INV_E, delta=1e-9)
        self.assertAlmostEqual(a, math.e, delta=1e-9)
        self.assertTrue(dispersion_roots(v).double_root)

    def test_decay_velocity_below_maximum(self):
        """v(e^2) = 2/e^2 < 1/e"""
        self.assertAlmostEqual(decay_velocity(math.e ** 2), 2 / math.e ** 2)
        self.assertLess(decay_velocity(math.e ** 2), INV_E)


class TestWaveProfile(unittest.TestCase):
    """Test profiles extracted from a recurrence run"""

    @classmethod
    def setUpClass(cls):
        cls.result = run(120, store=[80, 120], h=1e-2)
        cls.profile = extract_profile(cls.result.profile(120), n=120)
        cls.earlier = extract_profile(cls.result.profile(80), n=80)
        cls.v = effective_velocity(cls.result.front_trace(), 120)

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def test_centered_at_half(self):
        """Pi(0) = 1/2 exactly"""
        self.assertEqual(self.profile.pi(0.0), 0.5)
        self.assertAlmostEqual(self.profile.front, self.result.fronts[120])

    def test_monotone_and_bounded(self):
        """Pi is a non-increasing probability"""
        values = self.profile.values
        self.assertTrue(np.all(np.diff(values) <= 1e-13))
        self.assertTrue(np.all((values >= 0) & (values <= 1)))

    def test_integrals_positive(self):
        """L and R are finite and positive with small tail bounds"""
        self.assertGreater(self.profile.L, 0.0)
        self.assertGreater(self.profile.R, 0.0)
        self.assertLess(self.profile.R_tail_bound, 1e-6)
        self.assertLess(self.profile.L_tail_bound, 1e-6)

    def test_profiles_collapse(self):
        """Centered profiles at different n nearly coincide"""
        self.assertLess(profile_distance(self.profile, self.earlier, (-5.0, 10.0)), 2e-2)

    def test_ahead_tail(self):
        """ln Pi has slope -1 ahead of the front"""
        fit = tail_fit(self.profile, "ahead")
        self.assertLess(abs(fit.slope + 1.0), 0.1)
        self.assertGreater(fit.r_squared, 0.99)

    def test_ahead_intercept(self):
        """Ahead intercept is R - L - v"""
        fit = tail_fit(self.profile, "ahead")
        self.assertAlmostEqual(fit.intercept, ahead_intercept_prediction(self.profile, self.v), delta=0.05)

    def test_behind_tail(self):
        """ln(1 - Pi) rises with slope near e behind the front"""
        fit = tail_fit(self.profile, "behind")
        self.assertLess(abs(fit.slope - math.e) / math.e, 0.25)

    def test_residual_small(self):
        """The profile solves the wave equation at the effective velocity"""
        self.assertLess(wave_equation_residual(self.profile, self.v), 1e-2)

    def test_residual_detects_corruption(self):
        """Scaling Pi by 0.9 breaks the wave equation"""
        corrupted = WaveProfile.from_grid(
            self.profile.pi.with_values(0.9 * self.profile.values), self.profile.front
        )
        self.assertGreater(wave_equation_residual(corrupted, self.v), 0.1)

    def test_tail_fit_errors(self):
        """Empty windows and unknown sides are rejected"""
        with self.assertRaises(FitError):
            tail_fit(self.profile, "ahead", window=(100.0, 200.0))
        with self.assertRaises(ValueError):
            tail_fit(self.profile, "sideways")

    def test_residual_window_outside_profile(self):
        """A residual window beyond the profile raises DomainError"""
        with self.assertRaises(DomainError):
            wave_equation_residual(self.profile, self.v, window=(-100.0, 10.0))

    def test_insufficient_margin(self):
        """Profiles too close to the origin are refused"""
        short = run(10, store=[10], h=1e-2)
        with self.assertRaises(DomainError):
            extract_profile(short.profile(10))

    def test_to_csv(self):
        """Profile CSV has xi and pi columns"""
        rows = read_csv(self.profile.to_csv(Path(self.test_dir) / "profile.csv"))
        self.assertEqual(list(rows[0].keys()), ["xi", "pi"])
        self.assertEqual(len(rows), len(self.profile.pi))


class TestWaveConvergence(unittest.TestCase):
    """Test the approach of P_n to a traveling wave"""

    @classmethod
    def setUpClass(cls):
        cls.result = run(300, store=[100, 200, 300], h=5e-3)

    def test_residual_decreases_with_n(self):
        """The wave-equation residual shrinks from n = 100 to 200 to 300"""
        trace = self.result.front_trace()
        residuals = [
            wave_equation_residual(extract_profile(self.result.profile(n), n=n),
                                   effective_velocity(trace, n))
            for n in (100, 200, 300)
        ]
        self.assertLess(residuals[1], residuals[0])
        self.assertLess(residuals[2], residuals[1])


if __name__ == '__main__':
    unittest.main()
