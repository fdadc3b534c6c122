"""Unit tests for chain parameterization and vacuum correlations."""

import math
import unittest
import sys
import os

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..")))

import numpy as np
from numpy.testing import assert_allclose
from scipy.integrate import quad
from scipy.special import hyp2f1

from core.chain_model import (EULER_GAMMA, SQRT2, balance_critical_size, build_correlations,
                              circulant_purity_defect, classify_regime, dispersion,
                              finite_size_g_correction, g_infinite, g_strong_asymptotic,
                              g_weak_asymptotic, h_infinite, h_strong_limit, h_weak_asymptotic,
                              hyp2f1_log_leading, hypergeometric_2f1, participation_decay_slope,
                              regime_scales, single_site_kappa2, single_site_lambda,
                              single_site_partner)
from core.errors import DomainError
from core.interfaces import ChainSpec, Regime
from utils.sweep_config import CorrelationMethod, NumericsSettings, Thresholds
from tests.helpers import dense_vacuum


class TestChainSpec(unittest.TestCase):
    """Test suite for ChainSpec constructors."""

    def test_from_xi_fields(self):
        spec = ChainSpec.from_xi(64, 0.5)
        self.assertAlmostEqual(spec.z, math.tanh(0.5), places=15)
        self.assertAlmostEqual(spec.alpha, math.tanh(1.0), places=15)
        self.assertAlmostEqual(spec.mu_aux, 1.0 / math.sqrt(1.0 + spec.z ** 2), places=15)
        self.assertAlmostEqual(spec.one_minus_alpha, 1.0 - spec.alpha, places=14)
        self.assertAlmostEqual(spec.one_minus_z, 1.0 - spec.z, places=14)
        self.assertAlmostEqual(spec.one_minus_z_squared, 1.0 - spec.z ** 2, places=14)

    def test_strong_coupling_complements_keep_precision(self):
        spec = ChainSpec.from_xi(64, 12.0)
        self.assertEqual(spec.alpha, 1.0)
        self.assertAlmostEqual(spec.one_minus_alpha / (2.0 * math.exp(-48.0)), 1.0, places=12)
        self.assertAlmostEqual(spec.one_minus_z / (2.0 * math.exp(-24.0)), 1.0, places=9)

    def test_alternate_constructors(self):
        self.assertAlmostEqual(ChainSpec.from_alpha(16, 0.5).alpha, 0.5, places=14)
        self.assertAlmostEqual(ChainSpec.from_z(16, 0.2).z, 0.2, places=14)
        spec = ChainSpec.from_xi(16, 9.0)
        again = ChainSpec.from_one_minus_alpha(16, spec.one_minus_alpha)
        self.assertAlmostEqual(again.xi / spec.xi, 1.0, places=12)

    def test_invalid_parameters(self):
        with self.assertRaises(DomainError):
            ChainSpec.from_alpha(16, 1.0)
        with self.assertRaises(DomainError):
            ChainSpec.from_xi(16, 0.0)
        with self.assertRaises(DomainError):
            ChainSpec.from_xi(0, 1.0)
        with self.assertRaises(ValueError):
            ChainSpec.from_z(16, -0.1)

    def test_with_size(self):
        spec = ChainSpec.from_xi(16, 2.0).with_size(128)
        self.assertEqual(spec.N, 128)
        self.assertEqual(spec.xi, 2.0)


class TestCorrelationTable(unittest.TestCase):
    """Test suite for finite chain correlation tables."""

    def test_dispersion(self):
        self.assertAlmostEqual(dispersion(0.0, 0.5), math.sqrt(0.5), places=15)
        theta = np.array([0.0, math.pi / 2, math.pi])
        assert_allclose(dispersion(theta, 0.5), np.sqrt(1.0 - 0.5 * np.cos(theta)), rtol=1e-14)
        with self.assertRaises(DomainError):
            dispersion(0.0, 1.5)

    def test_weak_limit_is_uncorrelated(self):
        table = build_correlations(ChainSpec.from_xi(32, 1e-6))
        self.assertAlmostEqual(table.g[0], 0.5, places=9)
        self.assertAlmostEqual(table.h[0], 0.5, places=9)
        self.assertLess(np.max(np.abs(table.g[1:])), 1e-5)

    def test_matches_dense_vacuum(self):
        for N in (2, 5, 8, 12):
            for alpha in (0.3, 0.9):
                spec = ChainSpec.from_alpha(N, alpha)
                table = build_correlations(spec)
                G, H = dense_vacuum(N, spec.alpha)
                assert_allclose(table.g, G[0], rtol=0, atol=1e-12)
                assert_allclose(table.h, H[0], rtol=0, atol=1e-12)

    def test_direct_and_fft_agree(self):
        direct = NumericsSettings(correlation_method=CorrelationMethod.DIRECT)
        fft = NumericsSettings(correlation_method=CorrelationMethod.FFT)
        for N in (64, 65):
            for xi in (1.0, 3.0):
                spec = ChainSpec.from_xi(N, xi)
                a = build_correlations(spec, direct)
                b = build_correlations(spec, fft)
                scale = a.g[0]
                assert_allclose(a.g, b.g, rtol=0, atol=1e-13 * scale)
                assert_allclose(a.h, b.h, rtol=0, atol=1e-13)

    def test_ring_symmetry(self):
        table = build_correlations(ChainSpec.from_xi(37, 2.0))
        for l in range(1, 37):
            self.assertEqual(table.g[l], table.g[37 - l])
            self.assertEqual(table.h[l], table.h[37 - l])

    def test_tables_are_read_only(self):
        table = build_correlations(ChainSpec.from_xi(16, 1.0))
        with self.assertRaises(ValueError):
            table.g[0] = 1.0

    def test_circulant_purity(self):
        for xi in (0.5, 3.0, 6.0):
            table = build_correlations(ChainSpec.from_xi(256, xi))
            self.assertLess(circulant_purity_defect(table), 1e-10)

    def test_rejects_single_site_ring(self):
        with self.assertRaises(DomainError):
            build_correlations(ChainSpec.from_xi(1, 1.0))


class TestInfiniteChain(unittest.TestCase):
    """Test suite for closed form infinite chain correlators."""

    def test_hypergeometric_power_series(self):
        for a, b, c, x in [(0.5, 3.5, 4.0, 0.5), (-0.5, 2.5, 4.0, 0.9), (0.5, 0.5, 1.0, 0.98)]:
            self.assertAlmostEqual(hypergeometric_2f1(a, b, c, x) / hyp2f1(a, b, c, x), 1.0, places=10)

    def test_hypergeometric_log_branch_matches_power_series(self):
        x = 0.995
        power = hypergeometric_2f1(0.5, 3.5, 4.0, x, thresholds=Thresholds(z2_log_branch=0.999))
        logarithmic = hypergeometric_2f1(0.5, 3.5, 4.0, x, one_minus_x=0.005)
        self.assertAlmostEqual(logarithmic / power, 1.0, places=10)

    def test_log_leading_term(self):
        y = 1e-10
        full = hypergeometric_2f1(0.5, 2.5, 3.0, 1.0 - y, one_minus_x=y)
        self.assertAlmostEqual(hyp2f1_log_leading(2, y) / full, 1.0, places=7)

    def test_finite_chain_converges_to_infinite(self):
        spec = ChainSpec.from_xi(2048, 0.5)
        table = build_correlations(spec)
        for l in range(11):
            self.assertAlmostEqual(table.g[l], g_infinite(l, spec), places=10)
            self.assertAlmostEqual(table.h[l], h_infinite(l, spec), places=10)

    def test_log_branch_against_quadrature(self):
        spec = ChainSpec.from_xi(64, 3.0)
        oma = spec.one_minus_alpha

        def nu(theta):
            s = math.sin(theta / 2.0)
            return math.sqrt(oma + 2.0 * spec.alpha * s * s)

        for l in (0, 1, 5):
            g_ref, _ = quad(lambda t: math.cos(l * t) / nu(t), 0.0, math.pi,
                            points=[math.sqrt(oma)], limit=1000, epsabs=1e-13, epsrel=1e-12)
            h_ref, _ = quad(lambda t: math.cos(l * t) * nu(t), 0.0, math.pi,
                            points=[math.sqrt(oma)], limit=1000, epsabs=1e-13, epsrel=1e-12)
            self.assertAlmostEqual(g_infinite(l, spec) / (g_ref / (2.0 * math.pi)), 1.0, places=8)
            self.assertAlmostEqual(h_infinite(l, spec) / (h_ref / (2.0 * math.pi)), 1.0, places=7)

    def test_strong_limit_of_h(self):
        spec = ChainSpec.from_xi(64, 12.0)
        for l in range(6):
            self.assertAlmostEqual(h_infinite(l, spec) / h_strong_limit(l), 1.0, places=7)
        self.assertAlmostEqual(h_strong_limit(0), SQRT2 / math.pi, places=15)

    def test_weak_asymptotics(self):
        spec = ChainSpec.from_xi(64, 0.1)
        l = 200
        self.assertAlmostEqual(g_infinite(l, spec) / g_weak_asymptotic(l, spec), 1.0, delta=0.02)
        self.assertAlmostEqual(h_infinite(l, spec) / h_weak_asymptotic(l, spec), 1.0, delta=0.02)
        with self.assertRaises(DomainError):
            g_weak_asymptotic(0, spec)

    def test_strong_asymptote_misses_only_euler_constant(self):
        spec = ChainSpec.from_xi(64, 12.0)
        for l in (10, 100):
            gap = g_infinite(l, spec) - g_strong_asymptotic(l, spec)
            self.assertAlmostEqual(gap, -EULER_GAMMA / (SQRT2 * math.pi), delta=2e-3)

    def test_strong_asymptote_range(self):
        spec = ChainSpec.from_xi(64, 1.0)
        with self.assertRaises(DomainError):
            g_strong_asymptotic(10, spec)

    def test_negative_separation(self):
        with self.assertRaises(DomainError):
            g_infinite(-1, ChainSpec.from_xi(8, 1.0))


class TestRegimes(unittest.TestCase):
    """Test suite for regime scales and classification."""

    def test_scales_at_strong_coupling(self):
        scales = regime_scales(ChainSpec.from_xi(2048, 12.0))
        self.assertAlmostEqual(scales.N_t / math.exp(24.0), 1.0, places=9)
        self.assertAlmostEqual(scales.l_c * math.exp(-24.0) * 2.0, 1.0, places=6)
        self.assertAlmostEqual(scales.N_c, scales.N_t / math.log(scales.N_t), places=3)

    def test_critical_size_fallback(self):
        scales = regime_scales(ChainSpec.from_xi(16, 0.1))
        self.assertLess(scales.N_t, math.e)
        self.assertEqual(scales.N_c, scales.N_t)

    def test_balance_critical_size_tracks_nc(self):
        spec = ChainSpec.from_xi(2048, 12.0)
        ratio = balance_critical_size(spec) / regime_scales(spec).N_c
        self.assertAlmostEqual(ratio, math.pi / 2.0, delta=0.1)

    def test_classification(self):
        self.assertEqual(classify_regime(ChainSpec.from_xi(2048, 0.5)), Regime.I)
        self.assertEqual(classify_regime(ChainSpec.from_xi(2048, 4.0)), Regime.II)
        self.assertEqual(classify_regime(ChainSpec.from_xi(2048, 12.0)), Regime.III)

    def test_finite_size_term(self):
        spec = ChainSpec.from_xi(100, 3.0)
        N_t = regime_scales(spec).N_t
        self.assertAlmostEqual(finite_size_g_correction(spec), N_t / (2.0 * SQRT2 * 100), places=10)


class TestSingleSite(unittest.TestCase):
    """Test suite for the single site block."""

    def setUp(self):
        self.table = build_correlations(ChainSpec.from_xi(64, 1.0))

    def test_kappa_squared_identity(self):
        direct = self.table.g[0] * self.table.h[0] - 0.25
        self.assertAlmostEqual(single_site_kappa2(self.table) / direct, 1.0, places=10)

    def test_weak_lambda(self):
        spec = ChainSpec.from_z(64, 0.05)
        lam, excess = single_site_lambda(build_correlations(spec))
        self.assertAlmostEqual(excess / (spec.z ** 2 / 8.0), 1.0, delta=1e-2)
        self.assertAlmostEqual(lam - 0.5, excess, places=12)

    def test_partner_mode(self):
        u_B, v_B, weights = single_site_partner(self.table)
        kappa = math.sqrt(single_site_kappa2(self.table))
        assert_allclose(v_B, self.table.g[1:] / kappa)
        self.assertAlmostEqual(float(np.dot(u_B, v_B)), 1.0, places=9)
        self.assertAlmostEqual(float(np.sum(weights)), 1.0, places=9)

    def test_strong_participation_decay(self):
        table = build_correlations(ChainSpec.from_xi(4096, 12.0))
        slope = participation_decay_slope(table, 10, 200)
        self.assertGreater(slope, -2.05)
        self.assertLess(slope, -1.95)

    def test_weak_participation_decay(self):
        table = build_correlations(ChainSpec.from_xi(256, 0.3))
        slope = participation_decay_slope(table, 3, 12, remove_exponential=True)
        self.assertGreater(slope, -2.2)
        self.assertLess(slope, -1.85)

    def test_decay_range_validation(self):
        with self.assertRaises(DomainError):
            participation_decay_slope(self.table, 5, 5)


if __name__ == '__main__':
    unittest.main()
