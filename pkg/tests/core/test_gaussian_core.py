"""Unit tests for block extraction and the Williamson decomposition."""

import math
import unittest
import sys
import os

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..")))

from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.chain_model import build_correlations, single_site_kappa2, single_site_partner
from core.errors import DomainError, NumericalStageError, UnmappedModeError
from core.gaussian_core import (EVEN, ODD, WilliamsonMode, complement_spectrum, cross_spectrum,
                                demodulate, extract_block, map_modes, parity_sectors,
                                participation, symplectic_spectrum, turning_point,
                                weak_mode_ansatz, williamson_modes)
from core.interfaces import BlockPartition, ChainSpec
from utils.sweep_config import NumericsSettings
from tests.helpers import block_sites, dense_vacuum, reflection, williamson_oracle


def _covariance(N, xi, N_b, block_start=0):
    table = build_correlations(ChainSpec.from_xi(N, xi))
    return table, extract_block(table, BlockPartition(block_start, N_b))


class TestExtractBlock(unittest.TestCase):
    """Test suite for block covariance extraction."""

    def test_single_site(self):
        table, cov = _covariance(16, 1.0, 1)
        assert_allclose(cov.G_A, [[table.g[0]]])
        assert_allclose(cov.H_AB[0], table.h[1:])
        self.assertEqual(cov.N_B, 15)

    def test_wrapping_block_matches_dense_matrices(self):
        N, alpha = 10, 0.7
        spec = ChainSpec.from_alpha(N, alpha)
        table = build_correlations(spec)
        cov = extract_block(table, BlockPartition(8, 4))
        G, H = dense_vacuum(N, spec.alpha)
        sites_A = block_sites(N, 8, 4)
        sites_B = block_sites(N, 12, 6)
        assert_allclose(cov.G_A, G[np.ix_(sites_A, sites_A)], atol=1e-12)
        assert_allclose(cov.G_AB, G[np.ix_(sites_A, sites_B)], atol=1e-12)
        assert_allclose(cov.H_AB, H[np.ix_(sites_A, sites_B)], atol=1e-12)
        assert_allclose(cov.H_B(), H[np.ix_(sites_B, sites_B)], atol=1e-12)

    def test_weak_coupling_is_nearly_diagonal(self):
        _, cov = _covariance(32, 1e-6, 4)
        assert_allclose(cov.G_A, 0.5 * np.eye(4), atol=1e-6)
        self.assertLess(np.max(np.abs(cov.G_AB)), 1e-6)

    def test_block_too_large(self):
        table = build_correlations(ChainSpec.from_xi(16, 1.0))
        with self.assertRaises(DomainError):
            extract_block(table, BlockPartition(0, 9))

    def test_swapped_view(self):
        _, cov = _covariance(20, 1.0, 4)
        other = cov.swapped()
        self.assertEqual(other.N_b, 16)
        self.assertTrue(other.partition.complement)
        assert_allclose(other.G_AB, cov.G_AB.T)


class TestParitySectors(unittest.TestCase):
    """Test suite for the reflection sector split."""

    def test_two_site_sectors(self):
        table, cov = _covariance(16, 1.0, 2)
        even, odd = parity_sectors(cov)
        self.assertEqual(even.parity, EVEN)
        self.assertEqual(odd.parity, ODD)
        self.assertAlmostEqual(even.G[0, 0], table.g[0] + table.g[1], places=12)
        self.assertAlmostEqual(odd.G[0, 0], table.g[0] - table.g[1], places=12)

    def test_odd_block_sizes(self):
        _, cov = _covariance(16, 1.0, 5)
        even, odd = parity_sectors(cov)
        self.assertEqual(even.size, 3)
        self.assertEqual(odd.size, 2)
        basis = np.hstack([even.basis, odd.basis])
        assert_allclose(basis.T @ basis, np.eye(5), atol=1e-15)
        assert_allclose(reflection(even.basis), even.basis)
        assert_allclose(reflection(odd.basis), -odd.basis)


class TestSymplecticSpectrum(unittest.TestCase):
    """Test suite for symplectic spectra against a dense oracle."""

    def _check_against_oracle(self, N, alpha, N_b, block_start=0):
        spec = ChainSpec.from_alpha(N, alpha)
        table = build_correlations(spec)
        cov = extract_block(table, BlockPartition(block_start, N_b))
        G, H = dense_vacuum(N, spec.alpha)
        expected = williamson_oracle(G, H, block_sites(N, block_start, N_b))
        spectrum = symplectic_spectrum(cov)
        assert_allclose(np.sort(spectrum.lambdas)[::-1], expected, rtol=1e-9)

    def test_two_site_block(self):
        self._check_against_oracle(8, 0.5, 2)

    def test_grid(self):
        for alpha in (0.3, 0.9, 0.99):
            for N_b in range(1, 7):
                with self.subTest(alpha=alpha, N_b=N_b):
                    self._check_against_oracle(12, alpha, N_b, block_start=3)

    def test_single_site(self):
        table, cov = _covariance(64, 2.0, 1)
        spectrum = symplectic_spectrum(cov)
        self.assertEqual(len(spectrum), 1)
        self.assertAlmostEqual(spectrum.lambdas[0], math.sqrt(table.g[0] * table.h[0]), places=12)
        self.assertEqual(spectrum.parities[0], EVEN)

    def test_excess_tracks_lambda(self):
        _, cov = _covariance(64, 1.0, 8)
        spectrum = symplectic_spectrum(cov)
        self.assertTrue(np.all(spectrum.lambdas >= 0.5))
        self.assertTrue(np.all(np.diff(spectrum.excesses) <= 1e-9 * spectrum.excesses[0]))
        large = spectrum.excesses > 1e-3
        assert_allclose(spectrum.lambdas[large] - 0.5, spectrum.excesses[large], rtol=1e-10)

    def test_cross_spectrum_consistency(self):
        _, cov = _covariance(64, 2.0, 8)
        spectrum = symplectic_spectrum(cov)
        kappa2 = spectrum.excesses * (spectrum.lambdas + 0.5)
        assert_allclose(np.sort(cross_spectrum(cov)), np.sort(kappa2), rtol=1e-6, atol=1e-14)

    def test_cross_spectrum_single_site(self):
        table, cov = _covariance(64, 1.0, 1)
        self.assertAlmostEqual(cross_spectrum(cov)[0] / single_site_kappa2(table), 1.0, places=9)

    def test_cross_spectrum_weak_coupling(self):
        _, cov = _covariance(32, 1e-6, 4)
        self.assertLess(cross_spectrum(cov)[0], 1e-11)

    def test_toeplitz_route_matches_dense_route(self):
        _, cov = _covariance(64, 2.0, 8)
        dense = cross_spectrum(cov)
        toeplitz_route = cross_spectrum(cov, NumericsSettings(dense_complement_max=8))
        assert_allclose(toeplitz_route, dense, rtol=1e-7, atol=1e-14)

    def test_complement_has_same_spectrum(self):
        _, cov = _covariance(24, 1.0, 5)
        block = symplectic_spectrum(cov)
        complement = complement_spectrum(cov)
        self.assertEqual(len(complement), 19)
        assert_allclose(complement.excesses[:5], block.excesses, rtol=1e-7)
        self.assertLess(np.max(complement.excesses[5:]), 1e-10)

    def test_indefinite_block_raises_stage_error(self):
        _, cov = _covariance(32, 1.0, 4)
        broken = replace(cov, G_A=-np.eye(4))
        with self.assertRaises(NumericalStageError) as ctx:
            symplectic_spectrum(broken)
        self.assertEqual(ctx.exception.stage, "symplectic_spectrum")

    def test_eigenvalue_far_below_quarter_raises(self):
        _, cov = _covariance(32, 1.0, 4)
        broken = replace(cov, H_A=0.5 * cov.H_A)
        with self.assertRaises(NumericalStageError) as ctx:
            symplectic_spectrum(broken)
        self.assertEqual(ctx.exception.stage, "symplectic_spectrum")


class TestLongCorrelationLength(unittest.TestCase):
    """Test suite for blocks whose position correlations are badly conditioned."""

    def test_spectrum_at_xi_10(self):
        for N_b in (8, 32, 64):
            with self.subTest(N_b=N_b):
                _, cov = _covariance(256, 10.0, N_b)
                spectrum = symplectic_spectrum(cov)
                self.assertEqual(len(spectrum), N_b)
                self.assertTrue(np.all(spectrum.lambdas >= 0.5))
                self.assertTrue(np.all(spectrum.excesses >= 0.0))
                self.assertGreater(spectrum.excesses[0], 0.1)

    def test_block_and_complement_agree_at_xi_10(self):
        _, cov = _covariance(256, 10.0, 32)
        block = symplectic_spectrum(cov)
        complement = complement_spectrum(cov)
        significant = block.excesses > 1e-6
        assert_allclose(complement.excesses[:32][significant], block.excesses[significant], rtol=1e-6)

    def test_large_chain_at_xi_12(self):
        _, cov = _covariance(2048, 12.0, 64)
        spectrum = symplectic_spectrum(cov)
        self.assertTrue(np.all(spectrum.lambdas >= 0.5))
        kappa2 = spectrum.excesses * (spectrum.lambdas + 0.5)
        assert_allclose(cross_spectrum(cov)[:4], kappa2[:4], rtol=1e-6)


class TestWilliamsonModes(unittest.TestCase):
    """Test suite for Williamson mode functions."""

    def test_mode_invariants(self):
        for xi in (1.0, 3.0, 6.0):
            _, cov = _covariance(256, xi, 16)
            scale = np.linalg.norm(cov.H_A, 2) * np.linalg.norm(cov.G_A, 2)
            for mode in williamson_modes(cov):
                if mode.kappa < 1e-4:
                    continue
                with self.subTest(xi=xi, lam=mode.lam):
                    u, v = mode.u, mode.v
                    residual = cov.H_A @ (cov.G_A @ u) - mode.lam ** 2 * u
                    self.assertLess(np.linalg.norm(residual), 1e-8 * scale * np.linalg.norm(u))
                    assert_allclose(cov.G_A @ u / mode.lam, v,
                                    atol=1e-9 * np.linalg.norm(cov.G_A, 2) * np.linalg.norm(u) / mode.lam)
                    self.assertAlmostEqual(float(np.dot(u, v)), 1.0, places=9)
                    self.assertGreater(u[np.argmax(np.abs(u))], 0.0)
                    self.assertAlmostEqual(mode.lam ** 2 - 0.25, mode.kappa ** 2,
                                           delta=1e-9 * mode.lam ** 2)

    def test_definite_parity(self):
        _, cov = _covariance(128, 1.0, 9)
        for mode in williamson_modes(cov):
            assert_allclose(reflection(mode.u), mode.parity * mode.u, atol=1e-12 * np.max(np.abs(mode.u)))
            assert_allclose(reflection(mode.v), mode.parity * mode.v, atol=1e-12 * np.max(np.abs(mode.v)))

    def test_parity_alternates_with_entanglement(self):
        for xi in (3.0, 6.0):
            _, cov = _covariance(256, xi, 16)
            modes = williamson_modes(cov)[:6]
            for m, mode in enumerate(modes, start=1):
                with self.subTest(xi=xi, m=m):
                    self.assertEqual(mode.parity, (-1) ** (m + 1))

    def test_modes_follow_spectrum_order(self):
        _, cov = _covariance(64, 1.0, 8)
        spectrum = symplectic_spectrum(cov)
        modes = williamson_modes(cov)
        assert_allclose([m.excess for m in modes], spectrum.excesses, rtol=1e-12)
        self.assertEqual([m.parity for m in modes], list(spectrum.parities))


class TestModeMapping(unittest.TestCase):
    """Test suite for the block to complement mode mapping."""

    def test_single_site_partner(self):
        table, cov = _covariance(64, 1.0, 1)
        mode = williamson_modes(cov)[0]
        u_B, v_B = map_modes(cov, mode)
        ref_u, ref_v, ref_weights = single_site_partner(table)
        assert_allclose(u_B * v_B, ref_weights, atol=1e-12)
        assert_allclose(v_B, mode.u[0] * ref_v, rtol=1e-10, atol=1e-14)

    def test_partner_normalization_and_round_trip(self):
        _, cov = _covariance(128, 2.0, 8)
        other = cov.swapped()
        for mode in williamson_modes(cov):
            if mode.kappa < 1e-3:
                continue
            u_B, v_B = map_modes(cov, mode)
            self.assertAlmostEqual(float(np.dot(u_B, v_B)), 1.0, places=7)
            partner = WilliamsonMode(lam=mode.lam, kappa=mode.kappa, excess=mode.excess,
                                     u=u_B, v=v_B, parity=mode.parity)
            u_back, v_back = map_modes(other, partner)
            assert_allclose(u_back, mode.u, atol=1e-7 * np.max(np.abs(mode.u)))
            assert_allclose(v_back, mode.v, atol=1e-7 * np.max(np.abs(mode.v)))

    def test_partner_is_complement_mode(self):
        _, cov = _covariance(64, 1.0, 4)
        mode = williamson_modes(cov)[0]
        u_B, _ = map_modes(cov, mode)
        residual = cov.H_B() @ (cov.G_B() @ u_B) - mode.lam ** 2 * u_B
        self.assertLess(np.linalg.norm(residual), 1e-8 * np.linalg.norm(u_B))

    def test_weak_partner_hugs_the_block(self):
        _, cov = _covariance(64, 0.1, 4)
        mode = williamson_modes(cov)[0]
        u_B, v_B = map_modes(cov, mode)
        weights = participation(u_B, v_B)
        self.assertGreater(weights[:3].sum() + weights[-3:].sum(), 0.9)

    def test_unmapped_mode(self):
        _, cov = _covariance(32, 1.0, 2)
        mode = williamson_modes(cov)[0]
        tiny = WilliamsonMode(lam=0.5, kappa=0.0, excess=0.0, u=mode.u, v=mode.v, parity=mode.parity)
        with self.assertRaises(UnmappedModeError):
            map_modes(cov, tiny)


class TestModeShapes(unittest.TestCase):
    """Test suite for participation, turning points and demodulation."""

    def test_participation_sums_to_one(self):
        _, cov = _covariance(128, 3.0, 12)
        for mode in williamson_modes(cov):
            self.assertAlmostEqual(float(participation(mode.u, mode.v).sum()), 1.0, places=9)

    def test_participation_shape_mismatch(self):
        with self.assertRaises(DomainError):
            participation(np.ones(3), np.ones(4))

    def test_turning_point_of_ansatz(self):
        u = weak_mode_ansatz(10, 2, EVEN)
        self.assertEqual(turning_point(participation(u, u)), 3.5)

    def test_turning_point_of_flat_profile(self):
        self.assertEqual(turning_point(np.ones(7)), 0.0)
        self.assertEqual(turning_point(np.ones(8)), 0.5)
        with self.assertRaises(DomainError):
            turning_point(np.array([]))

    def test_demodulate(self):
        assert_allclose(demodulate(np.array([1.0, -1.0, 1.0, -1.0])), np.ones(4))

    def test_weak_mode_ansatz(self):
        odd = weak_mode_ansatz(6, 1, ODD)
        assert_allclose(odd, [1 / math.sqrt(2), 0, 0, 0, 0, -1 / math.sqrt(2)])
        centre = weak_mode_ansatz(5, 3, EVEN)
        assert_allclose(centre, [0, 0, 1, 0, 0])
        with self.assertRaises(DomainError):
            weak_mode_ansatz(5, 3, ODD)
        with self.assertRaises(DomainError):
            weak_mode_ansatz(6, 4, EVEN)


@pytest.mark.slow
class TestModeInvariantGrid(unittest.TestCase):
    """Mode invariants over a 30 point grid of couplings and block sizes at N=256."""

    XI = (2.0, 2.5, 3.0, 4.0, 5.0, 6.0)
    N_B = (4, 8, 12, 16, 32)

    def test_invariants(self):
        for xi in self.XI:
            table = build_correlations(ChainSpec.from_xi(256, xi))
            for N_b in self.N_B:
                cov = extract_block(table, BlockPartition(0, N_b))
                other = cov.swapped()
                scale = np.linalg.norm(cov.H_A, 2) * np.linalg.norm(cov.G_A, 2)
                for m, mode in enumerate(williamson_modes(cov), start=1):
                    with self.subTest(xi=xi, N_b=N_b, m=m):
                        self.assertAlmostEqual(float(participation(mode.u, mode.v).sum()), 1.0, delta=1e-9)
                        if m <= 6 and mode.excess > 1e-6:
                            self.assertEqual(mode.parity, (-1) ** (m + 1))
                        if mode.kappa < 1e-3:
                            continue
                        residual = cov.H_A @ (cov.G_A @ mode.u) - mode.lam ** 2 * mode.u
                        self.assertLess(np.linalg.norm(residual), 1e-8 * scale * np.linalg.norm(mode.u))
                        u_B, v_B = map_modes(cov, mode)
                        partner = WilliamsonMode(lam=mode.lam, kappa=mode.kappa, excess=mode.excess,
                                                 u=u_B, v=v_B, parity=mode.parity)
                        u_back, v_back = map_modes(other, partner)
                        assert_allclose(u_back, mode.u, atol=1e-7 * np.max(np.abs(mode.u)))
                        assert_allclose(v_back, mode.v, atol=1e-7 * np.max(np.abs(mode.v)))


if __name__ == '__main__':
    unittest.main()
