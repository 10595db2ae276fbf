"""Correlated Rayleigh synthesis and deterministic LoS matrices."""

import numpy as np
import pytest

from irsce import (InvalidCoefficient, InvalidSize, NotHermitian, NotPSD,
                   build_correlation, build_geometry, build_los_matrix,
                   build_pathloss, exp_correlation, matrix_sqrt,
                   reference_config, sample_correlated_rayleigh,
                   synthesize_channels)


class TestExpCorrelation:
    def test_zero_coefficient_is_identity(self):
        np.testing.assert_array_equal(exp_correlation(5, 0.0), np.eye(5))

    def test_two_by_two(self):
        r = exp_correlation(2, 0.95)
        np.testing.assert_allclose(r, [[1.0, 0.95], [0.95, 1.0]], rtol=0, atol=0)

    def test_positive_definite_at_reference_eta(self):
        lam = np.linalg.eigvalsh(exp_correlation(8, 0.95))
        assert np.all(lam > 0), f"eigenvalues must be positive, min {lam.min():.3e}"

    def test_toeplitz_symmetric_unit_diagonal(self):
        r = exp_correlation(16, 0.7)
        np.testing.assert_array_equal(r, r.T)
        np.testing.assert_array_equal(np.diag(r), np.ones(16))
        # constant along diagonals
        for k in range(1, 16):
            band = np.diagonal(r, offset=k)
            assert np.all(band == band[0])
            assert band[0] == pytest.approx(0.7 ** k, rel=1e-14)

    def test_invalid_coefficient(self):
        with pytest.raises(InvalidCoefficient):
            exp_correlation(4, 1.0)
        with pytest.raises(InvalidCoefficient):
            exp_correlation(4, -0.01)

    def test_invalid_size(self):
        with pytest.raises(InvalidSize):
            exp_correlation(0, 0.5)


class TestMatrixSqrt:
    def test_identity(self):
        np.testing.assert_array_equal(matrix_sqrt(np.eye(4)), np.eye(4))

    def test_diagonal(self):
        np.testing.assert_allclose(matrix_sqrt(np.diag([4.0, 9.0])),
                                   np.diag([2.0, 3.0]), atol=1e-14)

    def test_reconstruction_at_reference_correlation(self):
        r = exp_correlation(16, 0.95)
        s = matrix_sqrt(r)
        err = np.linalg.norm(s @ s - r) / np.linalg.norm(r)
        assert err < 1e-10, f"sqrt reconstruction off by {err:.3e}"

    def test_result_is_hermitian_psd(self):
        s = matrix_sqrt(exp_correlation(12, 0.9))
        np.testing.assert_allclose(s, s.conj().T, atol=1e-13)
        assert np.linalg.eigvalsh(s).min() >= -1e-13

    def test_not_hermitian_rejected(self):
        bad = np.eye(3) + 1e-6 * np.triu(np.ones((3, 3)), 1)
        with pytest.raises(NotHermitian):
            matrix_sqrt(bad)

    def test_not_psd_rejected(self):
        with pytest.raises(NotPSD):
            matrix_sqrt(np.diag([1.0, -1e-6]))

    def test_tiny_negative_eigenvalue_clipped(self):
        s = matrix_sqrt(np.diag([1.0, -1e-13]))
        np.testing.assert_allclose(s, np.diag([1.0, 0.0]), atol=1e-7)


class TestCorrelatedRayleigh:
    def test_zero_pathloss_gives_zero_vector(self):
        rng = np.random.default_rng(0)
        out = sample_correlated_rayleigh(0.0, np.eye(4), rng)
        np.testing.assert_array_equal(out, np.zeros(4, dtype=complex))

    def test_identity_covariance_monte_carlo(self):
        """1e5 i.i.d. samples: diagonal of the sample covariance within 2%."""
        rng = np.random.default_rng(1234)
        z = sample_correlated_rayleigh(1.0, np.eye(6), rng, count=100_000)
        cov = z.conj().T @ z / z.shape[0]
        np.testing.assert_allclose(np.diag(cov).real, 1.0, rtol=0.02)

    def test_correlated_covariance_monte_carlo(self):
        """beta=2, R=exp(0.9): sample covariance within 3% per entry."""
        r = exp_correlation(4, 0.9)
        rng = np.random.default_rng(99)
        z = sample_correlated_rayleigh(2.0, matrix_sqrt(r), rng, count=100_000)
        cov = (z.conj().T @ z / z.shape[0]).real
        np.testing.assert_allclose(cov, 2.0 * r, rtol=0.03)

    def test_zero_mean(self):
        rng = np.random.default_rng(7)
        z = sample_correlated_rayleigh(1.0, np.eye(8), rng, count=200_000)
        assert np.abs(z.mean(axis=0)).max() < 0.01


class TestLosMatrix:
    @pytest.fixture()
    def setup(self):
        cfg = reference_config()
        geo = build_geometry(cfg)
        pl = build_pathloss(geo)
        return cfg, geo, pl

    def test_first_entry_phase(self, setup):
        """Entry (0,0) carries only the common propagation phase."""
        cfg, geo, pl = setup
        h = build_los_matrix(100.0, 0.0, np.pi, 1e-7, cfg)
        expected = np.sqrt(1e-7) * np.exp(-2j * np.pi * 100.0 / cfg.lambda_c)
        assert h[0, 0] == pytest.approx(expected, rel=1e-12)

    def test_all_moduli_equal_sqrt_beta(self, setup):
        cfg, geo, pl = setup
        h = build_los_matrix(100.0, 0.3, -2.0, 1e-7, cfg)
        np.testing.assert_allclose(np.abs(h), np.sqrt(1e-7), rtol=1e-12)

    def test_rank_one(self, setup):
        cfg, geo, pl = setup
        h = build_los_matrix(100.0, 1.1, 0.4, 1e-7, cfg)
        sv = np.linalg.svd(h, compute_uv=False)
        assert sv[1] < 1e-10 * sv[0], f"second singular value {sv[1]:.3e}"

    def test_gram_single_eigenvalue_mn_beta(self, setup):
        cfg, geo, pl = setup
        beta = float(pl.beta_1[0])
        h = build_los_matrix(100.0, 0.0, np.pi, beta, cfg)
        lam = np.linalg.eigvalsh(h.conj().T @ h)
        target = cfg.m_bs * cfg.n_elements * beta
        assert lam[-1] == pytest.approx(target, rel=1e-9)
        assert lam[-2] < 1e-9 * lam[-1]


class TestChannelSet:
    def test_shapes_and_concatenations(self):
        cfg = reference_config()
        geo = build_geometry(cfg)
        pl = build_pathloss(geo)
        corr = build_correlation(cfg)
        ch = synthesize_channels(cfg, geo, pl, corr, np.random.default_rng(5))
        assert ch.h_d.shape == (4, 8)
        assert ch.h_2.shape == (4, 4, 32)
        assert ch.h_1.shape == (4, 8, 32)
        assert ch.h_2k.shape == (4, 128)
        assert ch.h_1_concat.shape == (8, 128)
        # block order of the concatenations must agree
        np.testing.assert_array_equal(ch.h_2k[2, 32:64], ch.h_2[1, 2])
        np.testing.assert_array_equal(ch.h_1_concat[:, 32:64], ch.h_1[1])

    def test_identical_seeds_bitwise_identical(self):
        cfg = reference_config()
        geo = build_geometry(cfg)
        pl = build_pathloss(geo)
        corr = build_correlation(cfg)
        a = synthesize_channels(cfg, geo, pl, corr, np.random.default_rng(42))
        b = synthesize_channels(cfg, geo, pl, corr, np.random.default_rng(42))
        np.testing.assert_array_equal(a.h_d, b.h_d)
        np.testing.assert_array_equal(a.h_2, b.h_2)
        np.testing.assert_array_equal(a.h_1, b.h_1)

    def test_direct_channel_covariance_matches_model(self):
        """E[h h^H] = beta * R_bs, Monte-Carlo at 1e5 draws, eta = 0.95."""
        cfg = reference_config(eta_bs=0.95, k_users=1, user_positions=((30.0, 0.0),))
        geo = build_geometry(cfg)
        pl = build_pathloss(geo)
        corr = build_correlation(cfg)
        rng = np.random.default_rng(11)
        beta = float(pl.beta_d[0])
        draws = sample_correlated_rayleigh(beta, corr.r_bs_sqrt[0], rng, count=100_000)
        cov = (draws.conj().T @ draws / draws.shape[0]).real
        np.testing.assert_allclose(cov, beta * corr.r_bs[0], rtol=0.03,
                                   atol=0.03 * beta)
