"""Batched kernels vs the reference per-system modules, and backend selection.

The kernels are rearrangements of the same estimators for whole-chunk
execution; every accumulator entry must reproduce the error and signal
norms computed through the plain module path on identical draws.
"""

import numpy as np
import pytest

import irsce.kernels as kernels
from irsce import (bm_estimate_all, bm_synthesize_and_decorrelate,
                   build_training_design, build_training_matrix, decorrelate,
                   estimate_all, exp_correlation, mmse_filter,
                   synthesize_observations)
from irsce.kernels import numpy_backend

from conftest import draw_system, make_config


@pytest.fixture
def restore_backend():
    yield
    kernels.set_backend("auto")


def _kernel_inputs(cfg, pl, ch):
    """Replicate the harness's precomputed kernel arguments."""
    m, n, l, k, s = cfg.m_bs, cfg.n_elements, cfg.l_irs, cfg.k_users, cfg.s_subphases
    h1_cols = ch.h_1.transpose(1, 0, 2).reshape(m, n * l)
    h1_t = np.ascontiguousarray(h1_cols.T)
    beta1_col = np.repeat(pl.beta_1, n)
    v_tr = build_training_matrix(s, n, l)
    w = np.ascontiguousarray(v_tr[:, 1:])
    v_h = np.ascontiguousarray(v_tr.conj().T)
    sigma_eff = np.sqrt(cfg.sigma2 / (cfg.p_tx * cfg.tau_s))
    gamma_d = cfg.sigma2 / (s * cfg.p_tx * cfg.tau_s)
    r_bs = exp_correlation(m, cfg.eta_bs)
    r_irs = exp_correlation(n, cfg.eta_irs)
    filt_d = np.empty((k, m, m), dtype=np.complex128)
    for ki in range(k):
        filt_d[ki] = mmse_filter(float(pl.beta_d[ki]), r_bs, gamma_d)
    gamma_l = cfg.sigma2 / (pl.beta_1 * s * cfg.p_tx * cfg.tau_s * m)
    filt_irs = np.empty((l, k, n, n), dtype=np.complex128)
    for li in range(l):
        for ki in range(k):
            filt_irs[li, ki] = mmse_filter(float(pl.beta_2[li, ki]), r_irs,
                                           float(gamma_l[li]))
    c_casc = pl.beta_2 / (gamma_d + pl.beta_2 * pl.beta_1[:, None] * m)
    return dict(w=w, v_h=v_h, h1_t=h1_t, beta1_col=beta1_col,
                sigma_eff=sigma_eff, filt_d=filt_d, filt_irs=filt_irs,
                c_casc=c_casc)


def _unit_noise(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


class TestProposedKernel:
    def test_matches_module_path_on_shared_draws(self):
        """Accumulator rows = error/signal norms of the plain estimator chain."""
        cfg = make_config(m=4, n=4, l=2, k=2, s=9, sigma2=4e-14)
        geo, pl, corr, ch = draw_system(cfg, seed=11)
        noise = _unit_noise(np.random.default_rng(12), (2, 9, 4))

        design = build_training_design(ch.h_1, cfg)
        obs = synthesize_observations(ch, design, cfg, np.random.default_rng(0),
                                      noise=noise)
        obs = decorrelate(obs, design, cfg)
        est = estimate_all(obs, pl, corr, cfg)

        ki_args = _kernel_inputs(cfg, pl, ch)
        acc_d, acc_irs = numpy_backend.proposed_cell(
            ki_args["w"], ki_args["v_h"], ki_args["h1_t"], ki_args["beta1_col"],
            ch.h_d[None], ch.h_2k[None], noise[None], ki_args["sigma_eff"],
            ki_args["filt_d"], ki_args["filt_irs"], cfg.n_elements)

        for ki in range(2):
            want_ls = np.sum(np.abs(est.h_d_ls[ki] - ch.h_d[ki]) ** 2)
            want_mm = np.sum(np.abs(est.h_d_mmse[ki] - ch.h_d[ki]) ** 2)
            want_sig = np.sum(np.abs(ch.h_d[ki]) ** 2)
            np.testing.assert_allclose(acc_d[0, ki], [want_ls, want_mm, want_sig],
                                       rtol=1e-10)
        for li in range(2):
            for ki in range(2):
                want_ls = np.sum(np.abs(est.h_2_ls[li, ki] - ch.h_2[li, ki]) ** 2)
                want_mm = np.sum(np.abs(est.h_2_mmse[li, ki] - ch.h_2[li, ki]) ** 2)
                want_sig = np.sum(np.abs(ch.h_2[li, ki]) ** 2)
                np.testing.assert_allclose(acc_irs[0, li, ki],
                                           [want_ls, want_mm, want_sig], rtol=1e-10)

    def test_noiseless_full_rank_errors_vanish(self):
        cfg = make_config(m=4, n=4, l=2, k=2, s=9, sigma2=0.0)
        geo, pl, corr, ch = draw_system(cfg, seed=3)
        ki_args = _kernel_inputs(cfg, pl, ch)
        noise = np.zeros((1, 2, 9, 4), dtype=np.complex128)
        acc_d, acc_irs = numpy_backend.proposed_cell(
            ki_args["w"], ki_args["v_h"], ki_args["h1_t"], ki_args["beta1_col"],
            ch.h_d[None], ch.h_2k[None], noise, 0.0,
            ki_args["filt_d"], ki_args["filt_irs"], cfg.n_elements)
        assert acc_d[0, :, 0].max() < 1e-18 * acc_d[0, :, 2].max()
        assert acc_irs[0, :, :, 0].max() < 1e-18 * acc_irs[0, :, :, 2].max()


class TestBenchmarkKernel:
    def test_matches_module_path_on_shared_draws(self):
        cfg = make_config(m=4, n=4, l=2, k=2, s=9, sigma2=4e-14)
        geo, pl, corr, ch = draw_system(cfg, seed=21)
        noise = _unit_noise(np.random.default_rng(22), (2, 9, 4))

        bm_obs = bm_synthesize_and_decorrelate(ch, cfg, np.random.default_rng(0),
                                               noise=noise)
        bm_est = bm_estimate_all(bm_obs, pl, corr, ch.h_1, cfg)

        ki_args = _kernel_inputs(cfg, pl, ch)
        acc_d, acc_casc, acc_irs = numpy_backend.benchmark_cell(
            ki_args["w"], ki_args["v_h"], ki_args["h1_t"], ki_args["beta1_col"],
            ch.h_d[None], ch.h_2k[None], noise[None], ki_args["sigma_eff"],
            ki_args["filt_d"], ki_args["c_casc"], cfg.n_elements)

        # direct: LS is the raw decorrelated block, MMSE the filtered one
        for ki in range(2):
            want_ls = np.sum(np.abs(bm_obs.r0[ki] - ch.h_d[ki]) ** 2)
            want_mm = np.sum(np.abs(bm_est.h_d_bm[ki] - ch.h_d[ki]) ** 2)
            want_sig = np.sum(np.abs(ch.h_d[ki]) ** 2)
            np.testing.assert_allclose(acc_d[0, ki], [want_ls, want_mm, want_sig],
                                       rtol=1e-10)

        # cascaded: per-(IRS, user) Frobenius norms over that IRS's columns
        for li in range(2):
            for ki in range(2):
                truth = ch.h_1[li] * ch.h_2[li, ki][None, :]          # (M, N)
                raw = bm_obs.r_cols[li, :, ki, :].T                   # (M, N)
                mmse = bm_est.h0_bm[li, :, ki, :].T
                want_ls = np.sum(np.abs(raw - truth) ** 2)
                want_mm = np.sum(np.abs(mmse - truth) ** 2)
                want_sig = np.sum(np.abs(truth) ** 2)
                np.testing.assert_allclose(acc_casc[0, li, ki],
                                           [want_ls, want_mm, want_sig], rtol=1e-9)

    def test_recovered_element_errors_match_recovery_module(self):
        from irsce import bm_recover_h2
        cfg = make_config(m=4, n=4, l=2, k=2, s=9, sigma2=4e-14)
        geo, pl, corr, ch = draw_system(cfg, seed=31)
        noise = _unit_noise(np.random.default_rng(32), (2, 9, 4))
        bm_obs = bm_synthesize_and_decorrelate(ch, cfg, np.random.default_rng(0),
                                               noise=noise)
        bm_est = bm_estimate_all(bm_obs, pl, corr, ch.h_1, cfg)
        rec_mm = bm_recover_h2(bm_est.h0_bm, ch.h_1)
        rec_ls = bm_recover_h2(bm_obs.r_cols, ch.h_1)

        ki_args = _kernel_inputs(cfg, pl, ch)
        _, _, acc_irs = numpy_backend.benchmark_cell(
            ki_args["w"], ki_args["v_h"], ki_args["h1_t"], ki_args["beta1_col"],
            ch.h_d[None], ch.h_2k[None], noise[None], ki_args["sigma_eff"],
            ki_args["filt_d"], ki_args["c_casc"], cfg.n_elements)
        for li in range(2):
            for ki in range(2):
                want_ls = np.sum(np.abs(rec_ls[li, ki] - ch.h_2[li, ki]) ** 2)
                want_mm = np.sum(np.abs(rec_mm[li, ki] - ch.h_2[li, ki]) ** 2)
                want_sig = np.sum(np.abs(ch.h_2[li, ki]) ** 2)
                np.testing.assert_allclose(acc_irs[0, li, ki],
                                           [want_ls, want_mm, want_sig], rtol=1e-9)


class TestBackendParity:
    def test_numba_matches_numpy(self):
        if "numba" not in kernels.available_backends():
            pytest.skip("numba not importable")
        nb = kernels.set_backend("numba")
        try:
            cfg = make_config(m=4, n=4, l=2, k=2, s=9, sigma2=4e-14)
            geo, pl, corr, ch = draw_system(cfg, seed=41)
            noise = _unit_noise(np.random.default_rng(42), (3, 2, 9, 4))
            h_d = np.broadcast_to(ch.h_d, (3, 2, 4)).copy()
            h_2k = np.broadcast_to(ch.h_2k, (3, 2, 8)).copy()
            ki_args = _kernel_inputs(cfg, pl, ch)
            args = (ki_args["w"], ki_args["v_h"], ki_args["h1_t"],
                    ki_args["beta1_col"], h_d, h_2k, noise, ki_args["sigma_eff"],
                    ki_args["filt_d"])
            a_d, a_i = numpy_backend.proposed_cell(*args, ki_args["filt_irs"], 4)
            b_d, b_i = nb.proposed_cell(*args, ki_args["filt_irs"], 4)
            np.testing.assert_allclose(b_d, a_d, rtol=1e-12)
            np.testing.assert_allclose(b_i, a_i, rtol=1e-12)
            a = numpy_backend.benchmark_cell(*args, ki_args["c_casc"], 4)
            b = nb.benchmark_cell(*args, ki_args["c_casc"], 4)
            for x, y in zip(a, b):
                np.testing.assert_allclose(y, x, rtol=1e-12)
        finally:
            kernels.set_backend("auto")


class TestBackendSelection:
    def test_numpy_always_available(self):
        assert "numpy" in kernels.available_backends()

    def test_set_backend_numpy(self, restore_backend):
        mod = kernels.set_backend("numpy")
        assert mod.NAME == "numpy"
        assert kernels.active_backend_name() == "numpy"
        assert kernels.get_backend() is mod

    def test_invalid_name_rejected(self):
        with pytest.raises(ValueError):
            kernels.set_backend("fortran")

    def test_env_var_selects_backend(self, monkeypatch, restore_backend):
        monkeypatch.setenv("IRSCE_BACKEND", "numpy")
        monkeypatch.setattr(kernels, "_active", None)
        monkeypatch.setattr(kernels, "_active_name", None)
        assert kernels.get_backend().NAME == "numpy"

    def test_env_var_invalid_value(self, monkeypatch, restore_backend):
        monkeypatch.setenv("IRSCE_BACKEND", "gpu")
        monkeypatch.setattr(kernels, "_active", None)
        monkeypatch.setattr(kernels, "_active_name", None)
        with pytest.raises(ValueError):
            kernels.get_backend()
