"""Pure-numpy batched kernels (fallback path).

Whole-chunk matmuls and einsums; per-trial results are produced as array
rows, never reduced inside the kernel. Shapes follow the package-wide
convention: T trials, K users, M antennas, N elements per IRS, L IRSs,
NL = N*L, S sub-phases.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def _synthesize(w, h1_t, h_d, h_2k, noise, sigma_eff):
    # scaled cascaded columns per (trial, user): (T, K, NL, M)
    cols = h_2k[:, :, :, None] * h1_t[None, None, :, :]
    r_obs = np.matmul(w, cols)                      # (T, K, S, M)
    r_obs += h_d[:, :, None, :]
    r_obs += sigma_eff * noise
    return r_obs


def proposed_cell(w, v_h, h1_t, beta1_col, h_d, h_2k, noise, sigma_eff,
                  filt_d, filt_irs, n_el):
    """One sweep cell of the reduced-overhead protocol, batched over trials.

    w: (S, NL) element columns of the training matrix; v_h: (NL+1, S) its
    conjugate transpose; h1_t: (NL, M) LoS columns as rows; filt_d:
    (K, M, M) direct MMSE filters; filt_irs: (L, K, N, N) element filters.
    Returns acc_d (T, K, 3) and acc_irs (T, L, K, 3) with columns
    [LS squared error, MMSE squared error, squared signal norm].
    """
    t_trials, k_users, m_bs = h_d.shape
    s = w.shape[0]
    nl = h1_t.shape[0]
    l_irs = filt_irs.shape[0]

    r_obs = _synthesize(w, h1_t, h_d, h_2k, noise, sigma_eff)
    proj = np.matmul(v_h, r_obs)                    # (T, K, NL+1, M)
    r0 = proj[:, :, 0, :] / s                       # (T, K, M)
    elem = np.einsum("jm,tkjm->tkj", h1_t.conj(), proj[:, :, 1:, :])
    elem /= (s * m_bs) * beta1_col[None, None, :]   # (T, K, NL)

    acc_d = np.empty((t_trials, k_users, 3))
    diff_ls = r0 - h_d
    acc_d[:, :, 0] = np.einsum("tkm,tkm->tk", diff_ls.conj(), diff_ls).real
    d_mmse = np.einsum("kab,tkb->tka", filt_d, r0)
    diff_mm = d_mmse - h_d
    acc_d[:, :, 1] = np.einsum("tkm,tkm->tk", diff_mm.conj(), diff_mm).real
    acc_d[:, :, 2] = np.einsum("tkm,tkm->tk", h_d.conj(), h_d).real

    blocks = elem.reshape(t_trials, k_users, l_irs, n_el)
    truth = h_2k.reshape(t_trials, k_users, l_irs, n_el)
    est = np.einsum("lkab,tklb->tkla", filt_irs, blocks)
    acc_irs = np.empty((t_trials, l_irs, k_users, 3))
    diff_ls = blocks - truth
    acc_irs[:, :, :, 0] = np.einsum("tkln,tkln->tkl", diff_ls.conj(), diff_ls).real.transpose(0, 2, 1)
    diff_mm = est - truth
    acc_irs[:, :, :, 1] = np.einsum("tkln,tkln->tkl", diff_mm.conj(), diff_mm).real.transpose(0, 2, 1)
    acc_irs[:, :, :, 2] = np.einsum("tkln,tkln->tkl", truth.conj(), truth).real.transpose(0, 2, 1)
    return acc_d, acc_irs


def benchmark_cell(w, v_h, h1_t, beta1_col, h_d, h_2k, noise, sigma_eff,
                   filt_d, c_casc, n_el):
    """One sweep cell of the benchmark protocol, batched over trials.

    c_casc: (L, K) scalar filter gains c = r beta_2 / (gamma + r beta_2
    beta_1 M); the cascaded estimate of column j is c * h1_j (h1_j^H r_j),
    and the recovered element channel is h1_j^H est / (M beta_1) = c *
    (h1_j^H r_j). Returns (acc_d, acc_casc, acc_irs), each (..., 3) with
    columns [LS, MMSE, signal].
    """
    t_trials, k_users, m_bs = h_d.shape
    s = w.shape[0]
    nl = h1_t.shape[0]
    l_irs = c_casc.shape[0]

    r_obs = _synthesize(w, h1_t, h_d, h_2k, noise, sigma_eff)
    proj = np.matmul(v_h, r_obs) / s                # (T, K, NL+1, M), blocks of h
    r0 = proj[:, :, 0, :]

    acc_d = np.empty((t_trials, k_users, 3))
    diff_ls = r0 - h_d
    acc_d[:, :, 0] = np.einsum("tkm,tkm->tk", diff_ls.conj(), diff_ls).real
    d_mmse = np.einsum("kab,tkb->tka", filt_d, r0)
    diff_mm = d_mmse - h_d
    acc_d[:, :, 1] = np.einsum("tkm,tkm->tk", diff_mm.conj(), diff_mm).real
    acc_d[:, :, 2] = np.einsum("tkm,tkm->tk", h_d.conj(), h_d).real

    r_cols = proj[:, :, 1:, :]                      # (T, K, NL, M)
    inner = np.einsum("jm,tkjm->tkj", h1_t.conj(), r_cols)
    mbeta1 = m_bs * beta1_col                       # (NL,) = ||h1_j||^2
    c_col = np.repeat(c_casc, n_el, axis=0).T      # (K, NL) per-column scalar gains

    # cascaded LS: full M-dim residual against h1_j * h2_j
    truth_cols = h_2k[:, :, :, None] * h1_t[None, None, :, :]
    diff = r_cols - truth_cols
    err_casc_ls = np.einsum("tkjm,tkjm->tkj", diff.conj(), diff).real
    # cascaded MMSE: colinear estimate, scalar residual weighted by ||h1_j||^2
    scal_mm = c_col[None, :, :] * inner - h_2k
    err_casc_mm = mbeta1[None, None, :] * (scal_mm.conj() * scal_mm).real
    sig_casc = mbeta1[None, None, :] * (h_2k.conj() * h_2k).real

    # recovered element channels
    rec_ls = inner / mbeta1[None, None, :]
    diff_rls = rec_ls - h_2k
    err_irs_ls = (diff_rls.conj() * diff_rls).real
    err_irs_mm = (scal_mm.conj() * scal_mm).real
    sig_irs = (h_2k.conj() * h_2k).real

    def fold(per_col):
        # (T, K, NL) -> (T, L, K) by summing per-IRS blocks
        return per_col.reshape(t_trials, k_users, l_irs, n_el).sum(axis=3).transpose(0, 2, 1)

    acc_casc = np.stack([fold(err_casc_ls), fold(err_casc_mm), fold(sig_casc)], axis=3)
    acc_irs = np.stack([fold(err_irs_ls), fold(err_irs_mm), fold(sig_irs)], axis=3)
    return acc_d, acc_casc, acc_irs
