"""JIT-compiled batched kernels (hot path).

Same contract as numpy_backend; trials run under prange with every trial
writing only its own accumulator rows, so outputs are independent of the
thread count. First call per shape family pays JIT compilation; cache=True
persists the machine code across processes.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

NAME = "numba"


@njit(cache=True)
def _abs2(z):
    return z.real * z.real + z.imag * z.imag


@njit(parallel=True, cache=True)
def _proposed(w, v_h, h1_t, beta1_col, h_d, h_2k, noise, sigma_eff,
              filt_d, filt_irs, n_el, acc_d, acc_irs):
    t_trials, k_users, m_bs = h_d.shape
    s = w.shape[0]
    nl = h1_t.shape[0]
    l_irs = filt_irs.shape[0]
    for t in prange(t_trials):
        c_t = np.empty((nl, m_bs), dtype=np.complex128)
        r_elem = np.empty(nl, dtype=np.complex128)
        for k in range(k_users):
            for j in range(nl):
                hv = h_2k[t, k, j]
                for m in range(m_bs):
                    c_t[j, m] = h1_t[j, m] * hv
            r_obs = np.dot(w, c_t)
            for si in range(s):
                for m in range(m_bs):
                    r_obs[si, m] += h_d[t, k, m] + sigma_eff * noise[t, k, si, m]
            proj = np.dot(v_h, r_obs)
            e_ls = 0.0
            e_mm = 0.0
            sig = 0.0
            r0 = proj[0] / s
            for m in range(m_bs):
                d_mmse = 0.0 + 0.0j
                for m2 in range(m_bs):
                    d_mmse += filt_d[k, m, m2] * r0[m2]
                e_ls += _abs2(r0[m] - h_d[t, k, m])
                e_mm += _abs2(d_mmse - h_d[t, k, m])
                sig += _abs2(h_d[t, k, m])
            acc_d[t, k, 0] = e_ls
            acc_d[t, k, 1] = e_mm
            acc_d[t, k, 2] = sig
            denom = s * m_bs
            for j in range(nl):
                z = 0.0 + 0.0j
                for m in range(m_bs):
                    z += np.conj(h1_t[j, m]) * proj[1 + j, m]
                r_elem[j] = z / (denom * beta1_col[j])
            for li in range(l_irs):
                block = r_elem[li * n_el:(li + 1) * n_el]
                e_ls = 0.0
                e_mm = 0.0
                sig = 0.0
                for ni in range(n_el):
                    truth = h_2k[t, k, li * n_el + ni]
                    est = 0.0 + 0.0j
                    for n2 in range(n_el):
                        est += filt_irs[li, k, ni, n2] * block[n2]
                    e_ls += _abs2(block[ni] - truth)
                    e_mm += _abs2(est - truth)
                    sig += _abs2(truth)
                acc_irs[t, li, k, 0] = e_ls
                acc_irs[t, li, k, 1] = e_mm
                acc_irs[t, li, k, 2] = sig


def proposed_cell(w, v_h, h1_t, beta1_col, h_d, h_2k, noise, sigma_eff,
                  filt_d, filt_irs, n_el):
    """JIT version of numpy_backend.proposed_cell (same contract)."""
    t_trials, k_users, _ = h_d.shape
    l_irs = filt_irs.shape[0]
    acc_d = np.empty((t_trials, k_users, 3))
    acc_irs = np.empty((t_trials, l_irs, k_users, 3))
    _proposed(w, v_h, h1_t, beta1_col, h_d, h_2k, noise, float(sigma_eff),
              filt_d, filt_irs, n_el, acc_d, acc_irs)
    return acc_d, acc_irs


@njit(parallel=True, cache=True)
def _benchmark(w, v_h, h1_t, beta1_col, h_d, h_2k, noise, sigma_eff,
               filt_d, c_casc, n_el, acc_d, acc_casc, acc_irs):
    t_trials, k_users, m_bs = h_d.shape
    s = w.shape[0]
    nl = h1_t.shape[0]
    l_irs = c_casc.shape[0]
    for t in prange(t_trials):
        c_t = np.empty((nl, m_bs), dtype=np.complex128)
        for k in range(k_users):
            for j in range(nl):
                hv = h_2k[t, k, j]
                for m in range(m_bs):
                    c_t[j, m] = h1_t[j, m] * hv
            r_obs = np.dot(w, c_t)
            for si in range(s):
                for m in range(m_bs):
                    r_obs[si, m] += h_d[t, k, m] + sigma_eff * noise[t, k, si, m]
            proj = np.dot(v_h, r_obs)
            e_ls = 0.0
            e_mm = 0.0
            sig = 0.0
            r0 = proj[0] / s
            for m in range(m_bs):
                d_mmse = 0.0 + 0.0j
                for m2 in range(m_bs):
                    d_mmse += filt_d[k, m, m2] * r0[m2]
                e_ls += _abs2(r0[m] - h_d[t, k, m])
                e_mm += _abs2(d_mmse - h_d[t, k, m])
                sig += _abs2(h_d[t, k, m])
            acc_d[t, k, 0] = e_ls
            acc_d[t, k, 1] = e_mm
            acc_d[t, k, 2] = sig
            for li in range(l_irs):
                ec_ls = 0.0
                ec_mm = 0.0
                sc = 0.0
                ei_ls = 0.0
                ei_mm = 0.0
                si_sig = 0.0
                c = c_casc[li, k]
                for ni in range(n_el):
                    j = li * n_el + ni
                    mbeta1 = m_bs * beta1_col[j]
                    truth = h_2k[t, k, j]
                    inner = 0.0 + 0.0j
                    for m in range(m_bs):
                        block_m = proj[1 + j, m] / s
                        ec_ls += _abs2(block_m - h1_t[j, m] * truth)
                        inner += np.conj(h1_t[j, m]) * block_m
                    scal = c * inner - truth
                    ec_mm += mbeta1 * _abs2(scal)
                    sc += mbeta1 * _abs2(truth)
                    ei_ls += _abs2(inner / mbeta1 - truth)
                    ei_mm += _abs2(scal)
                    si_sig += _abs2(truth)
                acc_casc[t, li, k, 0] = ec_ls
                acc_casc[t, li, k, 1] = ec_mm
                acc_casc[t, li, k, 2] = sc
                acc_irs[t, li, k, 0] = ei_ls
                acc_irs[t, li, k, 1] = ei_mm
                acc_irs[t, li, k, 2] = si_sig


def benchmark_cell(w, v_h, h1_t, beta1_col, h_d, h_2k, noise, sigma_eff,
                   filt_d, c_casc, n_el):
    """JIT version of numpy_backend.benchmark_cell (same contract)."""
    t_trials, k_users, _ = h_d.shape
    l_irs = c_casc.shape[0]
    acc_d = np.empty((t_trials, k_users, 3))
    acc_casc = np.empty((t_trials, l_irs, k_users, 3))
    acc_irs = np.empty((t_trials, l_irs, k_users, 3))
    _benchmark(w, v_h, h1_t, beta1_col, h_d, h_2k, noise, float(sigma_eff),
               filt_d, c_casc, n_el, acc_d, acc_casc, acc_irs)
    return acc_d, acc_casc, acc_irs
