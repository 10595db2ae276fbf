"""Benchmark protocol: cascaded-channel estimation without LoS knowledge.

The benchmark trains with the same DFT structure but needs every training
column orthogonal (S >= NL + 1), because it estimates each M-dimensional
cascaded column h_1[l][:, n] * h_2[l, k][n] separately instead of
exploiting the known LoS factor to reduce the unknowns to scalars. Its
per-column MMSE filter has a rank-one prior, so the matrix inverse
collapses to a scalar correction (Sherman-Morrison); the dense-inverse
path is kept for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .channel import ChannelSet, CorrelationModel
from .config import PathLossSet, SystemConfig, min_subphases
from .errors import (DimensionMismatch, InsufficientSubphases, SingularFilter,
                     ZeroColumn)
from .estimators import mmse_direct
from .training import build_training_matrix


@dataclass(frozen=True)
class BmObservationSet:
    """Decorrelated benchmark observations.

    r_tilde: (K, M*(NL+1)) full decorrelated vectors; r0: (K, M) direct
    block; r_cols: (L, N, K, M) per-element cascaded blocks; gamma_bm the
    per-entry noise variance sigma2/(S p_tx tau_s) on every block.
    """

    r_tilde: np.ndarray
    r0: np.ndarray
    r_cols: np.ndarray
    gamma_bm: float
    s_bm: int

    def __post_init__(self):
        for f_ in fields(self):
            val = getattr(self, f_.name)
            if isinstance(val, np.ndarray):
                val.setflags(write=False)


@dataclass(frozen=True)
class BenchmarkEstimateSet:
    """Benchmark MMSE estimates: direct channels and cascaded columns.

    h_d_bm: (K, M); h0_bm: (L, N, K, M) with h0_bm[l, n, k] the estimate of
    h_1[l][:, n] * h_2[l, k][n]; every column estimate lies in the span of
    its LoS column by construction of the rank-one filter.
    """

    h_d_bm: np.ndarray
    h0_bm: np.ndarray
    s_bm: int
    tau_c_bm: float

    def __post_init__(self):
        for f_ in fields(self):
            val = getattr(self, f_.name)
            if isinstance(val, np.ndarray):
                val.setflags(write=False)


def bm_synthesize_and_decorrelate(channels: ChannelSet, config: SystemConfig,
                                  rng: np.random.Generator,
                                  noise: np.ndarray | None = None) -> BmObservationSet:
    """Simulate benchmark training and project out every column block.

    The physical observation is the same as the proposed protocol's (same
    reflection pattern source); with S >= NL + 1 each column projection
    r_q / S is the corresponding channel block plus white noise of variance
    sigma2/(S p_tx tau_s) per entry.
    """
    s_bm = config.s_subphases
    nl = config.n_elements * config.l_irs
    if s_bm < min_subphases(config.n_elements, config.l_irs, config.m_bs, "benchmark"):
        raise InsufficientSubphases(
            f"benchmark needs S >= {nl + 1}, config has S = {s_bm}")
    k_users, m_bs = channels.h_d.shape
    if k_users != config.k_users or m_bs != config.m_bs:
        raise DimensionMismatch("channel set does not match config dimensions")
    v_tr = build_training_matrix(s_bm, config.n_elements, config.l_irs)
    sigma_eff = np.sqrt(config.sigma2 / (config.p_tx * config.tau_s))
    if noise is None:
        noise = (rng.standard_normal((k_users, s_bm, m_bs))
                 + 1j * rng.standard_normal((k_users, s_bm, m_bs))) / np.sqrt(2.0)
    w = v_tr[:, 1:]
    h1c = channels.h_1_concat
    r_tilde = np.empty((k_users, m_bs * (nl + 1)), dtype=np.complex128)
    for ki in range(k_users):
        scaled_cols = h1c * channels.h_2k[ki][None, :]
        r_obs = w @ scaled_cols.T + channels.h_d[ki][None, :] + sigma_eff * noise[ki]
        proj = v_tr.conj().T @ r_obs / s_bm          # (NL+1, M) blocks
        r_tilde[ki] = proj.reshape(-1)
    r0 = r_tilde[:, :m_bs].copy()
    r_cols = (r_tilde[:, m_bs:]
              .reshape(k_users, config.l_irs, config.n_elements, m_bs)
              .transpose(1, 2, 0, 3).copy())
    gamma_bm = config.sigma2 / (s_bm * config.p_tx * config.tau_s)
    return BmObservationSet(r_tilde=r_tilde, r0=r0, r_cols=r_cols,
                            gamma_bm=gamma_bm, s_bm=s_bm)


def bm_mmse_direct(r0: np.ndarray, beta_d: float, r_bs: np.ndarray,
                   gamma_bm: float) -> np.ndarray:
    """Direct-channel MMSE under the benchmark's noise level."""
    estimate, _, _ = mmse_direct(r0, beta_d, r_bs, gamma_bm)
    return estimate


def bm_mmse_cascaded(r_block: np.ndarray, r_nn: float, beta_lk: float,
                     h1_unit: np.ndarray, gamma_bm: float,
                     dense: bool = False) -> np.ndarray:
    """Rank-one-prior MMSE estimate of one cascaded column.

    The column prior is (r_nn beta_lk) h1_unit h1_unit^H with h1_unit the
    unit-modulus LoS direction (norm^2 = M), so the filter output is
    colinear with h1_unit:
        estimate = h1_unit * (h1_unit^H r_block) * r beta / (gamma + r beta M).
    dense=True evaluates the same filter through an explicit Hermitian
    solve instead (cross-check path).
    """
    r_block = np.asarray(r_block, dtype=np.complex128)
    h1_unit = np.asarray(h1_unit, dtype=np.complex128)
    if r_block.shape != h1_unit.shape:
        raise DimensionMismatch(f"block shape {r_block.shape} != column shape {h1_unit.shape}")
    m_bs = h1_unit.shape[0]
    prior = r_nn * beta_lk
    if dense:
        lhs = prior * np.outer(h1_unit, h1_unit.conj()) + gamma_bm * np.eye(m_bs)
        try:
            q_r = np.linalg.solve(lhs, r_block)
        except np.linalg.LinAlgError as exc:
            raise SingularFilter(f"benchmark filter singular: {exc}") from exc
        return prior * h1_unit * (h1_unit.conj() @ q_r)
    denom = gamma_bm + prior * m_bs
    if denom <= 0.0:
        raise SingularFilter("benchmark filter singular: gamma + r beta M <= 0")
    return h1_unit * ((h1_unit.conj() @ r_block) * prior / denom)


def bm_recover_h2(h0_bm: np.ndarray, h_1: np.ndarray) -> np.ndarray:
    """Per-column least-squares recovery of element channels.

    h0_bm: (L, N, K, M) cascaded column estimates; h_1: (L, M, N) LoS
    stack. Returns (L, K, N) with entry [l, k, n] =
    h_1[l][:, n]^H h0_bm[l, n, k] / ||h_1[l][:, n]||^2.
    """
    h0_bm = np.asarray(h0_bm)
    h_1 = np.asarray(h_1)
    l_irs, m_bs, n_el = h_1.shape
    if h0_bm.shape[0] != l_irs or h0_bm.shape[1] != n_el or h0_bm.shape[3] != m_bs:
        raise DimensionMismatch(f"h0_bm shape {h0_bm.shape} inconsistent with h_1 {h_1.shape}")
    norms2 = np.einsum("lmn,lmn->ln", h_1.conj(), h_1).real
    if np.any(norms2 == 0.0):
        raise ZeroColumn("an LoS column has zero norm; recovery undefined")
    # [l, k, n] = sum_m conj(h_1[l, m, n]) h0_bm[l, n, k, m] / norms2[l, n]
    inner = np.einsum("lmn,lnkm->lkn", h_1.conj(), h0_bm)
    return inner / norms2[:, None, :]


def bm_estimate_all(bm_obs: BmObservationSet, pathloss: PathLossSet,
                    correlation: CorrelationModel, h_1: np.ndarray,
                    config: SystemConfig) -> BenchmarkEstimateSet:
    """Benchmark MMSE estimation for every user, element, and IRS."""
    k_users, m_bs = bm_obs.r0.shape
    l_irs, _, n_el = h_1.shape
    h_d_bm = np.empty((k_users, m_bs), dtype=np.complex128)
    for ki in range(k_users):
        h_d_bm[ki] = bm_mmse_direct(bm_obs.r0[ki], float(pathloss.beta_d[ki]),
                                    correlation.r_bs[ki], bm_obs.gamma_bm)
    h0_bm = np.empty((l_irs, n_el, k_users, m_bs), dtype=np.complex128)
    for li in range(l_irs):
        beta_1 = float(np.vdot(h_1[li, :, 0], h_1[li, :, 0]).real) / m_bs
        h1_unit = h_1[li] / np.sqrt(beta_1)
        for ni in range(n_el):
            for ki in range(k_users):
                r_nn = float(correlation.r_irs[li, ki][ni, ni].real)
                beta_lk = beta_1 * float(pathloss.beta_2[li, ki])
                h0_bm[li, ni, ki] = bm_mmse_cascaded(
                    bm_obs.r_cols[li, ni, ki], r_nn, beta_lk,
                    h1_unit[:, ni], bm_obs.gamma_bm)
    return BenchmarkEstimateSet(h_d_bm=h_d_bm, h0_bm=h0_bm, s_bm=bm_obs.s_bm,
                                tau_c_bm=bm_obs.s_bm * config.tau_s)
