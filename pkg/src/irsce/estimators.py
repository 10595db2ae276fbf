"""LS and Bayesian (MMSE) channel estimators plus error covariances.

The decorrelated measurement of each channel is the channel plus white
noise of known variance, so LS estimation is the identity and MMSE
estimation is linear shrinkage through the prior covariance. Filters are
formed by solving Hermitian systems, never by explicit inversion; with
eta = 0.95 the prior covariance is poorly conditioned and the inverse
would shed accuracy the solve keeps.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .channel import CorrelationModel
from .config import PathLossSet, SystemConfig
from .errors import DimensionMismatch, SingularFilter
from .training import ObservationSet


def mmse_filter(beta: float, r: np.ndarray, gamma: float) -> np.ndarray:
    """Shrinkage matrix F = beta R (beta R + gamma I)^(-1).

    Computed as the conjugate transpose of a Hermitian solve. Raises
    SingularFilter when beta R + gamma I is singular (possible only through
    misuse: gamma <= 0 with a rank-deficient prior).
    """
    a = beta * np.asarray(r, dtype=np.complex128)
    lhs = a + gamma * np.eye(a.shape[0])
    try:
        f_h = np.linalg.solve(lhs, a)
    except np.linalg.LinAlgError as exc:
        raise SingularFilter(f"prior + noise matrix is singular: {exc}") from exc
    return f_h.conj().T


def _mmse_apply(observation: np.ndarray, beta: float, r: np.ndarray,
                gamma: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    filt = mmse_filter(beta, r, gamma)
    estimate = filt @ observation
    psi = filt @ (beta * np.asarray(r, dtype=np.complex128)).conj().T
    psi = 0.5 * (psi + psi.conj().T)
    psi_err = beta * np.asarray(r, dtype=np.complex128) - psi
    psi_err = 0.5 * (psi_err + psi_err.conj().T)
    return estimate, psi, psi_err


def mmse_direct(r0: np.ndarray, beta_d: float, r_bs: np.ndarray,
                gamma_d: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """MMSE estimate of a direct channel from its decorrelated measurement.

    Returns (estimate, psi, psi_err): estimate
    beta_d R (beta_d R + gamma_d I)^(-1) r0, psi the covariance of the
    estimate, psi_err = beta_d R - psi the error covariance.
    """
    r0 = np.asarray(r0)
    if r0.shape[0] != r_bs.shape[0]:
        raise DimensionMismatch(f"observation length {r0.shape[0]} != prior dim {r_bs.shape[0]}")
    return _mmse_apply(r0, beta_d, r_bs, gamma_d)


def mmse_irs(r_l: np.ndarray, beta_2: float, r_irs: np.ndarray,
             gamma_l: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """MMSE estimate of one IRS-user channel from its element measurements.

    gamma_l is the effective noise variance of the decorrelated element
    block (already includes the BS-IRS path gain and the array-gain factor
    M; see training.noise_variances). Shrinkage form identical to the
    direct-channel case with prior covariance beta_2 R.
    """
    r_l = np.asarray(r_l)
    if r_l.shape[0] != r_irs.shape[0]:
        raise DimensionMismatch(f"observation length {r_l.shape[0]} != prior dim {r_irs.shape[0]}")
    return _mmse_apply(r_l, beta_2, r_irs, gamma_l)


def ls_estimates(obs: ObservationSet) -> tuple[np.ndarray, np.ndarray]:
    """LS estimates: the decorrelated measurements themselves.

    Returns (h_d_ls (K, M), h_2_ls (L, K, N)) as writable copies.
    """
    if obs.r0 is None or obs.r_l is None:
        raise ValueError("observations not decorrelated; run training.decorrelate first")
    return obs.r0.copy(), obs.r_l.copy()


def cascaded_estimate(h_2_hat: np.ndarray, h_1: np.ndarray) -> np.ndarray:
    """Cascaded-channel matrix implied by per-element estimates.

    h_2_hat: (L, N) estimates for one user; h_1: (L, M, N) LoS stack.
    Returns the (M, L*N) concatenation of H_1[l] diag(h_2_hat[l]), column
    (l, n) being h_1[l][:, n] * h_2_hat[l, n].
    """
    h_2_hat = np.asarray(h_2_hat)
    h_1 = np.asarray(h_1)
    if h_1.ndim != 3 or h_2_hat.ndim != 2:
        raise DimensionMismatch("expected h_2_hat (L, N) and h_1 (L, M, N)")
    l_irs, m_bs, n_el = h_1.shape
    if h_2_hat.shape != (l_irs, n_el):
        raise DimensionMismatch(f"h_2_hat shape {h_2_hat.shape} != {(l_irs, n_el)}")
    return (h_1 * h_2_hat[:, None, :]).transpose(1, 0, 2).reshape(m_bs, l_irs * n_el)


@dataclass(frozen=True)
class EstimateSet:
    """All per-user estimates and covariances for one observation set.

    h_d_*: (K, M); h_2_*: (L, K, N); psi_d / psi_d_err: (K, M, M);
    psi_2 / psi_2_err: (L, K, N, N).
    """

    h_d_ls: np.ndarray
    h_d_mmse: np.ndarray
    h_2_ls: np.ndarray
    h_2_mmse: np.ndarray
    psi_d: np.ndarray
    psi_d_err: np.ndarray
    psi_2: np.ndarray
    psi_2_err: np.ndarray

    def __post_init__(self):
        for f_ in fields(self):
            arr = np.asarray(getattr(self, f_.name))
            arr.setflags(write=False)
            object.__setattr__(self, f_.name, arr)


def estimate_all(obs: ObservationSet, pathloss: PathLossSet,
                 correlation: CorrelationModel, config: SystemConfig) -> EstimateSet:
    """Run LS and MMSE estimation for every user and IRS."""
    h_d_ls, h_2_ls = ls_estimates(obs)
    k_users, m_bs = h_d_ls.shape
    l_irs, _, n_el = h_2_ls.shape
    h_d_mmse = np.empty_like(h_d_ls)
    h_2_mmse = np.empty_like(h_2_ls)
    psi_d = np.empty((k_users, m_bs, m_bs), dtype=np.complex128)
    psi_d_err = np.empty_like(psi_d)
    psi_2 = np.empty((l_irs, k_users, n_el, n_el), dtype=np.complex128)
    psi_2_err = np.empty_like(psi_2)
    for ki in range(k_users):
        h_d_mmse[ki], psi_d[ki], psi_d_err[ki] = mmse_direct(
            obs.r0[ki], float(pathloss.beta_d[ki]), correlation.r_bs[ki], obs.gamma_d)
        for li in range(l_irs):
            h_2_mmse[li, ki], psi_2[li, ki], psi_2_err[li, ki] = mmse_irs(
                obs.r_l[li, ki], float(pathloss.beta_2[li, ki]),
                correlation.r_irs[li, ki], float(obs.gamma_l[li]))
    return EstimateSet(h_d_ls=h_d_ls, h_d_mmse=h_d_mmse, h_2_ls=h_2_ls, h_2_mmse=h_2_mmse,
                       psi_d=psi_d, psi_d_err=psi_d_err, psi_2=psi_2, psi_2_err=psi_2_err)
