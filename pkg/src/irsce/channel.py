"""Channel synthesis: correlated Rayleigh links and deterministic LoS matrices.

One :class:`ChannelSet` holds a single fading realization for every link of
one user set. Random links are correlated Rayleigh (square-root coloring of
i.i.d. circularly-symmetric Gaussians); the BS-IRS links are deterministic
rank-one far-field LoS matrices built from geometry alone.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields

import numpy as np

from .config import Geometry, PathLossSet, SystemConfig
from .errors import InvalidCoefficient, InvalidSize, NotHermitian, NotPSD, ZeroDistance

HERMITIAN_TOL = 1e-10
PSD_FLOOR = -1e-12


def exp_correlation(n: int, eta: float) -> np.ndarray:
    """Exponential correlation matrix: entry (i, j) = eta^|i-j|.

    Real, symmetric, Toeplitz, unit diagonal; positive definite for
    0 <= eta < 1.
    """
    if n < 1:
        raise InvalidSize(f"dimension must be >= 1, got {n}")
    if not (0.0 <= eta < 1.0):
        raise InvalidCoefficient(f"eta must lie in [0, 1), got {eta}")
    idx = np.arange(n)
    return eta ** np.abs(idx[:, None] - idx[None, :])


def matrix_sqrt(r: np.ndarray) -> np.ndarray:
    """Principal PSD square root via eigen-decomposition.

    Eigenvalues in [PSD_FLOOR, 0) are treated as rounding noise and clipped
    to zero; anything below the floor raises NotPSD. Asymmetry beyond
    HERMITIAN_TOL (relative to the largest entry) raises NotHermitian.
    """
    r = np.asarray(r)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise InvalidSize(f"expected a square matrix, got shape {r.shape}")
    scale = max(1.0, float(np.max(np.abs(r)))) if r.size else 1.0
    asym = float(np.max(np.abs(r - r.conj().T))) if r.size else 0.0
    if asym > HERMITIAN_TOL * scale:
        raise NotHermitian(f"asymmetry {asym:.3e} exceeds {HERMITIAN_TOL:.0e} * {scale:.3e}")
    w, v = np.linalg.eigh(r)
    top = max(float(w[-1]), 1.0)
    if float(w[0]) < PSD_FLOOR * top:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below floor {PSD_FLOOR * top:.3e}")
    w = np.clip(w, 0.0, None)
    root = (v * np.sqrt(w)) @ v.conj().T
    if np.isrealobj(r):
        root = root.real
    return root


def sample_correlated_rayleigh(beta: float, r_sqrt: np.ndarray, rng: np.random.Generator,
                               count: int | None = None) -> np.ndarray:
    """Draw sqrt(beta) * R^(1/2) z with z i.i.d. CN(0, 1).

    Real and imaginary parts are each drawn with variance 1/2 so every
    complex entry has unit variance. Returns one vector, or a (count, n)
    batch when count is given.
    """
    if beta < 0:
        raise ValueError(f"path loss must be >= 0, got {beta}")
    n = r_sqrt.shape[0]
    shape = (n,) if count is None else (count, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return np.sqrt(beta) * (z @ r_sqrt.T)


def build_los_matrix(d: float, aod: float, aoa: float, beta_1: float,
                     config: SystemConfig) -> np.ndarray:
    """Far-field LoS matrix between the BS array and one IRS.

    Entry (m, n) = sqrt(beta_1) * exp(-j 2 pi d_mn / lambda) with
    d_mn = d + n * delta_irs * lambda * cos(aoa) - m * delta_bs * lambda * cos(aod)
    (m, n zero-based). One azimuth pair per IRS makes the phase separable, so
    the matrix is an outer product of two steering vectors (rank one). The
    common phase exp(-j 2 pi d / lambda) is kept.
    """
    if d <= 0:
        raise ZeroDistance(f"BS-IRS distance must be positive, got {d}")
    m_idx = np.arange(config.m_bs)
    n_idx = np.arange(config.n_elements)
    # exponents reduced to pure spacing multiples; lambda cancels against 1/lambda
    a_bs = np.exp(2j * np.pi * config.delta_bs * np.cos(aod) * m_idx)
    a_irs = np.exp(-2j * np.pi * config.delta_irs * np.cos(aoa) * n_idx)
    phase0 = np.exp(-2j * np.pi * d / config.lambda_c)
    return np.sqrt(beta_1) * phase0 * np.outer(a_bs, a_irs)


@dataclass(frozen=True)
class CorrelationModel:
    """Per-user BS-side and per-(IRS, user) element-side correlation matrices
    together with their principal square roots."""

    r_bs: np.ndarray        # (K, M, M)
    r_irs: np.ndarray       # (L, K, N, N)
    r_bs_sqrt: np.ndarray
    r_irs_sqrt: np.ndarray

    def __post_init__(self):
        for f_ in fields(self):
            arr = np.asarray(getattr(self, f_.name))
            arr.setflags(write=False)
            object.__setattr__(self, f_.name, arr)


def build_correlation(config: SystemConfig) -> CorrelationModel:
    """Exponential-model correlation for every random link in the system.

    The model is homogeneous (one eta per side), so the per-index matrices
    are replications of a single template; they are still materialized
    per index to keep downstream code shape-generic.
    """
    r_bs = exp_correlation(config.m_bs, config.eta_bs)
    r_irs = exp_correlation(config.n_elements, config.eta_irs)
    r_bs_sqrt = matrix_sqrt(r_bs)
    r_irs_sqrt = matrix_sqrt(r_irs)
    k, l = config.k_users, config.l_irs
    return CorrelationModel(
        r_bs=np.broadcast_to(r_bs, (k,) + r_bs.shape).copy(),
        r_irs=np.broadcast_to(r_irs, (l, k) + r_irs.shape).copy(),
        r_bs_sqrt=np.broadcast_to(r_bs_sqrt, (k,) + r_bs_sqrt.shape).copy(),
        r_irs_sqrt=np.broadcast_to(r_irs_sqrt, (l, k) + r_irs_sqrt.shape).copy(),
    )


@dataclass(frozen=True)
class ChannelSet:
    """One realization of every link for all users.

    h_d: (K, M) direct channels; h_2: (L, K, N) IRS-user channels;
    h_1: (L, M, N) LoS BS-IRS matrices.
    """

    h_d: np.ndarray
    h_2: np.ndarray
    h_1: np.ndarray

    def __post_init__(self):
        for f_ in fields(self):
            arr = np.asarray(getattr(self, f_.name), dtype=np.complex128)
            arr.setflags(write=False)
            object.__setattr__(self, f_.name, arr)

    @property
    def h_2k(self) -> np.ndarray:
        """(K, L*N) per-user concatenation [h_2[0,k]; h_2[1,k]; ...]."""
        l, k, n = self.h_2.shape
        return self.h_2.transpose(1, 0, 2).reshape(k, l * n)

    @property
    def h_1_concat(self) -> np.ndarray:
        """(M, L*N) column-block concatenation [h_1[0], h_1[1], ...].

        Block order matches the h_2k stacking, so
        h_1_concat @ diag(v) @ h_2k[k] composes the full reflected link.
        """
        l, m, n = self.h_1.shape
        return self.h_1.transpose(1, 0, 2).reshape(m, l * n)


def synthesize_channels(config: SystemConfig, geometry: Geometry, pathloss: PathLossSet,
                        correlation: CorrelationModel, rng: np.random.Generator) -> ChannelSet:
    """Draw one ChannelSet realization.

    Draw order is fixed (direct links first, user-major; then IRS links,
    IRS-major then user) so identical generator states give bitwise-identical
    output.
    """
    k, l = config.k_users, config.l_irs
    h_d = np.empty((k, config.m_bs), dtype=np.complex128)
    for ki in range(k):
        h_d[ki] = sample_correlated_rayleigh(pathloss.beta_d[ki], correlation.r_bs_sqrt[ki], rng)
    h_2 = np.empty((l, k, config.n_elements), dtype=np.complex128)
    for li in range(l):
        for ki in range(k):
            h_2[li, ki] = sample_correlated_rayleigh(
                pathloss.beta_2[li, ki], correlation.r_irs_sqrt[li, ki], rng)
    h_1 = np.empty((l, config.m_bs, config.n_elements), dtype=np.complex128)
    for li in range(l):
        h_1[li] = build_los_matrix(
            float(geometry.d_bs_irs[li]), float(geometry.aod_azimuth[li]),
            float(geometry.aoa_azimuth[li]), float(pathloss.beta_1[li]), config)
    return ChannelSet(h_d=h_d, h_2=h_2, h_1=h_1)


def dump_channelset_csv(cs: ChannelSet, path) -> None:
    """Write a ChannelSet to CSV for cross-language validation.

    One row per vector / matrix row: array name, outer indices, then the
    entries with real and imaginary parts interleaved. Floats use repr-level
    precision so a reader can reconstruct the arrays exactly.
    """
    def interleave(vec):
        out = []
        for v in vec:
            out.append(repr(float(v.real)))
            out.append(repr(float(v.imag)))
        return out

    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["array", "i", "j", "entries_re_im_interleaved"])
        for ki in range(cs.h_d.shape[0]):
            w.writerow(["h_d", ki, ""] + interleave(cs.h_d[ki]))
        for li in range(cs.h_2.shape[0]):
            for ki in range(cs.h_2.shape[1]):
                w.writerow(["h_2", li, ki] + interleave(cs.h_2[li, ki]))
        for li in range(cs.h_1.shape[0]):
            for mi in range(cs.h_1.shape[1]):
                w.writerow(["h_1", li, mi] + interleave(cs.h_1[li, mi]))
