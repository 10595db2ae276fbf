"""Training design, observation synthesis, and decorrelation.

The training matrix collects one column per estimated quantity: a leading
all-ones column that keeps the direct channel visible in every sub-phase,
then one column per (IRS, element) pair carrying that element's reflection
coefficient over the sub-phases. Columns are the leading columns of an
S-point DFT pattern, which meets the noise-amplification lower bound 1/S
with unit-modulus (feasible) reflection coefficients.

Observations are simulated at the post-correlation level: with orthogonal
pilots of length t_s >= K the users decouple and the per-subphase,
per-user observation is an M-vector with additive white noise of variance
sigma2 / (p_tx * tau_s) per entry. Kronecker products are never formed on
the hot path; the dense effective matrix exists only for validation.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .channel import ChannelSet
from .config import SystemConfig
from .errors import DimensionMismatch, InvalidSize, RankDeficient

GRAM_RTOL = 1e-10


def build_training_matrix(s_subphases: int, n_elements: int, l_irs: int) -> np.ndarray:
    """Leading NL+1 columns of the S-point DFT pattern.

    Entry (s, q) = w^(s*q) with w = exp(-2j pi / S), rows indexing
    sub-phases and columns indexing [direct, element (0,0), ...]. Exponents
    are reduced mod S in exact integer arithmetic before the complex
    exponential is evaluated; evaluating w**(s*q) directly loses ~3 digits
    of orthogonality by S ~ 100, enough to matter downstream.

    Full column orthogonality (V^H V = S I) holds only when S >= NL + 1;
    smaller S is permitted here and validated by the decorrelation stage.
    """
    if s_subphases < 1:
        raise InvalidSize(f"sub-phase count must be >= 1, got {s_subphases}")
    if n_elements < 1 or l_irs < 1:
        raise InvalidSize("n_elements and l_irs must be >= 1")
    n_cols = n_elements * l_irs + 1
    rows = np.arange(s_subphases, dtype=np.int64)
    cols = np.arange(n_cols, dtype=np.int64)
    exponent = (rows[:, None] * cols[None, :]) % s_subphases
    return np.exp(-2j * np.pi * exponent / s_subphases)


def build_H1bar(h_1: np.ndarray, m_bs: int) -> tuple[np.ndarray, np.ndarray]:
    """Block-diagonal channel matrix and its Gram scaling.

    h_1 is the (L, M, N) stack of LoS matrices. Returns (h1_bar, sigma):
    h1_bar is M(NL+1) x (M+NL) with first block sqrt(M) I_M and one column
    h_1[l][:, n] per element; sigma is the (M+NL,)-diagonal
    [1,...,1, beta_1[0] x N, ..., beta_1[L-1] x N] recovered from the column
    norms (every LoS entry has modulus sqrt(beta_1)), so that
    h1_bar^H h1_bar = M * diag(sigma).
    """
    h_1 = np.asarray(h_1, dtype=np.complex128)
    if h_1.ndim != 3:
        raise DimensionMismatch(f"expected (L, M, N) LoS stack, got shape {h_1.shape}")
    l_irs, m_rows, n_elements = h_1.shape
    if m_rows != m_bs:
        raise DimensionMismatch(f"LoS matrices have {m_rows} rows, expected m_bs = {m_bs}")
    nl = n_elements * l_irs
    h1_bar = np.zeros((m_bs * (nl + 1), m_bs + nl), dtype=np.complex128)
    h1_bar[:m_bs, :m_bs] = np.sqrt(m_bs) * np.eye(m_bs)
    sigma = np.ones(m_bs + nl)
    for li in range(l_irs):
        for ni in range(n_elements):
            j = li * n_elements + ni
            rows = slice(m_bs * (1 + j), m_bs * (2 + j))
            h1_bar[rows, m_bs + j] = h_1[li, :, ni]
            sigma[m_bs + j] = np.vdot(h_1[li, :, ni], h_1[li, :, ni]).real / m_bs
    return h1_bar, sigma


@dataclass(frozen=True)
class TrainingDesign:
    """Everything fixed about one training configuration.

    v_tr: (S, NL+1) training matrix; v_ls: (L, S, N) per-IRS per-subphase
    reflection coefficients (v_ls[l, s] is the diagonal applied by IRS l in
    sub-phase s); h1_bar and sigma from build_H1bar; h1_cols: (M, NL)
    element-column view of the LoS stack with beta1_col its per-column
    path losses, both kept for O(S M NL) decorrelation.
    """

    v_tr: np.ndarray
    v_ls: np.ndarray
    h1_bar: np.ndarray
    sigma: np.ndarray
    h1_cols: np.ndarray
    beta1_col: np.ndarray

    def __post_init__(self):
        for f_ in fields(self):
            arr = np.asarray(getattr(self, f_.name))
            arr.setflags(write=False)
            object.__setattr__(self, f_.name, arr)

    @property
    def sigma_matrix(self) -> np.ndarray:
        return np.diag(self.sigma)

    @property
    def s_subphases(self) -> int:
        return self.v_tr.shape[0]

    @property
    def noise_scaling(self) -> float:
        """Achieved decorrelation noise-amplification factor.

        The direct-channel measurement averages S unit-modulus-weighted
        observations, so its noise variance is (1/S) of the per-subphase
        variance; 1/S is also the information-theoretic lower bound for any
        feasible (unit-modulus-bounded) design, i.e. the DFT design meets
        it with equality.
        """
        return 1.0 / self.s_subphases


def build_training_design(h_1: np.ndarray, config: SystemConfig) -> TrainingDesign:
    """Assemble the DFT design for a given LoS stack and configuration."""
    h_1 = np.asarray(h_1, dtype=np.complex128)
    l_irs, m_bs, n_el = h_1.shape
    if (l_irs, m_bs, n_el) != (config.l_irs, config.m_bs, config.n_elements):
        raise DimensionMismatch(
            f"LoS stack shape {h_1.shape} does not match config "
            f"({config.l_irs}, {config.m_bs}, {config.n_elements})")
    v_tr = build_training_matrix(config.s_subphases, n_el, l_irs)
    h1_bar, sigma = build_H1bar(h_1, m_bs)
    v_ls = np.empty((l_irs, config.s_subphases, n_el), dtype=np.complex128)
    for li in range(l_irs):
        v_ls[li] = v_tr[:, 1 + li * n_el: 1 + (li + 1) * n_el]
    h1_cols = h_1.transpose(1, 0, 2).reshape(m_bs, l_irs * n_el)
    beta1_col = sigma[m_bs:]
    return TrainingDesign(v_tr=v_tr, v_ls=v_ls, h1_bar=h1_bar, sigma=sigma,
                          h1_cols=h1_cols, beta1_col=beta1_col)


def effective_training_matrix(design: TrainingDesign) -> np.ndarray:
    """Dense (S*M, M+NL) effective matrix (validation path only).

    Column j < M is sqrt(M) * (direct column of V) acting on antenna j;
    column M+j is (element column of V) tensored with the LoS column.
    Equal to (V kron I_M) @ h1_bar without forming the Kronecker factor.
    """
    v = design.v_tr
    s, n_cols = v.shape
    m_bs = design.h1_cols.shape[0]
    nl = n_cols - 1
    out = np.zeros((s * m_bs, m_bs + nl), dtype=np.complex128)
    eye = np.eye(m_bs)
    for si in range(s):
        rows = slice(si * m_bs, (si + 1) * m_bs)
        out[rows, :m_bs] = np.sqrt(m_bs) * v[si, 0] * eye
        out[rows, m_bs:] = v[si, 1:][None, :] * design.h1_cols
    return out


def noise_variances(config: SystemConfig, beta_1: np.ndarray) -> tuple[float, np.ndarray]:
    """Effective per-entry noise variances after decorrelation.

    Returns (gamma_d, gamma_l[L]): gamma_d = sigma2 / (S p_tx tau_s) on the
    direct measurement; gamma_l = sigma2 / (beta_1[l] S M p_tx tau_s) on
    IRS l's element measurements.
    """
    denom = config.s_subphases * config.p_tx * config.tau_s
    gamma_d = config.sigma2 / denom
    gamma_l = config.sigma2 / (np.asarray(beta_1) * denom * config.m_bs)
    return gamma_d, gamma_l


@dataclass(frozen=True)
class ObservationSet:
    """Per-user training observations, raw and decorrelated.

    r_tr: (K, S*M) stacked post-correlation observations. After
    decorrelation: r_tilde (K, M+NL); r0 (K, M) direct-channel block
    rescaled so its noiseless value is h_d itself; r_l (L, K, N) per-IRS
    element blocks; gamma_d / gamma_l the corresponding noise variances.
    Fields not yet computed are None.
    """

    r_tr: np.ndarray | None = None
    r_tilde: np.ndarray | None = None
    r0: np.ndarray | None = None
    r_l: np.ndarray | None = None
    gamma_d: float | None = None
    gamma_l: np.ndarray | None = None

    def __post_init__(self):
        for f_ in fields(self):
            val = getattr(self, f_.name)
            if isinstance(val, np.ndarray):
                val.setflags(write=False)


def synthesize_observations(channels: ChannelSet, design: TrainingDesign,
                            config: SystemConfig, rng: np.random.Generator,
                            noise: np.ndarray | None = None) -> ObservationSet:
    """Simulate the stacked training observation for every user.

    Per sub-phase s and user k the BS sees
        r_s = h_d[k] + sum over elements of v_tr[s, 1+j] h1_cols[:, j] h_2k[k, j]
              + noise,
    noise i.i.d. complex Gaussian with variance sigma2/(p_tx tau_s) per
    entry. `noise` may be passed explicitly (shape (K, S, M), already at
    unit variance) so alternative synthesis routes can be compared on
    identical draws; it is scaled by the effective std internally.
    """
    k_users, m_bs = channels.h_d.shape
    s = design.s_subphases
    if k_users != config.k_users or m_bs != config.m_bs:
        raise DimensionMismatch("channel set does not match config dimensions")
    if design.h1_cols.shape[1] != channels.h_2k.shape[1]:
        raise DimensionMismatch("design and channel set disagree on element count")
    sigma_eff = np.sqrt(config.sigma2 / (config.p_tx * config.tau_s))
    if noise is None:
        noise = (rng.standard_normal((k_users, s, m_bs))
                 + 1j * rng.standard_normal((k_users, s, m_bs))) / np.sqrt(2.0)
    elif noise.shape != (k_users, s, m_bs):
        raise DimensionMismatch(f"noise shape {noise.shape} != {(k_users, s, m_bs)}")
    w = design.v_tr[:, 1:]
    r_tr = np.empty((k_users, s * m_bs), dtype=np.complex128)
    for ki in range(k_users):
        scaled_cols = design.h1_cols * channels.h_2k[ki][None, :]
        r_obs = w @ scaled_cols.T + channels.h_d[ki][None, :] + sigma_eff * noise[ki]
        r_tr[ki] = r_obs.reshape(-1)
    return ObservationSet(r_tr=r_tr)


def synthesize_observations_kron(channels: ChannelSet, design: TrainingDesign,
                                 config: SystemConfig,
                                 noise: np.ndarray | None = None) -> ObservationSet:
    """Validation route: materialize the stacked linear model directly.

    r_tr[k] = effective_matrix @ [h_d[k]/sqrt(M); h_2k[k]] + scaled noise.
    Same contract as synthesize_observations; kept separate so tests can
    compare both routes on identical noise.
    """
    eff = effective_training_matrix(design)
    m_bs = config.m_bs
    sigma_eff = np.sqrt(config.sigma2 / (config.p_tx * config.tau_s))
    r_tr = np.empty((config.k_users, eff.shape[0]), dtype=np.complex128)
    for ki in range(config.k_users):
        stacked = np.concatenate([channels.h_d[ki] / np.sqrt(m_bs), channels.h_2k[ki]])
        r_tr[ki] = eff @ stacked
        if noise is not None:
            r_tr[ki] += sigma_eff * noise[ki].reshape(-1)
    return ObservationSet(r_tr=r_tr)


def gram_matrix(design: TrainingDesign) -> np.ndarray:
    """Gram matrix of the effective training matrix (validation path)."""
    eff = effective_training_matrix(design)
    return eff.conj().T @ eff


def decorrelate(obs: ObservationSet, design: TrainingDesign, config: SystemConfig,
                validate_gram: bool = False) -> ObservationSet:
    """Split stacked observations into per-channel measurements.

    Applies the structured decorrelator: project onto each training column
    and rescale by the design's known column energies (S M sigma). This
    needs no matrix inversion and is always computable; whether the result
    is an unbiased measurement of every channel depends on the columns
    actually being orthogonal, which holds iff S >= NL + 1.

    With validate_gram=True the dense Gram matrix is checked first and
    RankDeficient is raised when its smallest eigenvalue falls below
    GRAM_RTOL times its largest (invalid S or degenerate LoS geometry).
    """
    if obs.r_tr is None:
        raise ValueError("observations not synthesized")
    if validate_gram:
        evals = np.linalg.eigvalsh(gram_matrix(design))
        if evals[0] < GRAM_RTOL * evals[-1]:
            raise RankDeficient(
                f"effective training Gram matrix is singular: eigenvalue range "
                f"[{evals[0]:.3e}, {evals[-1]:.3e}] below relative tolerance {GRAM_RTOL:.0e}")
    s, m_bs = design.s_subphases, config.m_bs
    nl = design.h1_cols.shape[1]
    n_el = config.n_elements
    k_users = obs.r_tr.shape[0]
    gamma_d, gamma_l = noise_variances(config, design.beta1_col[::n_el])

    r_tilde = np.empty((k_users, m_bs + nl), dtype=np.complex128)
    r0 = np.empty((k_users, m_bs), dtype=np.complex128)
    r_l = np.empty((config.l_irs, k_users, n_el), dtype=np.complex128)
    for ki in range(k_users):
        r_obs = obs.r_tr[ki].reshape(s, m_bs)
        proj = design.v_tr.conj().T @ r_obs          # (NL+1, M) column projections
        r0[ki] = proj[0] / s
        r_tilde[ki, :m_bs] = r0[ki] / np.sqrt(m_bs)
        elem = np.einsum("mj,jm->j", design.h1_cols.conj(), proj[1:])
        elem /= s * m_bs * design.beta1_col
        r_tilde[ki, m_bs:] = elem
        r_l[:, ki, :] = elem.reshape(config.l_irs, n_el)
    return ObservationSet(r_tr=obs.r_tr, r_tilde=r_tilde, r0=r0, r_l=r_l,
                          gamma_d=gamma_d, gamma_l=gamma_l)
