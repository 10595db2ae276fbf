"""Seeded Monte-Carlo experiment runner, sweeps, and CSV persistence.

One experiment = one sweep variable, a list of values, a trial count, and
a master seed. Per sweep cell and protocol the runner draws channels,
synthesizes and decorrelates training observations, applies LS/MMSE, and
aggregates NMSE per (channel kind, estimator), attaching closed forms
where they exist.

Reproducibility contract: every trial owns a counter-based (Philox) stream
keyed by (master_seed, protocol index, sweep cell, trial index), so trial
i's draws are derivable without serial dependence and results cannot depend
on chunking. The correlation coefficient and the estimator deliberately do
NOT enter the key, so runs that differ only in eta consume identical
Gaussian draws and are directly comparable; for the eta sweep itself all
cells share one cell key for the same reason. Kernels draw nothing and emit
per-trial accumulator rows; the reduction is a fixed-order compensated sum,
so outputs are independent of thread count.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .analysis import figure_of_merit, nmse_closed, nmse_closed_correlated
from .channel import build_los_matrix, exp_correlation, matrix_sqrt
from .config import (PathLossSet, SystemConfig, build_geometry, build_pathloss,
                     min_subphases)
from .errors import ConfigError
from .estimators import mmse_filter
from .kernels import get_backend
from .training import build_training_matrix

logger = logging.getLogger("irsce.harness")

SWEEP_NAMES = ("sigma2", "beta_d", "beta_2", "L", "S", "eta")
PROTOCOLS = ("proposed", "benchmark")
CHANNEL_KIND_ORDER = ("direct", "irs_link", "cascaded")
ESTIMATOR_ORDER = ("ls", "mmse")

CSV_HEADER = ("sweep_name", "sweep_value", "protocol", "channel_kind",
              "estimator_kind", "nmse_empirical", "nmse_closed", "fom",
              "trials", "seed", "eta", "s_effective", "tau_c")


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one Monte-Carlo experiment.

    eta_values: optional list of correlation contexts to run per sweep
    cell (both eta_bs and eta_irs are set to each value); None keeps the
    base config's coefficients. Must be None when sweeping eta itself.
    """

    config: SystemConfig
    sweep_name: str
    sweep_values: tuple
    trials: int
    master_seed: int
    protocols: tuple = ("proposed",)
    eta_values: tuple | None = None
    out_path: str | None = None

    def __post_init__(self):
        if self.sweep_name not in SWEEP_NAMES:
            raise ConfigError(f"sweep must be one of {SWEEP_NAMES}, got {self.sweep_name!r}")
        if len(self.sweep_values) == 0:
            raise ConfigError("sweep_values must be nonempty")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.protocols or any(p not in PROTOCOLS for p in self.protocols):
            raise ConfigError(f"protocols must be a nonempty subset of {PROTOCOLS}")
        if self.sweep_name == "eta" and self.eta_values is not None:
            raise ConfigError("eta_values cannot be combined with an eta sweep")
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        if self.eta_values is not None:
            object.__setattr__(self, "eta_values", tuple(float(v) for v in self.eta_values))


@dataclass(frozen=True)
class ResultRow:
    """One aggregated NMSE data point (one CSV line)."""

    sweep_name: str
    sweep_value: float
    protocol: str
    channel_kind: str
    estimator_kind: str
    nmse_empirical: float
    nmse_closed: float | None
    fom: float | None
    trials: int
    seed: int
    eta: float
    s_effective: int
    tau_c: float


def _irs_circle(l_irs: int, radius: float = 100.0) -> tuple:
    angles = [2.0 * math.pi * i / l_irs for i in range(l_irs)]
    return tuple((radius * math.cos(a), radius * math.sin(a)) for a in angles)


def _cell_config(base: SystemConfig, sweep_name: str, value: float) -> SystemConfig:
    if sweep_name == "sigma2":
        return base.replace(sigma2=float(value))
    if sweep_name == "S":
        return base.replace(s_subphases=int(round(value)))
    if sweep_name == "L":
        l_irs = int(round(value))
        return base.replace(l_irs=l_irs, irs_positions=_irs_circle(l_irs))
    if sweep_name == "eta":
        return base.replace(eta_bs=float(value), eta_irs=float(value))
    # beta_d / beta_2 sweeps override path loss, not the config
    return base


def _cell_pathloss(config: SystemConfig, sweep_name: str, value: float) -> PathLossSet:
    pathloss = build_pathloss(build_geometry(config))
    if sweep_name == "beta_d":
        return PathLossSet(beta_d=np.full(config.k_users, float(value)),
                           beta_2=pathloss.beta_2, beta_1=pathloss.beta_1)
    if sweep_name == "beta_2":
        return PathLossSet(beta_d=pathloss.beta_d,
                           beta_2=np.full((config.l_irs, config.k_users), float(value)),
                           beta_1=pathloss.beta_1)
    return pathloss


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _reduce_trials(chunks: list) -> np.ndarray:
    """Exact elementwise sum of per-trial accumulator rows in trial order.

    fsum over the full trial axis is correctly rounded, so the result is
    independent of how trials were split into chunks.
    """
    stacked = np.concatenate(chunks, axis=0)
    flat = stacked.reshape(stacked.shape[0], -1)
    out = np.array([math.fsum(flat[:, i].tolist()) for i in range(flat.shape[1])])
    return out.reshape(stacked.shape[1:])


def _chunk_size(trials: int, s_eff: int, m_bs: int, k_users: int) -> int:
    # bound the per-chunk noise block to ~2e6 complex entries (~32 MB)
    budget = int(2.0e6 // max(1, s_eff * m_bs * k_users))
    return max(16, min(trials, max(budget, 16), 2048))


def _trial_rng(master_seed: int, protocol_idx: int, cell_salt: int,
               trial: int) -> np.random.Generator:
    """The stream owned by one trial; derivable without serial dependence."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(protocol_idx, cell_salt, trial))
    return np.random.Generator(np.random.Philox(seq))


def _simulate_cell(cfg: SystemConfig, protocol: str, pathloss: PathLossSet,
                   trials: int, master_seed: int, cell_salt: int) -> dict:
    """Run all trials of one (cell, protocol) and return accumulator sums."""
    backend = get_backend()
    m_bs, n_el, l_irs, k_users = cfg.m_bs, cfg.n_elements, cfg.l_irs, cfg.k_users
    s = cfg.s_subphases
    nl = n_el * l_irs

    geometry = build_geometry(cfg)
    h_1 = np.empty((l_irs, m_bs, n_el), dtype=np.complex128)
    for li in range(l_irs):
        h_1[li] = build_los_matrix(float(geometry.d_bs_irs[li]),
                                   float(geometry.aod_azimuth[li]),
                                   float(geometry.aoa_azimuth[li]),
                                   float(pathloss.beta_1[li]), cfg)
    h1_cols = h_1.transpose(1, 0, 2).reshape(m_bs, nl)
    h1_t = np.ascontiguousarray(h1_cols.T)
    beta1_col = np.repeat(pathloss.beta_1, n_el)

    v_tr = build_training_matrix(s, n_el, l_irs)
    w = np.ascontiguousarray(v_tr[:, 1:])
    v_h = np.ascontiguousarray(v_tr.conj().T)

    r_bs = exp_correlation(m_bs, cfg.eta_bs)
    r_irs = exp_correlation(n_el, cfg.eta_irs)
    r_bs_sqrt = matrix_sqrt(r_bs)
    r_irs_sqrt = matrix_sqrt(r_irs)

    sigma_eff = math.sqrt(cfg.sigma2 / (cfg.p_tx * cfg.tau_s))
    denom = s * cfg.p_tx * cfg.tau_s
    gamma_d = cfg.sigma2 / denom

    filt_d = np.empty((k_users, m_bs, m_bs), dtype=np.complex128)
    for ki in range(k_users):
        filt_d[ki] = mmse_filter(float(pathloss.beta_d[ki]), r_bs, gamma_d)

    if protocol == "proposed":
        gamma_l = cfg.sigma2 / (pathloss.beta_1 * denom * m_bs)
        filt_irs = np.empty((l_irs, k_users, n_el, n_el), dtype=np.complex128)
        for li in range(l_irs):
            for ki in range(k_users):
                filt_irs[li, ki] = mmse_filter(float(pathloss.beta_2[li, ki]),
                                               r_irs, float(gamma_l[li]))
    else:
        # per-column scalar gains of the rank-one cascaded filter; the
        # exponential model has unit-diagonal correlation, so the prior
        # variance of element n is just beta_2
        c_casc = pathloss.beta_2 / (gamma_d + pathloss.beta_2 * pathloss.beta_1[:, None] * m_bs)

    protocol_idx = PROTOCOLS.index(protocol)
    sums_d, sums_irs, sums_casc = [], [], []
    done = 0
    chunk = _chunk_size(trials, s, m_bs, k_users)
    while done < trials:
        c = min(chunk, trials - done)
        z_d = np.empty((c, k_users, m_bs), dtype=np.complex128)
        z_2 = np.empty((c, l_irs, k_users, n_el), dtype=np.complex128)
        noise = np.empty((c, k_users, s, m_bs), dtype=np.complex128)
        for i in range(c):
            rng = _trial_rng(master_seed, protocol_idx, cell_salt, done + i)
            z_d[i] = _complex_normal(rng, (k_users, m_bs))
            z_2[i] = _complex_normal(rng, (l_irs, k_users, n_el))
            noise[i] = _complex_normal(rng, (k_users, s, m_bs))
        h_d = np.sqrt(pathloss.beta_d)[None, :, None] * (z_d @ r_bs_sqrt.T)
        h_2 = np.sqrt(pathloss.beta_2)[None, :, :, None] * (z_2 @ r_irs_sqrt.T)
        h_2k = np.ascontiguousarray(h_2.transpose(0, 2, 1, 3)).reshape(c, k_users, nl)
        if protocol == "proposed":
            acc_d, acc_irs = backend.proposed_cell(
                w, v_h, h1_t, beta1_col, h_d, h_2k, noise, sigma_eff,
                filt_d, filt_irs, n_el)
        else:
            acc_d, acc_casc, acc_irs = backend.benchmark_cell(
                w, v_h, h1_t, beta1_col, h_d, h_2k, noise, sigma_eff,
                filt_d, c_casc, n_el)
            sums_casc.append(acc_casc)
        sums_d.append(acc_d)
        sums_irs.append(acc_irs)
        done += c
    out = {"direct": _reduce_trials(sums_d), "irs_link": _reduce_trials(sums_irs)}
    if protocol == "benchmark":
        out["cascaded"] = _reduce_trials(sums_casc)
    else:
        # the cascaded matrix built from per-element estimates scales every
        # element error by the same rank-one column energy, so its NMSE
        # coincides with the element NMSE per (IRS, user)
        out["cascaded"] = out["irs_link"]
    return out


def _mean_ratio(acc: np.ndarray) -> tuple[float, float]:
    """Mean over leading cells of per-cell error/signal ratios, for both
    estimator columns. acc: (..., 3)."""
    flat = acc.reshape(-1, 3)
    ls = float(np.mean(flat[:, 0] / flat[:, 2]))
    mm = float(np.mean(flat[:, 1] / flat[:, 2]))
    return ls, mm


def _closed_forms(cfg: SystemConfig, pathloss: PathLossSet, kind: str,
                  protocol: str) -> dict:
    """Mean closed-form NMSE per estimator for one row group, or None."""
    s = cfg.s_subphases
    common = dict(sigma2=cfg.sigma2, s_subphases=s, p_tx=cfg.p_tx, tau_s=cfg.tau_s)
    gamma_d = cfg.sigma2 / (s * cfg.p_tx * cfg.tau_s)
    if kind == "direct":
        ls = float(np.mean([nmse_closed("direct", "ls", beta_d=float(b), **common)
                            for b in pathloss.beta_d]))
        if cfg.eta_bs == 0.0:
            mm = float(np.mean([nmse_closed("direct", "mmse", beta_d=float(b), **common)
                                for b in pathloss.beta_d]))
        else:
            lam = np.linalg.eigvalsh(exp_correlation(cfg.m_bs, cfg.eta_bs))
            mm = float(np.mean([nmse_closed_correlated(float(b), lam, gamma_d)
                                for b in pathloss.beta_d]))
        return {"ls": ls, "mmse": mm}
    if kind == "irs_link":
        pairs = [(float(pathloss.beta_1[li]), float(pathloss.beta_2[li, ki]))
                 for li in range(cfg.l_irs) for ki in range(cfg.k_users)]
        ls = float(np.mean([nmse_closed("irs_link", "ls", m_bs=cfg.m_bs,
                                        beta_1=b1, beta_2=b2, **common)
                            for b1, b2 in pairs]))
        if cfg.eta_irs == 0.0 or protocol == "benchmark":
            # benchmark recovery is per-element scalar shrinkage, so the
            # identity-correlation formula holds marginally for any eta
            mm = float(np.mean([nmse_closed("irs_link", "mmse", m_bs=cfg.m_bs,
                                            beta_1=b1, beta_2=b2, **common)
                                for b1, b2 in pairs]))
        else:
            lam = np.linalg.eigvalsh(exp_correlation(cfg.n_elements, cfg.eta_irs))
            mm = float(np.mean([nmse_closed_correlated(b2, lam, gamma_d / (b1 * cfg.m_bs))
                                for b1, b2 in pairs]))
        return {"ls": ls, "mmse": mm}
    return {"ls": None, "mmse": None}


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """Execute the experiment and return (and optionally persist) all rows."""
    rows: list[ResultRow] = []
    eta_contexts: Sequence = spec.eta_values if spec.eta_values is not None else (None,)
    for cell_idx, sval in enumerate(spec.sweep_values):
        cfg_cell_base = _cell_config(spec.config, spec.sweep_name, sval)
        for eta_ctx in eta_contexts:
            cfg_cell = (cfg_cell_base if eta_ctx is None
                        else cfg_cell_base.replace(eta_bs=eta_ctx, eta_irs=eta_ctx))
            for protocol in (p for p in PROTOCOLS if p in spec.protocols):
                s_min = min_subphases(cfg_cell.n_elements, cfg_cell.l_irs,
                                      cfg_cell.m_bs, protocol)
                s_eff = max(cfg_cell.s_subphases, s_min)
                if s_eff != cfg_cell.s_subphases:
                    logger.info("auto-raising S from %d to protocol minimum %d (%s, %s=%g)",
                                cfg_cell.s_subphases, s_eff, protocol, spec.sweep_name, sval)
                cfg_run = cfg_cell.replace(s_subphases=s_eff)
                pathloss = _cell_pathloss(cfg_run, spec.sweep_name, sval)
                cell_salt = 0 if spec.sweep_name == "eta" else cell_idx
                sums = _simulate_cell(cfg_run, protocol, pathloss, spec.trials,
                                      spec.master_seed, cell_salt)
                for kind in CHANNEL_KIND_ORDER:
                    closed = _closed_forms(cfg_run, pathloss, kind, protocol)
                    emp = dict(zip(("ls", "mmse"), _mean_ratio(sums[kind])))
                    for est in ESTIMATOR_ORDER:
                        nmse_emp = emp[est]
                        fom = (figure_of_merit(nmse_emp, s_eff, cfg_run.tau_s)
                               if nmse_emp > 0 else None)
                        rows.append(ResultRow(
                            sweep_name=spec.sweep_name, sweep_value=float(sval),
                            protocol=protocol, channel_kind=kind, estimator_kind=est,
                            nmse_empirical=nmse_emp, nmse_closed=closed[est],
                            fom=fom, trials=spec.trials, seed=spec.master_seed,
                            eta=cfg_run.eta_irs, s_effective=s_eff,
                            tau_c=s_eff * cfg_run.tau_s))
    if spec.out_path is not None:
        write_csv(rows, spec.out_path)
    return rows


def compare_protocols(spec: ExperimentSpec) -> list[ResultRow]:
    """Protocol-comparison experiment: both protocols over an IRS-count sweep."""
    if set(spec.protocols) != set(PROTOCOLS):
        raise ConfigError("compare_protocols needs both protocols enabled")
    if spec.sweep_name != "L":
        raise ConfigError("compare_protocols sweeps the IRS count")
    return run_experiment(spec)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.12e" % value
    return str(value)


def write_csv(rows: list, path) -> None:
    """Persist rows in the fixed schema (UTF-8, '.' decimal, LF endings)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(getattr(row, name)) for name in CSV_HEADER) + "\n")


def preset_spec(experiment: str, config: SystemConfig, trials: int,
                master_seed: int, out_path=None,
                sweep_override: tuple | None = None) -> ExperimentSpec:
    """Named experiment presets behind the CLI.

    fig2a: NMSE vs noise power at the reference configuration, uncorrelated
    plus an eta = 0.95 overlay. fig2b / fig2c: NMSE vs direct / IRS-user
    path loss. fig3 and table1: proposed-vs-benchmark comparison over the
    IRS count at a noise level that puts the benchmark's figure of merit
    in its documented operating band. custom: caller supplies the sweep.
    """
    base = dict(config=config, trials=trials, master_seed=master_seed, out_path=out_path)
    if experiment == "fig2a":
        spec = ExperimentSpec(sweep_name="sigma2",
                              sweep_values=tuple(np.logspace(-18.5, -12.5, 10)),
                              eta_values=(0.0, 0.95), **base)
    elif experiment == "fig2b":
        spec = ExperimentSpec(sweep_name="beta_d",
                              sweep_values=tuple(np.logspace(-13.0, -7.0, 10)),
                              eta_values=(0.0,), **base)
    elif experiment == "fig2c":
        spec = ExperimentSpec(sweep_name="beta_2",
                              sweep_values=tuple(np.logspace(-7.0, -1.0, 10)),
                              eta_values=(0.0,), **base)
    elif experiment in ("fig3", "table1"):
        base["config"] = config.replace(sigma2=4e-23)
        spec = ExperimentSpec(sweep_name="L", sweep_values=(2, 6, 8, 10),
                              protocols=PROTOCOLS, eta_values=(0.0,), **base)
    elif experiment == "custom":
        if sweep_override is None:
            raise ConfigError("custom experiment requires an explicit sweep")
        name, values = sweep_override
        spec = ExperimentSpec(sweep_name=name, sweep_values=tuple(values),
                              protocols=PROTOCOLS, **base)
    else:
        raise ConfigError(f"unknown experiment {experiment!r}")
    if sweep_override is not None and experiment != "custom":
        name, values = sweep_override
        spec = replace(spec, sweep_name=name, sweep_values=tuple(values))
    return spec
