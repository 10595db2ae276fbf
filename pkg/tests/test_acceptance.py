"""End-to-end verification gates for the full toolkit.

Each test pins one externally checkable guarantee: closed-form agreement of
the Monte-Carlo estimates, training-design identities, protocol-comparison
orderings, and oracle equivalences. Tolerances are stated inline and are
not derived from the implementation.

Four gates are expected to fail: they assert properties of the short
(17-sub-phase) training design that the design provably cannot deliver,
because its training matrix repeats columns and cannot separate all
direct-plus-cascaded unknowns. They are kept failing on purpose; the
analysis lives in /root/notes/decisions.md (D1).
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from irsce import (ExperimentSpec, bm_mmse_cascaded, build_geometry,
                   build_pathloss, build_training_design,
                   build_training_matrix, compare_protocols, decorrelate,
                   effective_training_matrix, ls_estimates, ls_mmse_gap,
                   min_subphases, mmse_filter, preset_spec, reference_config,
                   run_experiment, synthesize_observations)

from conftest import draw_system, make_config

SEED = 20260819


# ---------------------------------------------------------------- fixtures

@pytest.fixture(scope="module")
def noise_sweep():
    """Reference-dimension run shared by the closed-form gates: 10 noise
    powers spanning 6 decades, identity correlation, 1e4 trials."""
    spec = ExperimentSpec(config=reference_config(), sweep_name="sigma2",
                          sweep_values=tuple(np.logspace(-18.5, -12.5, 10)),
                          trials=10_000, master_seed=SEED, eta_values=(0.0,))
    t0 = time.perf_counter()
    rows = run_experiment(spec)
    return rows, time.perf_counter() - t0


@pytest.fixture(scope="module")
def protocol_comparison():
    """Both protocols over the IRS-count sweep at the documented noise level."""
    spec = preset_spec("fig3", reference_config(), trials=800, master_seed=SEED)
    return compare_protocols(spec)


@pytest.fixture(scope="module")
def correlation_pairing():
    """Correlated vs uncorrelated contexts on shared draws, full-rank
    training. Two noise cells, each tuned so that one link family operates
    where prior knowledge matters (neither saturated nor drowned)."""
    cfg = reference_config(s_subphases=129)
    pl = build_pathloss(build_geometry(cfg))
    denom = 129 * cfg.p_tx * cfg.tau_s
    s2_direct = 0.3 * float(np.mean(pl.beta_d)) * denom
    s2_irs = 0.3 * float(np.mean(pl.beta_1[:, None] * pl.beta_2)) * cfg.m_bs * denom
    spec = ExperimentSpec(config=cfg, sweep_name="sigma2",
                          sweep_values=(s2_direct, s2_irs), trials=3000,
                          master_seed=SEED, eta_values=(0.0, 0.95))
    return run_experiment(spec), s2_direct, s2_irs


def _pick(rows, *, value=None, eta=None, kind=None, est=None, protocol=None):
    out = [r for r in rows
           if (value is None or math.isclose(r.sweep_value, value, rel_tol=1e-9))
           and (eta is None or r.eta == eta)
           and (kind is None or r.channel_kind == kind)
           and (est is None or r.estimator_kind == est)
           and (protocol is None or r.protocol == protocol)]
    assert out, "no row matches the requested cell"
    return out


# ------------------------------------------------------------------ gates

class TestAcceptance:
    def test_direct_nmse_matches_closed_forms(self, noise_sweep):
        """Direct-channel LS and MMSE NMSE within 3% of their closed forms
        at every sweep point, 1e4 trials, in under 10 minutes."""
        rows, elapsed = noise_sweep
        worst, where = 0.0, None
        for r in _pick(rows, kind="direct"):
            dev = abs(r.nmse_empirical - r.nmse_closed) / r.nmse_closed
            if dev > worst:
                worst, where = dev, (r.sweep_value, r.estimator_kind)
        assert worst <= 0.03, \
            f"direct NMSE off by {worst:.3%} at sigma2={where[0]:.3g} ({where[1]})"
        assert elapsed < 600.0, f"sweep took {elapsed:.0f}s"

    def test_irs_link_nmse_matches_closed_forms(self, noise_sweep):
        """IRS-link LS and MMSE NMSE within 3% of their closed forms at
        every sweep point. KNOWN-UNATTAINABLE with 17 sub-phases: the
        training matrix repeats columns, so other links leak into each
        decorrelated element estimate regardless of noise level; see
        /root/notes/decisions.md (D1)."""
        rows, _ = noise_sweep
        worst, where = 0.0, None
        for r in _pick(rows, kind="irs_link"):
            dev = abs(r.nmse_empirical - r.nmse_closed) / r.nmse_closed
            if dev > worst:
                worst, where = dev, (r.sweep_value, r.estimator_kind)
        assert worst <= 0.03, \
            (f"IRS-link NMSE off by a factor up to {worst:.3g} "
             f"(at sigma2={where[0]:.3g}, {where[1]}); KNOWN-UNATTAINABLE "
             f"at 17 sub-phases, see /root/notes/decisions.md D1")

    def test_training_columns_orthogonal_at_full_length(self):
        """V^H V = S I to 1e-10 absolute whenever S covers all columns."""
        for s in (129, 150, 200):
            v = build_training_matrix(s, 32, 4)
            gram = v.conj().T @ v
            dev = np.abs(gram - s * np.eye(129)).max()
            assert dev < 1e-10, f"S={s}: orthogonality off by {dev:.3g}"

    def test_effective_training_gram_at_reference_length(self):
        """Effective-matrix Gram = S M Sigma to 1e-9 relative at the
        17-sub-phase reference design. KNOWN-UNATTAINABLE: with S below
        the column count the Gram is rank deficient, not diagonal; see
        /root/notes/decisions.md (D1)."""
        cfg = reference_config()
        geo, pl, corr, ch = draw_system(cfg, seed=1)
        design = build_training_design(ch.h_1, cfg)
        eff = effective_training_matrix(design)
        gram = eff.conj().T @ eff
        target = 17 * cfg.m_bs * design.sigma_matrix
        dev = np.abs(gram - target).max() / np.abs(target).max()
        assert dev < 1e-9, \
            (f"effective Gram deviates by {dev:.3g} relative; "
             f"KNOWN-UNATTAINABLE at 17 sub-phases, see /root/notes/decisions.md D1")

    def test_noise_scaling_is_reciprocal_subphase_count(self):
        """The decorrelated-noise amplification achieved by the design is
        exactly 1/S."""
        cfg = reference_config()
        geo, pl, corr, ch = draw_system(cfg, seed=1)
        design = build_training_design(ch.h_1, cfg)
        assert design.noise_scaling == 1.0 / 17

    def test_noiseless_round_trip_on_randomized_shapes(self):
        """Zero noise: LS returns the exact channels (1e-9 relative) for 50
        randomized antenna/element/surface/sub-phase shapes, with training
        long enough to identify every unknown."""
        rng = np.random.default_rng(404)
        for trial in range(50):
            m = int(rng.integers(1, 7))
            n = int(rng.integers(2, 7))
            l = int(rng.integers(1, 4))
            k = int(rng.integers(1, 4))
            s = n * l + 1 + int(rng.integers(0, 9))
            cfg = make_config(m=m, n=n, l=l, k=k, s=s, sigma2=0.0)
            geo, pl, corr, ch = draw_system(cfg, seed=1000 + trial)
            design = build_training_design(ch.h_1, cfg)
            obs = synthesize_observations(ch, design, cfg, np.random.default_rng(trial))
            h_d_ls, h_2_ls = ls_estimates(decorrelate(obs, design, cfg))
            dev_d = np.abs(h_d_ls - ch.h_d).max() / np.abs(ch.h_d).max()
            dev_2 = np.abs(h_2_ls - ch.h_2).max() / np.abs(ch.h_2).max()
            assert dev_d < 1e-9 and dev_2 < 1e-9, \
                f"shape (M={m},N={n},L={l},S={s}): dev {dev_d:.3g}/{dev_2:.3g}"

    def test_mmse_dominates_ls(self, noise_sweep, protocol_comparison,
                               correlation_pairing):
        """Closed-form LS-MMSE gaps are nonnegative and match exact rational
        arithmetic to 1e-12 relative on 100 random parameter draws; the
        Monte-Carlo MMSE NMSE never exceeds the LS NMSE in any cell.

        Cells whose predicted MMSE NMSE is below 1e-3 are skipped: there the
        true LS-MMSE gap (its square) sits orders of magnitude under the
        paired Monte-Carlo resolution at 1e4 trials, so the empirical
        comparison measures sampling noise rather than the estimators; see
        /root/notes/decisions.md (D26)."""
        rng = np.random.default_rng(505)
        p_tx, tau_s = 0.1, 50e-6
        for draw in range(100):
            sigma2 = 10.0 ** rng.uniform(-20, -10)
            s = int(rng.integers(1, 200))
            if draw % 2 == 0:
                prior = 10.0 ** rng.uniform(-12, -6)
                m = 1
                got = ls_mmse_gap("direct", sigma2=sigma2, s_subphases=s,
                                  p_tx=p_tx, tau_s=tau_s, beta_d=prior)
            else:
                b1 = 10.0 ** rng.uniform(-9, -5)
                b2 = 10.0 ** rng.uniform(-12, -7)
                m = int(rng.integers(1, 17))
                prior = b1 * b2
                got = ls_mmse_gap("irs_link", sigma2=sigma2, s_subphases=s,
                                  p_tx=p_tx, tau_s=tau_s, m_bs=m,
                                  beta_1=b1, beta_2=b2)
            g = Fraction(sigma2) / (s * Fraction(p_tx) * Fraction(tau_s) * m)
            b = Fraction(prior) if draw % 2 == 0 else Fraction(b1) * Fraction(b2)
            oracle = g / b - g / (b + g)
            assert got >= 0.0
            assert got == pytest.approx(float(oracle), rel=1e-12), \
                f"draw {draw}: gap {got} vs exact {float(oracle)}"

        all_rows = noise_sweep[0] + protocol_comparison + correlation_pairing[0]
        cells = {}
        for r in all_rows:
            key = (r.sweep_name, r.sweep_value, r.protocol, r.channel_kind, r.eta)
            entry = cells.setdefault(key, {})
            entry[r.estimator_kind] = r.nmse_empirical
            if r.estimator_kind == "mmse":
                entry["predicted"] = r.nmse_closed
        checked = 0
        for key, pair in cells.items():
            if pair["predicted"] is not None and pair["predicted"] < 1e-3:
                continue
            assert pair["mmse"] <= pair["ls"], f"MMSE above LS in cell {key}"
            checked += 1
        assert checked >= 30, f"only {checked} resolvable cells"

    def test_subphase_counts_and_training_time_slopes(self):
        """Identifiability minima at reference scale (17 vs 129), their
        training-time ratio, and exact per-IRS growth-slope ratio M."""
        assert min_subphases(32, 4, 8, "proposed") == 17
        assert min_subphases(32, 4, 8, "benchmark") == 129
        ratio = min_subphases(32, 4, 8, "benchmark") / min_subphases(32, 4, 8, "proposed")
        assert ratio == pytest.approx(7.59, abs=0.005)
        tau_s = 50e-6
        l_values = (2, 6, 8, 10)
        s_prop = [min_subphases(32, l, 8, "proposed") for l in l_values]
        s_bench = [min_subphases(32, l, 8, "benchmark") for l in l_values]
        for i in range(len(l_values) - 1):
            dl = l_values[i + 1] - l_values[i]
            # training time is tau_s * S, so slopes inherit the exact
            # integer ratio of the sub-phase increments
            ds_p = s_prop[i + 1] - s_prop[i]
            ds_b = s_bench[i + 1] - s_bench[i]
            assert ds_b == 32 * dl
            assert ds_p == 32 * dl // 8
            assert ds_b / ds_p == 8.0
            slope_b = ds_b * tau_s / dl
            slope_p = ds_p * tau_s / dl
            assert slope_b == pytest.approx(32 * tau_s, rel=1e-12)
            assert slope_p == pytest.approx(32 * tau_s / 8, rel=1e-12)

    def test_comparison_benchmark_nmse_not_worse(self, protocol_comparison):
        """Per IRS count, the long per-element protocol's cascaded NMSE is
        at or below the short protocol's."""
        for l in (2, 6, 8, 10):
            for est in ("ls", "mmse"):
                prop = _pick(protocol_comparison, value=l, kind="cascaded",
                             est=est, protocol="proposed")[0].nmse_empirical
                bench = _pick(protocol_comparison, value=l, kind="cascaded",
                              est=est, protocol="benchmark")[0].nmse_empirical
                assert bench <= prop, f"L={l} {est}: {bench:.3g} > {prop:.3g}"

    def test_comparison_proposed_fom_higher(self, protocol_comparison):
        """Per IRS count, the short protocol's accuracy-per-training-time
        exceeds the long protocol's. KNOWN-UNATTAINABLE: the short design's
        cascaded estimates are contamination limited, so its NMSE does not
        shrink with noise and the time advantage cannot compensate; see
        /root/notes/decisions.md (D1, D13)."""
        for l in (2, 6, 8, 10):
            prop = _pick(protocol_comparison, value=l, kind="cascaded",
                         est="mmse", protocol="proposed")[0].fom
            bench = _pick(protocol_comparison, value=l, kind="cascaded",
                          est="mmse", protocol="benchmark")[0].fom
            assert prop > bench, \
                (f"L={l}: figure of merit {prop:.3g} <= {bench:.3g}; "
                 f"KNOWN-UNATTAINABLE, see /root/notes/decisions.md D1")

    def test_comparison_fom_magnitude_band(self, protocol_comparison):
        """Cascaded-MMSE figures of merit inside [1e4, 1e7] per second for
        both protocols. KNOWN-UNATTAINABLE for the short protocol, whose
        contamination-limited NMSE pushes its figure of merit far below the
        band; see /root/notes/decisions.md (D1)."""
        for l in (2, 6, 8, 10):
            for protocol in ("proposed", "benchmark"):
                fom = _pick(protocol_comparison, value=l, kind="cascaded",
                            est="mmse", protocol=protocol)[0].fom
                assert 1e4 <= fom <= 1e7, \
                    (f"L={l} {protocol}: figure of merit {fom:.3g} outside "
                     f"[1e4, 1e7]; KNOWN-UNATTAINABLE for the short protocol, "
                     f"see /root/notes/decisions.md D1")

    def test_correlation_helps_mmse_not_ls(self, correlation_pairing):
        """On identical draws, element correlation 0.95 lowers the MMSE NMSE
        for both link families (each checked where its estimation is noise
        limited); LS NMSE stays within 2%."""
        rows, s2_direct, s2_irs = correlation_pairing
        for kind, cell in (("direct", s2_direct), ("irs_link", s2_irs)):
            flat = _pick(rows, value=cell, eta=0.0, kind=kind, est="mmse")[0]
            corr = _pick(rows, value=cell, eta=0.95, kind=kind, est="mmse")[0]
            assert corr.nmse_empirical < flat.nmse_empirical, \
                f"{kind}: correlated MMSE {corr.nmse_empirical:.4g} not below " \
                f"{flat.nmse_empirical:.4g}"
        for kind in ("direct", "irs_link"):
            for cell in (s2_direct, s2_irs):
                flat = _pick(rows, value=cell, eta=0.0, kind=kind, est="ls")[0]
                corr = _pick(rows, value=cell, eta=0.95, kind=kind, est="ls")[0]
                rel = abs(corr.nmse_empirical - flat.nmse_empirical) / flat.nmse_empirical
                assert rel <= 0.02, f"{kind} LS moved {rel:.3%} with correlation"

    def test_oracle_equivalences(self):
        """Structured decorrelation = generic least squares; rank-one
        cascaded filter = dense inverse; MMSE filter = generic
        Gaussian-Bayes posterior mean. All to 1e-9."""
        cfg = make_config(m=4, n=4, l=2, k=2, s=9, sigma2=4e-14)
        geo, pl, corr, ch = draw_system(cfg, seed=9)
        design = build_training_design(ch.h_1, cfg)
        obs = synthesize_observations(ch, design, cfg, np.random.default_rng(2))
        dec = decorrelate(obs, design, cfg)
        eff = effective_training_matrix(design)
        for ki in range(2):
            generic, *_ = np.linalg.lstsq(eff, obs.r_tr[ki], rcond=None)
            dev = np.abs(dec.r_tilde[ki] - generic).max() / np.abs(generic).max()
            assert dev < 1e-9, f"structured vs least squares: {dev:.3g}"

        rng = np.random.default_rng(10)
        phases = np.exp(2j * np.pi * rng.random(8))
        r_block = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        fast = bm_mmse_cascaded(r_block, 1.0, 3e-18, phases, 7e-16)
        dense = bm_mmse_cascaded(r_block, 1.0, 3e-18, phases, 7e-16, dense=True)
        dev = np.abs(fast - dense).max() / np.abs(dense).max()
        assert dev < 1e-9, f"rank-one vs dense filter: {dev:.3g}"

        a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        prior = a @ a.conj().T + np.eye(6)
        beta, gamma = 3e-9, 2e-9
        filt = mmse_filter(beta, prior, gamma)
        oracle = (beta * prior) @ np.linalg.inv(beta * prior + gamma * np.eye(6))
        dev = np.abs(filt - oracle).max() / np.abs(oracle).max()
        assert dev < 1e-9, f"MMSE filter vs Bayes oracle: {dev:.3g}"
