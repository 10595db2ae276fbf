"""Time the Monte-Carlo kernels on a reference-sized workload per backend.

Runs the same pre-drawn chunk through the numpy and (if importable) numba
kernels and reports per-trial wall time plus the max relative deviation
between the two backends' accumulator outputs.

    python3 -m bench.compare_backends [--trials 2000] [--repeats 3]
"""

import argparse
import time

import numpy as np

import irsce.kernels as kernels
from irsce import (build_geometry, build_los_matrix, build_pathloss,
                   build_training_matrix, exp_correlation, matrix_sqrt,
                   mmse_filter, reference_config)
from irsce.kernels import numpy_backend


def _workload(trials: int, seed: int = 7):
    cfg = reference_config()
    m, n, l, k, s = cfg.m_bs, cfg.n_elements, cfg.l_irs, cfg.k_users, cfg.s_subphases
    nl = n * l
    geo = build_geometry(cfg)
    pl = build_pathloss(geo)

    h_1 = np.empty((l, m, n), dtype=np.complex128)
    for li in range(l):
        h_1[li] = build_los_matrix(float(geo.d_bs_irs[li]), float(geo.aod_azimuth[li]),
                                   float(geo.aoa_azimuth[li]), float(pl.beta_1[li]), cfg)
    h1_t = np.ascontiguousarray(h_1.transpose(1, 0, 2).reshape(m, nl).T)
    beta1_col = np.repeat(pl.beta_1, n)
    v_tr = build_training_matrix(s, n, l)
    w = np.ascontiguousarray(v_tr[:, 1:])
    v_h = np.ascontiguousarray(v_tr.conj().T)

    rng = np.random.default_rng(seed)

    def cn(shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    r_bs_sqrt = matrix_sqrt(exp_correlation(m, cfg.eta_bs))
    r_irs_sqrt = matrix_sqrt(exp_correlation(n, cfg.eta_irs))
    h_d = np.sqrt(pl.beta_d)[None, :, None] * (cn((trials, k, m)) @ r_bs_sqrt.T)
    h_2 = np.sqrt(pl.beta_2)[None, :, :, None] * (cn((trials, l, k, n)) @ r_irs_sqrt.T)
    h_2k = np.ascontiguousarray(h_2.transpose(0, 2, 1, 3)).reshape(trials, k, nl)
    noise = cn((trials, k, s, m))

    sigma_eff = np.sqrt(cfg.sigma2 / (cfg.p_tx * cfg.tau_s))
    gamma_d = cfg.sigma2 / (s * cfg.p_tx * cfg.tau_s)
    r_bs = exp_correlation(m, cfg.eta_bs)
    r_irs = exp_correlation(n, cfg.eta_irs)
    filt_d = np.stack([mmse_filter(float(b), r_bs, gamma_d) for b in pl.beta_d])
    gamma_l = cfg.sigma2 / (pl.beta_1 * s * cfg.p_tx * cfg.tau_s * m)
    filt_irs = np.empty((l, k, n, n), dtype=np.complex128)
    for li in range(l):
        for ki in range(k):
            filt_irs[li, ki] = mmse_filter(float(pl.beta_2[li, ki]), r_irs,
                                           float(gamma_l[li]))
    c_casc = pl.beta_2 / (gamma_d + pl.beta_2 * pl.beta_1[:, None] * m)
    common = (w, v_h, h1_t, beta1_col, h_d, h_2k, noise, sigma_eff, filt_d)
    return common, filt_irs, c_casc, n


def _time(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    common, filt_irs, c_casc, n_el = _workload(args.trials)
    rows = []
    baselines = {}
    for name in kernels.available_backends()[::-1]:   # numpy first as baseline
        backend = kernels.set_backend(name)
        # trigger compilation outside the timed region
        backend.proposed_cell(*common, filt_irs, n_el)
        backend.benchmark_cell(*common, c_casc, n_el)
        for label, fn in (("proposed", lambda: backend.proposed_cell(*common, filt_irs, n_el)),
                          ("benchmark", lambda: backend.benchmark_cell(*common, c_casc, n_el))):
            best, out = _time(fn, args.repeats)
            dev = 0.0
            if (label in baselines) and name != "numpy":
                for a, b in zip(baselines[label], out):
                    dev = max(dev, float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))))
            else:
                baselines[label] = out
            rows.append((name, label, best, best / args.trials * 1e6, dev))

    print(f"{args.trials} trials, reference dimensions (M=8, N=32, L=4, K=4, S=17)")
    print(f"{'backend':<8} {'kernel':<10} {'total s':>9} {'us/trial':>9} {'vs numpy':>10}")
    for name, label, best, per, dev in rows:
        devtxt = f"{dev:.1e}" if name != "numpy" else "-"
        print(f"{name:<8} {label:<10} {best:9.3f} {per:9.1f} {devtxt:>10}")
    kernels.set_backend("auto")


if __name__ == "__main__":
    main()
