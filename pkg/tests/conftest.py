"""Shared helpers: configurable small systems and one full synthesis pass."""

import math

import numpy as np
import pytest

from irsce import (build_correlation, build_geometry, build_pathloss,
                   reference_config, synthesize_channels)


def make_config(m=8, n=32, l=4, k=4, s=17, **overrides):
    """Reference config with resized dimensions; IRSs on a 100 m circle."""
    irs = tuple((100.0 * math.cos(2 * math.pi * i / l),
                 100.0 * math.sin(2 * math.pi * i / l)) for i in range(l))
    return reference_config(m_bs=m, n_elements=n, l_irs=l, k_users=k,
                            s_subphases=s, irs_positions=irs,
                            user_positions=(), **overrides)


def draw_system(cfg, seed=0):
    """Geometry, path loss, correlation, and one channel realization."""
    geo = build_geometry(cfg)
    pl = build_pathloss(geo)
    corr = build_correlation(cfg)
    ch = synthesize_channels(cfg, geo, pl, corr, np.random.default_rng(seed))
    return geo, pl, corr, ch


@pytest.fixture()
def reference_system():
    cfg = reference_config()
    return (cfg,) + draw_system(cfg)
