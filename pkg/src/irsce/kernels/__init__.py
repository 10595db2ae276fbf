"""Batched Monte-Carlo kernels in two interchangeable implementations.

Both backends expose the same two functions:

    proposed_cell(w, v_h, h1_t, beta1_col, h_d, h_2k, noise, sigma_eff,
                  filt_d, filt_irs, n_el) -> (acc_d, acc_irs)
    benchmark_cell(w, v_h, h1_t, beta1_col, h_d, h_2k, noise, sigma_eff,
                   filt_d, c_casc, n_el) -> (acc_d, acc_casc, acc_irs)

taking pre-drawn, pre-colored per-trial inputs and returning per-trial
accumulator rows (columns: LS squared error, MMSE squared error, squared
signal norm). Keeping outputs per-trial makes the final reduction a fixed
ordered sum, so results do not depend on thread count or backend
scheduling.

Backend selection: the IRSCE_BACKEND environment variable ("numpy",
"numba", or "auto"; default auto = numba when importable, else numpy),
overridable at runtime with set_backend().
"""

from __future__ import annotations

import importlib
import os

_VALID = ("auto", "numpy", "numba")
_active = None
_active_name = None


def _import_backend(name: str):
    return importlib.import_module(f".{name}_backend", __name__)


def available_backends() -> tuple[str, ...]:
    names = ["numpy"]
    try:
        _import_backend("numba")
        names.insert(0, "numba")
    except ImportError:
        pass
    return tuple(names)


def set_backend(name: str):
    """Select the kernel backend; returns the backend module."""
    global _active, _active_name
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "auto":
        try:
            _active = _import_backend("numba")
            _active_name = "numba"
        except ImportError:
            _active = _import_backend("numpy")
            _active_name = "numpy"
    else:
        _active = _import_backend(name)
        _active_name = name
    return _active


def get_backend():
    """The active backend module, initializing from IRSCE_BACKEND on first use."""
    if _active is None:
        requested = os.environ.get("IRSCE_BACKEND", "auto").strip().lower()
        if requested not in _VALID:
            raise ValueError(
                f"IRSCE_BACKEND must be one of {_VALID}, got {requested!r}")
        set_backend(requested)
    return _active


def active_backend_name() -> str:
    get_backend()
    return _active_name
