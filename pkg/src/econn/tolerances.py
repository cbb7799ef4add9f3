"""Tolerance tables for the two derivative back ends."""

import os

DUAL = "dual"
FD = "fd"
MODES = (DUAL, FD)

_TABLE = {
    DUAL: {
        "deriv_tol": 1e-10,
        "structure_tol": 1e-9,
        "assembly_tol": 1e-8,
        "accept_tol": 1e-6,
    },
    FD: {
        "deriv_tol": 1e-6,
        "structure_tol": 1e-9,
        "assembly_tol": 1e-5,
        "accept_tol": 1e-4,
    },
}

# operator solves above this condition number are refused
COND_LIMIT = 1e12


def default_mode():
    mode = os.environ.get("EC_DEFAULT_MODE", DUAL).strip().lower()
    if mode not in MODES:
        raise ValueError(f"EC_DEFAULT_MODE must be one of {MODES}, got {mode!r}")
    return mode


def tolerances(mode=None, overrides=None):
    """Return a fresh tolerance dict for ``mode`` with ``overrides`` applied."""
    mode = mode or default_mode()
    if mode not in _TABLE:
        raise ValueError(f"unknown derivative mode {mode!r}")
    tol = dict(_TABLE[mode])
    for key, value in (overrides or {}).items():
        if key not in tol:
            raise KeyError(f"unknown tolerance {key!r}; known: {sorted(tol)}")
        tol[key] = float(value)
    return tol
