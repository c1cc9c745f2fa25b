"""Input validation helpers shared across the package."""

import numpy as np


def as_float_array(values, name="values"):
    """Coerce to a 1-d float64 array and reject non-finite entries."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def as_paired_array(X):
    """Coerce to an (n, 2) float64 array of paired observations, n >= 2."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected an array of shape (n, 2)")
    if arr.shape[0] < 2:
        raise ValueError("need at least 2 observations")
    if not np.all(np.isfinite(arr)):
        raise ValueError("observations must be finite")
    return arr


def check_bandwidth(h, name="h"):
    """Require a bandwidth strictly inside (0, 1)."""
    h = float(h)
    if not 0.0 < h < 1.0:
        raise ValueError("bandwidth out of range")
    return h


def check_open_unit(value, name):
    """Require a scalar strictly inside (0, 1)."""
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1)")
    return value


def check_closed_unit(value, name):
    """Require a scalar in [0, 1]."""
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1]")
    return value
