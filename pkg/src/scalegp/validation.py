"""Input validation helpers for points, observations and scalar parameters."""

from __future__ import annotations

import numbers

import numpy as np

__all__ = [
    "check_points",
    "check_vector",
    "check_unit_cube",
    "check_positive",
    "check_fraction",
]


def check_points(X, dim=None, name="X"):
    """Coerce ``X`` to a 2-d float array of shape (N, dim).

    Accepts a scalar (one 1-d point), a 1-d array (N points in d=1, or a
    single point when ``dim`` matches its length), or an (N, d) array.
    PointSet instances are unwrapped through their ``points`` attribute.

    Parameters
    ----------
    X : array-like or PointSet
        Points to validate.
    dim : int, optional
        Required ambient dimension. Inferred from the data when omitted.
    name : str
        Name used in error messages.

    Returns
    -------
    ndarray of shape (N, dim), dtype float64, all entries finite.
    """
    pts = getattr(X, "points", X)
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        if dim is not None and dim > 1 and arr.shape[0] == dim:
            arr = arr.reshape(1, dim)
        else:
            arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise ValueError(f"{name} must be at most 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} must contain at least one point")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"{name} has dimension {arr.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return arr


def check_vector(y, n=None, name="y"):
    """Coerce ``y`` to a finite 1-d float array, optionally of length ``n``."""
    arr = np.asarray(y, dtype=float).reshape(-1)
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_unit_cube(X, name="X"):
    """Require every coordinate of ``X`` to lie in [0, 1]."""
    if X.size and (X.min() < 0.0 or X.max() > 1.0):
        raise ValueError(f"{name} has coordinates outside the unit cube [0,1]^d")
    return X


def check_positive(value, name):
    """Require a finite scalar > 0 and return it as float."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ValueError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be positive and finite, got {value}")
    return value


def check_fraction(value, name, open_left=True, open_right=True):
    """Require a scalar in the unit interval; endpoints excluded by default."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ValueError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    low_ok = value > 0.0 if open_left else value >= 0.0
    high_ok = value < 1.0 if open_right else value <= 1.0
    if not (np.isfinite(value) and low_ok and high_ok):
        raise ValueError(f"{name} must lie in the unit interval, got {value}")
    return value
