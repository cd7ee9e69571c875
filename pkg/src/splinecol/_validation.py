"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def as_float_array(values, name, ndim=None):
    """Coerce ``values`` to a float64 ndarray, optionally checking ndim."""
    arr = np.asarray(values, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    return arr


def check_in_domain(u, lo, hi, name="parameter"):
    """Raise DomainError unless ``lo <= u <= hi``."""
    if not (lo <= u <= hi):
        raise DomainError(f"{name} {u!r} outside knot range [{lo}, {hi}]")


def as_point(theta, dim):
    """Coerce a parameter tuple/scalar to a 1-d float array of length ``dim``."""
    arr = np.atleast_1d(np.asarray(theta, dtype=float))
    if arr.shape != (dim,):
        raise ValueError(f"expected a parameter point of length {dim}, got shape {arr.shape}")
    return arr


def as_points(theta, dim):
    """Coerce points to shape (n, dim); a 1-d input is treated per ``dim``.

    For dim == 1 a flat array of parameters is accepted; for dim > 1 a single
    point may be given as a flat length-``dim`` array.
    """
    arr = np.asarray(theta, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None] if dim == 1 else arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"expected points of shape (n, {dim}), got {np.shape(theta)}")
    return arr


def check_positive_int(value, name, minimum=1):
    if int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
