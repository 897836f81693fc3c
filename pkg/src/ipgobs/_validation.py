"""Input validation helpers.

All converters return float64 numpy arrays and raise ConfigurationError
with a message naming the offending argument, so estimator and functional
entry points share one validation path.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError


def as_vector(x, n, name):
    """Coerce ``x`` to a float vector of length ``n``."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0 and n == 1:
        v = v.reshape(1)
    if v.ndim != 1 or v.shape[0] != n:
        raise ConfigurationError(
            f"{name} must be a vector of length {n}, got shape {np.shape(x)}"
        )
    return v


def as_matrix(m, shape, name):
    """Coerce ``m`` to a float matrix of the given (rows, cols) shape."""
    a = np.asarray(m, dtype=float)
    if a.ndim == 0 and shape == (1, 1):
        a = a.reshape(1, 1)
    if a.shape != shape:
        raise ConfigurationError(
            f"{name} must have shape {shape}, got {np.shape(m)}"
        )
    return a


def as_vector_list(seq, width, name):
    """Coerce a sequence of vectors, each of length ``width``."""
    return [as_vector(v, width, f"{name}[{j}]") for j, v in enumerate(seq)]


def check_positive_int(value, name):
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_nonnegative_int(value, name):
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 0:
        raise ConfigurationError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)


def check_finite(arr, name):
    a = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    return a


def reject_unknown_keys(mapping, allowed, where):
    """Fail-closed key check for declarative config sections."""
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigurationError(
            f"unknown keys {unknown} in {where}; allowed: {sorted(allowed)}"
        )
