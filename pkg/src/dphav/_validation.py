"""Input validation helpers shared by the public functions and estimators."""

import numbers

import numpy as np


def check_nonnegative(value, name):
    """Return ``value`` as a float, raising ``ValueError`` if negative or not finite."""
    if not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite number >= 0, got {value!r}")
    return value


def check_efficiency(eta):
    eta = check_nonnegative(eta, "eta")
    if eta > 1:
        raise ValueError(f"eta must lie in [0, 1], got {eta!r}")
    return eta


def check_count(value, name, minimum=0):
    """Return ``value`` as a Python int >= ``minimum``."""
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_probabilities(probs, name="probs", atol=1e-8):
    """Validate a 1-D probability vector and return it as a float array.

    Entries must be non-negative (down to ``-atol``) and sum to one within ``atol``.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array")
    if not np.all(np.isfinite(probs)):
        raise ValueError(f"{name} contains non-finite entries")
    if probs.min() < -atol:
        raise ValueError(f"{name} has negative entries (min {probs.min():.3g})")
    total = probs.sum()
    if abs(total - 1.0) > atol:
        raise ValueError(f"{name} sums to {total:.12g}, expected 1")
    return probs


def check_records(records):
    """Return shot records as an ``(n, 2)`` int64 array of ``(m1, m2)`` pairs."""
    arr = np.asarray(records)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"records must have shape (n_shots, 2), got {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("records must hold integer photon counts")
    arr = arr.astype(np.int64, copy=False)
    if arr.size and arr.min() < 0:
        raise ValueError("photon counts must be non-negative")
    return arr
