"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DomainError


def check_positive(value, name, strict=True):
    """Raise :class:`DomainError` unless ``value`` is a finite positive scalar."""
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise DomainError(f"{name} must be a finite real number, got {value!r}")
    if strict and value <= 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")
    if not strict and value < 0:
        raise DomainError(f"{name} must be >= 0, got {value!r}")
    return float(value)


def check_frequencies(freqs, name="frequencies", allow_zero=False):
    """Validate a frequency grid and return it as a 1-D float array.

    Accepts a scalar, a list, a 1-D array, or an ``(n, 1)`` column as
    produced by sklearn-style callers.
    """
    arr = np.asarray(freqs, dtype=float)
    if arr.ndim == 2:
        arr = check_array(arr, ensure_2d=True)
        if arr.shape[1] != 1:
            raise DomainError(f"{name} must be a single column, got shape {arr.shape}")
        arr = arr[:, 0]
    arr = np.atleast_1d(arr)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise DomainError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    if allow_zero:
        if np.any(arr < 0):
            raise DomainError(f"{name} must be >= 0")
    elif np.any(arr <= 0):
        raise DomainError(f"{name} must be > 0")
    return arr


def check_same_sampling(a, b):
    """Both time series must share sample rate and length."""
    if a.sample_rate != b.sample_rate:
        raise DomainError(
            f"sample rates differ: {a.sample_rate} Hz vs {b.sample_rate} Hz"
        )
    if len(a) != len(b):
        raise DomainError(f"series lengths differ: {len(a)} vs {len(b)}")
