"""Small input validation helpers shared by the estimators and configs."""

import math
import numbers

import numpy as np


def check_open_unit(value, name):
    """Return ``value`` as float, requiring 0 < value < 1."""
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in the open interval (0, 1), got {value!r}")
    return value


def check_positive(value, name, integer=False):
    """Return ``value`` if strictly positive (and integral when requested)."""
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a number, got {type(value).__name__}")
    if integer and not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return int(value) if integer else float(value)


def check_item_id(value, name="item"):
    if not isinstance(value, str) or value == "":
        raise ValueError(f"{name} must be a non-empty string, got {value!r}")
    return value


def check_simplex_point(x, name="distribution", atol=1e-9):
    """Validate a probability vector and return it as a float ndarray.

    Parameters
    ----------
    x : array_like of shape (n,)
        Candidate probability vector.
    atol : float
        Allowed absolute deviation of ``sum(x)`` from one.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError(f"{name} must have finite nonnegative coordinates")
    if abs(arr.sum() - 1.0) > atol:
        raise ValueError(f"{name} must sum to 1 (got {arr.sum()!r})")
    return arr
