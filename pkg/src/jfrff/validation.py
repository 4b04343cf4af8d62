"""Input validation helpers shared across the library.

Every public entry point funnels array arguments through these functions so
shape and finiteness errors read the same everywhere.
"""

from __future__ import annotations

import numpy as np


def as_float_matrix(x, name: str) -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_complex_matrix(x, name: str) -> np.ndarray:
    """Coerce to a finite 2-D complex128 array."""
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_square(a: np.ndarray, name: str) -> np.ndarray:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def as_signal_matrix(x, name: str) -> np.ndarray:
    """Coerce to a real (N, D) sample; used for single time-vertex frames."""
    return as_float_matrix(x, name)


def as_sample_batch(x, name: str) -> np.ndarray:
    """Coerce to a real (M, N, D) stack of time-vertex frames.

    A single (N, D) frame is promoted to a batch of one.
    """
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 2:
        a = a[np.newaxis]
    if a.ndim != 3:
        raise ValueError(f"{name} must have shape (M, N, D), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_fraction_order(value, name: str) -> float:
    """Validate a real fractional order (alpha or beta)."""
    v = float(value)
    if not np.isfinite(v):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return v


def check_positive_int(value, name: str) -> int:
    v = int(value)
    if v <= 0:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return v
