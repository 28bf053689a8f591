"""Input validation helpers for the estimator layer."""

from __future__ import annotations

import numpy as np

__all__ = ["check_output_record", "check_positive", "check_fraction"]


def check_output_record(X) -> np.ndarray:
    """Coerce sampled output data to a finite (T, L) float array.

    Accepts a single channel as a 1-D array of length T or multiple
    channels as a (T, L) array.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError(f"expected a (T, L) output record, got shape {X.shape}")
    if X.shape[0] < 2:
        raise ValueError("an output record needs at least 2 samples")
    if not np.all(np.isfinite(X)):
        raise ValueError("output record contains non-finite values")
    return X


def check_positive(name: str, value) -> float:
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def check_fraction(name: str, value) -> float:
    value = float(value)
    if not 0 <= value < 1:
        raise ValueError(f"{name} must lie in [0, 1), got {value}")
    return value
