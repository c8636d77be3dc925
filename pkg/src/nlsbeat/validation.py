"""Input validation helpers shared by the estimators and free functions."""
from __future__ import annotations

import numbers

import numpy as np


class ConfigurationError(ValueError):
    """Raised for invalid simulation or experiment parameters."""


def amplitudes_of(state) -> np.ndarray:
    """Return the complex amplitude vector of a state or array-like."""
    amps = getattr(state, "amplitudes", state)
    arr = np.asarray(amps, dtype=complex)
    if arr.ndim != 1 or arr.size % 2 != 1:
        raise ValueError(
            f"amplitudes must be a 1-d array of odd length 2N+1, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("amplitudes contain non-finite values")
    return arr


def truncation_of(state) -> int:
    return (amplitudes_of(state).size - 1) // 2


def check_states(X, N=None) -> np.ndarray:
    """Validate a batch of states, returning a 2-d complex array ``(n_samples, 2N+1)``."""
    if hasattr(X, "amplitudes"):
        X = [X]
    arr = np.asarray([amplitudes_of(x) for x in X]) if not isinstance(X, np.ndarray) else X
    arr = np.asarray(arr, dtype=complex)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] % 2 != 1:
        raise ValueError(f"expected states of shape (n_samples, 2N+1), got {arr.shape}")
    if N is not None and arr.shape[1] != 2 * N + 1:
        raise ValueError(f"states have truncation {(arr.shape[1] - 1) // 2}, expected N={N}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("states contain non-finite values")
    return arr


def check_scalar(x, name, target_type=numbers.Real, min_val=None, max_val=None,
                 include_min=True):
    """Thin wrapper in the spirit of ``sklearn.utils.check_scalar`` raising ConfigurationError."""
    if isinstance(x, bool) or not isinstance(x, target_type):
        raise ConfigurationError(f"{name} must be {target_type.__name__}, got {type(x).__name__}")
    if min_val is not None:
        if include_min and x < min_val:
            raise ConfigurationError(f"{name} == {x}, must be >= {min_val}")
        if not include_min and x <= min_val:
            raise ConfigurationError(f"{name} == {x}, must be > {min_val}")
    if max_val is not None and x > max_val:
        raise ConfigurationError(f"{name} == {x}, must be <= {max_val}")
    return x


def check_sign(sign) -> int:
    if sign not in (1, -1):
        raise ConfigurationError(f"sign must be +1 or -1, got {sign!r}")
    return int(sign)
