"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

import numbers
import os

import numpy as np

SEED_ENV = "SKEWFOLD_SEED"


def check_points(X, name: str = "X") -> np.ndarray:
    """Coerce ``X`` to a complex array of shape ``(n, 2)`` with finite entries."""
    arr = np.asarray(X, dtype=complex)
    if arr.ndim == 1 and arr.shape[0] == 2:
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n_points, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def check_eps(eps) -> float:
    eps = float(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return eps


def check_tol(tol) -> float:
    tol = float(tol)
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    return tol


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, numbers.Integral) or value <= 0:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_plan_index(value):
    if value is not None and value not in (0, 1):
        raise ValueError(f"plan_index must be 0 or 1, got {value!r}")
    return value


def resolve_seed(seed=None) -> int:
    """Explicit seed, else ``$SKEWFOLD_SEED``, else 0."""
    if seed is None:
        seed = os.environ.get(SEED_ENV, 0)
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must fit in 64 bits, got {seed}")
    return seed
