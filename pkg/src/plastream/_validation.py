"""Input checks shared by the estimator front end."""

from __future__ import annotations

import math

import numpy as np
from sklearn.utils.validation import check_array, check_consistent_length

from .exceptions import BadParams, NonMonotonicTime


def check_epsilon(epsilon) -> float:
    try:
        eps = float(epsilon)
    except (TypeError, ValueError):
        raise BadParams(f"epsilon must be a number, got {epsilon!r}") from None
    if not (eps > 0 and math.isfinite(eps)):
        raise BadParams(f"epsilon must be a positive finite number, got {epsilon!r}")
    return eps


def check_timestamps(X) -> np.ndarray:
    """Accept timestamps as shape ``(n,)`` or ``(n, 1)``; return a float vector."""
    arr = check_array(X, ensure_2d=False, dtype=np.float64, ensure_all_finite=True)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise BadParams(f"expected a single timestamp column, got shape {arr.shape}")
        arr = arr[:, 0]
    return arr


def check_stream(X, y) -> tuple[np.ndarray, np.ndarray]:
    """Validated ``(t, y)`` vectors with strictly increasing ``t``."""
    t = check_timestamps(X)
    y = check_array(y, ensure_2d=False, dtype=np.float64, ensure_all_finite=True)
    if y.ndim != 1:
        raise BadParams(f"y must be one-dimensional, got shape {y.shape}")
    check_consistent_length(t, y)
    steps = np.diff(t)
    if steps.size and not (steps > 0).all():
        k = int(np.argmin(steps > 0)) + 1
        raise NonMonotonicTime(f"timestamp {t[k]!r} at position {k} does not follow {t[k - 1]!r}")
    return t, y
