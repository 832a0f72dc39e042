"""Seeded synthetic streams at unit time spacing."""

from __future__ import annotations

import numpy as np

from .core import InputTuple
from .exceptions import BadParams

KINDS = ("constant", "ramp", "alternating", "random_walk")

_DEFAULTS = {
    "constant": {"value": 0.0},
    "ramp": {"slope": 1.0, "intercept": 0.0, "noise": 0.0},
    "alternating": {"A": 1.0},
    "random_walk": {"sigma": 1.0, "start": 0.0},
}


def generate_arrays(kind, n, params=None, seed=None, t0=0.0):
    """Timestamps ``t0, t0+1, ...`` and values for a stream of ``n`` tuples.

    ``constant``
        ``value`` everywhere.
    ``ramp``
        ``intercept + slope * k`` plus Gaussian noise of std ``noise``.
    ``alternating``
        ``0, A, 0, A, ...``.
    ``random_walk``
        ``start`` plus cumulative Gaussian steps of std ``sigma``.
    """
    if kind not in _DEFAULTS:
        raise BadParams(f"unknown stream kind {kind!r}; expected one of {', '.join(KINDS)}")
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 0:
        raise BadParams(f"n must be a non-negative integer, got {n!r}")
    opts = dict(_DEFAULTS[kind])
    for key, value in (params or {}).items():
        if key not in opts:
            raise BadParams(f"{kind} takes {', '.join(opts) or 'no'} parameters, got {key!r}")
        try:
            opts[key] = float(value)
        except (TypeError, ValueError):
            raise BadParams(f"parameter {key}={value!r} is not a number") from None
        if not np.isfinite(opts[key]):
            raise BadParams(f"parameter {key} must be finite")
    rng = np.random.default_rng(seed)
    k = np.arange(n, dtype=float)
    t = t0 + k
    if kind == "constant":
        y = np.full(n, opts["value"])
    elif kind == "ramp":
        if opts["noise"] < 0:
            raise BadParams("noise must be >= 0")
        y = opts["intercept"] + opts["slope"] * k + rng.normal(0.0, opts["noise"], n)
    elif kind == "alternating":
        y = np.where(np.arange(n) % 2 == 1, opts["A"], 0.0)
    else:
        if opts["sigma"] < 0:
            raise BadParams("sigma must be >= 0")
        y = opts["start"] + np.cumsum(rng.normal(0.0, opts["sigma"], n))
    return t, y


def generate(kind, n, params=None, seed=None, t0=0.0) -> list[InputTuple]:
    t, y = generate_arrays(kind, n, params, seed, t0)
    return [InputTuple(ti, yi) for ti, yi in zip(t.tolist(), y.tolist())]


def parse_spec(text):
    """Parse ``KIND:N[:key=value,...]`` into ``(kind, n, params)``."""
    parts = text.split(":", 2)
    if len(parts) < 2:
        raise BadParams(f"expected KIND:N[:PARAMS], got {text!r}")
    kind = parts[0].strip()
    try:
        n = int(parts[1])
    except ValueError:
        raise BadParams(f"stream length {parts[1]!r} is not an integer") from None
    params = {}
    if len(parts) == 3 and parts[2].strip():
        for item in parts[2].split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise BadParams(f"parameter {item!r} is not key=value")
            params[key.strip()] = value.strip()
    return kind, n, params
