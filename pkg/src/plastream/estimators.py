"""scikit-learn style front end over the streaming methods."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_epsilon, check_stream, check_timestamps
from .core import segment_from_knots
from .methods import METHODS, make_method
from .protocols import SingletonBurst, encode, records_to_knots


class PLARegressor(RegressorMixin, BaseEstimator):
    """Piecewise linear fit with every training point within ``epsilon``.

    ``X`` holds timestamps, shape ``(n,)`` or ``(n, 1)``, strictly increasing.
    Prediction uses the last segment starting at or before each timestamp;
    timestamps before the first segment use the first one.

    When ``protocol`` is set, the fit also encodes the stream and reports the
    encoded size in ``nbytes_``. Protocol length limits then apply.
    """

    def __init__(self, method="disjoint", epsilon=1.0, max_length=0, protocol=None):
        self.method = method
        self.epsilon = epsilon
        self.max_length = max_length
        self.protocol = protocol

    def fit(self, X, y):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        eps = check_epsilon(self.epsilon)
        t, y = check_stream(X, y)
        if self.protocol is None:
            segments = make_method(self.method, eps, self.max_length).run(t.tolist(), y.tolist())
            self.segments_ = segments
            self.breakpoints_ = np.array([s.start_t for s in segments])
            self.coef_ = np.array([tuple(s.line) for s in segments]).reshape(-1, 2)
            self.nbytes_ = None
        else:
            kw = {}
            if self.max_length:
                kw["max_length"] = self.max_length
            res = encode(self.method, self.protocol, t.tolist(), y.tolist(), eps, **kw)
            self.segments_ = None
            pieces = _pieces(self.protocol, res, t)
            self.breakpoints_ = np.array([p[0] for p in pieces])
            self.coef_ = np.array([p[1:] for p in pieces]).reshape(-1, 2)
            self.nbytes_ = res.nbytes
        self.n_segments_ = len(self.breakpoints_)
        self.n_points_ = len(t)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        t = check_timestamps(X)
        if self.n_segments_ == 0:
            raise ValueError("fitted on an empty stream")
        j = np.searchsorted(self.breakpoints_, t, side="right") - 1
        j = np.clip(j, 0, self.n_segments_ - 1)
        return self.coef_[j, 0] * t + self.coef_[j, 1]

    @property
    def compression_ratio_(self):
        """Encoded size over raw 8-byte values (protocol fits only)."""
        check_is_fitted(self, "coef_")
        if self.nbytes_ is None:
            return None
        return self.nbytes_ / (8 * self.n_points_)


def _pieces(protocol, result, t):
    """``(start_t, a, b)`` for each piece the encoded records describe."""
    if protocol == "implicit":
        records = [r for e in result.emissions for r in e.records]
        knots = list(records_to_knots(records))
        return [(u.t, *segment_from_knots(u, v)) for u, v in zip(knots, knots[1:])]
    out = []
    for e in result.emissions:
        (rec,) = e.records
        if isinstance(rec, SingletonBurst):
            out.extend((t[e.start + k], 0.0, v) for k, v in enumerate(rec.values))
        elif hasattr(rec, "a"):
            out.append((t[e.start], rec.a, rec.b))
        else:
            out.append((t[e.start], 0.0, rec.y))
    return out
