"""Slope cones, partial convex hulls, running regression sums and a feasibility oracle.

All validity tests are strict: a line is valid for ``(t, y)`` only when
``|y - (a t + b)| < eps``. A line touching an error-segment endpoint is invalid.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import LineCoefficients
from .exceptions import (
    DegenerateSpan,
    NonMonotonicTime,
    ParallelExtremes,
    TooFewPoints,
    ZeroVariance,
)


class ErrorSegment(NamedTuple):
    t: float
    lo: float
    hi: float

    @classmethod
    def around(cls, t, y, eps):
        return cls(t, y - eps, y + eps)


class SlopeCone(NamedTuple):
    """Slopes through a fixed apex that keep every processed tuple within eps."""

    origin_t: float
    origin_y: float
    a_min: float
    a_max: float

    def line(self) -> LineCoefficients:
        """Bisector line of the cone, through the apex."""
        a = (self.a_min + self.a_max) / 2.0
        return LineCoefficients(a, self.origin_y - a * self.origin_t)


def cone_init(p0, p1, eps, origin=None) -> SlopeCone:
    """Initial cone through ``origin`` (default ``p0``) bounded by ``p1``'s error segment."""
    ot, oy = (p0[0], p0[1]) if origin is None else (origin[0], origin[1])
    dt = p1[0] - ot
    if dt == 0:
        raise DegenerateSpan(f"origin and p1 share timestamp {ot!r}")
    return SlopeCone(ot, oy, (p1[1] - eps - oy) / dt, (p1[1] + eps - oy) / dt)


def cone_update(cone: SlopeCone, p, eps) -> Optional[SlopeCone]:
    """Narrow ``cone`` with ``p``; ``None`` signals a break-up (cone left unchanged).

    The returned cone may have ``a_min == a_max``: slopes still reach the closed
    error segment, but no line stays strictly inside it. Callers that need
    strict validity must treat a collapsed cone as a break-up.
    """
    ot, oy, a_min, a_max = cone
    dt = p[0] - ot
    y = p[1]
    if dt == 0:
        # every line through the apex has the same value here
        return cone if abs(y - oy) < eps else None
    lo = (y - eps - oy) / dt
    hi = (y + eps - oy) / dt
    if dt < 0:
        # tuple before the apex: the larger slope gives the lower value
        lo, hi = hi, lo
    if lo > a_min:
        a_min = lo
    if hi < a_max:
        a_max = hi
    if a_min > a_max:
        return None
    return SlopeCone(ot, oy, a_min, a_max)


def angle_origin(p0, p1, eps) -> tuple[float, float]:
    """Apex where the steepest and shallowest lines through both error segments cross."""
    t0, y0 = p0[0], p0[1]
    t1, y1 = p1[0], p1[1]
    dt = t1 - t0
    if not dt > 0:
        raise DegenerateSpan("p1 must come after p0")
    s_max = (y1 + eps - (y0 - eps)) / dt
    s_min = (y1 - eps - (y0 + eps)) / dt
    if s_max == s_min:
        raise ParallelExtremes("extreme lines are parallel")
    # (y0 - eps) + s_max (t - t0) == (y0 + eps) + s_min (t - t0)
    t = t0 + 2.0 * eps / (s_max - s_min)
    return t, y0 - eps + s_max * (t - t0)


class PartialHulls:
    """Partial convex hulls of error-segment endpoints with the two extreme lines.

    ``lower_hull`` is the upper envelope of the lower endpoints and
    ``upper_hull`` the lower envelope of the upper endpoints. Only the part of
    each chain right of the current contact point is kept: vertices left of the
    contact cannot bound any valid line any more. The max-slope line always
    passes through ``lower_hull[0]`` and the min-slope line through
    ``upper_hull[0]``.
    """

    __slots__ = ("lower_hull", "upper_hull", "count", "last_t", "_amin", "_bmin", "_amax", "_bmax")

    def __init__(self):
        self.lower_hull: list[tuple[float, float]] = []
        self.upper_hull: list[tuple[float, float]] = []
        self.count = 0
        self.last_t = None
        self._amin = self._bmin = self._amax = self._bmax = None

    def __len__(self):
        return self.count

    @property
    def min_line(self) -> Optional[LineCoefficients]:
        if self.count < 2:
            return None
        return LineCoefficients(self._amin, self._bmin)

    @property
    def max_line(self) -> Optional[LineCoefficients]:
        if self.count < 2:
            return None
        return LineCoefficients(self._amax, self._bmax)

    def insert(self, seg) -> bool:
        """Add an error segment ``(t, lo, hi)``.

        Returns ``False`` (break-up, state unchanged) when no line can stay
        strictly inside every processed segment plus ``seg``, otherwise extends
        the hulls and returns ``True``.
        """
        t, lo, hi = seg
        lower = self.lower_hull
        upper = self.upper_hull
        count = self.count
        if count >= 2:
            if not t > self.last_t:
                raise NonMonotonicTime(f"segment at t={t!r} does not follow t={self.last_t!r}")
            v_max = self._amax * t + self._bmax
            v_min = self._amin * t + self._bmin
            if hi <= v_min or lo >= v_max:
                return False
            if hi < v_max:
                # steepest line now pivots on (t, hi), tangent to the lower chain
                k = 0
                n = len(lower)
                pt, py = lower[0]
                best = (hi - py) / (t - pt)
                while k + 1 < n:
                    qt, qy = lower[k + 1]
                    s = (hi - qy) / (t - qt)
                    if s > best:
                        break
                    best = s
                    k += 1
                if k:
                    del lower[:k]
                pt, py = lower[0]
                a = (hi - py) / (t - pt)
                self._amax = a
                self._bmax = py - a * pt
            if lo > v_min:
                k = 0
                n = len(upper)
                pt, py = upper[0]
                best = (lo - py) / (t - pt)
                while k + 1 < n:
                    qt, qy = upper[k + 1]
                    s = (lo - qy) / (t - qt)
                    if s < best:
                        break
                    best = s
                    k += 1
                if k:
                    del upper[:k]
                pt, py = upper[0]
                a = (lo - py) / (t - pt)
                self._amin = a
                self._bmin = py - a * pt
            # monotone-chain pops keep both chains convex
            while len(upper) >= 2:
                (ot, oy), (at, ay) = upper[-2], upper[-1]
                if (at - ot) * (hi - oy) - (ay - oy) * (t - ot) > 0:
                    break
                upper.pop()
            while len(lower) >= 2:
                (ot, oy), (at, ay) = lower[-2], lower[-1]
                if (at - ot) * (lo - oy) - (ay - oy) * (t - ot) < 0:
                    break
                lower.pop()
        elif count == 1:
            if not t > self.last_t:
                raise NonMonotonicTime(f"segment at t={t!r} does not follow t={self.last_t!r}")
            pt, py = lower[0]
            a = (hi - py) / (t - pt)
            self._amax = a
            self._bmax = py - a * pt
            pt, py = upper[0]
            a = (lo - py) / (t - pt)
            self._amin = a
            self._bmin = py - a * pt
        upper.append((t, hi))
        lower.append((t, lo))
        self.count = count + 1
        self.last_t = t
        return True

    def extreme_slope_lines(self) -> tuple[LineCoefficients, LineCoefficients]:
        if self.count < 2:
            raise TooFewPoints("extreme lines need at least two error segments")
        return self.min_line, self.max_line

    def line_valid(self, line) -> bool:
        """Strict validity of ``line`` checked against the hull vertices only."""
        a, b = line
        for t, y in self.lower_hull:
            if not a * t + b > y:
                return False
        for t, y in self.upper_hull:
            if not a * t + b < y:
                return False
        return True

    def intercept_band(self, a) -> tuple[float, float]:
        """Open interval of intercepts ``b`` for which slope ``a`` is valid."""
        b_lo = max(y - a * t for t, y in self.lower_hull)
        b_hi = min(y - a * t for t, y in self.upper_hull)
        return b_lo, b_hi

    def central_line(self) -> LineCoefficients:
        """Average of the two extreme lines, re-centred when it grazes a hull.

        Both extreme lines can pivot on the same endpoint, in which case their
        average touches it too; the slope is kept and the intercept moved to the
        middle of the valid band for that slope.
        """
        lo_line, hi_line = self.extreme_slope_lines()
        a = (lo_line.a + hi_line.a) / 2.0
        b = (lo_line.b + hi_line.b) / 2.0
        b_lo, b_hi = self.intercept_band(a)
        # with large timestamps the intercept carries rounding noise of a few
        # ulps of |b|, so keep clear of the band edges by at least that much
        guard = max((b_hi - b_lo) * 1e-6, 16 * math.ulp(max(abs(b_lo), abs(b_hi))))
        if not b_lo + guard < b < b_hi - guard:
            b = (b_lo + b_hi) / 2.0
        return LineCoefficients(a, b)


class RegressionAccumulator:
    """Running sums for the least-squares line of the buffered tuples.

    Sums are kept relative to the first pushed tuple; that shift leaves the
    fitted line unchanged and keeps ``var(t)`` well conditioned for large
    timestamps.
    """

    __slots__ = ("n", "t0", "y0", "sum_t", "sum_y", "sum_tt", "sum_ty")

    def __init__(self):
        self.n = 0
        self.t0 = 0.0
        self.y0 = 0.0
        self.sum_t = 0.0
        self.sum_y = 0.0
        self.sum_tt = 0.0
        self.sum_ty = 0.0

    def push(self, t, y):
        if self.n == 0:
            self.t0 = t
            self.y0 = y
        dt = t - self.t0
        dy = y - self.y0
        self.n += 1
        self.sum_t += dt
        self.sum_y += dy
        self.sum_tt += dt * dt
        self.sum_ty += dt * dy
        return self

    def line(self) -> LineCoefficients:
        n = self.n
        if n < 2:
            raise TooFewPoints("regression needs at least two points")
        mu_t = self.sum_t / n
        mu_y = self.sum_y / n
        var = self.sum_tt / n - mu_t * mu_t
        if not var > 0:
            raise ZeroVariance("timestamps have zero variance")
        a = (self.sum_ty / n - mu_t * mu_y) / var
        # intercept in the shifted frame is mu_y - a mu_t
        return LineCoefficients(a, self.y0 + mu_y - a * (self.t0 + mu_t))


def regression_push(acc: RegressionAccumulator, p) -> RegressionAccumulator:
    return acc.push(p[0], p[1])


def regression_line(acc: RegressionAccumulator) -> LineCoefficients:
    return acc.line()


def hulls_insert(h: PartialHulls, seg) -> bool:
    return h.insert(seg)


def extreme_slope_lines(h: PartialHulls):
    return h.extreme_slope_lines()


def line_valid(h: PartialHulls, line) -> bool:
    return h.line_valid(line)


def _pointwise_valid(t, y, eps, a, b):
    """Vectorised strict validity of each candidate line ``(a[k], b[k])``."""
    r = np.abs(y[None, :] - (a[:, None] * t[None, :] + b[:, None]))
    return np.all(r < eps, axis=1)


def stabbing_feasible_oracle(points: Sequence[Sequence[float]], eps: float) -> bool:
    """Brute-force strict feasibility: does some line keep every point within eps?

    The closed feasible region in (slope, intercept) space is a convex polygon
    whose vertices are lines through two error-segment endpoints. Every such
    vertex is enumerated; the strict region is non-empty exactly when the
    closed one has interior, and then the mean of its vertices lies strictly
    inside. O(n^3); intended for tests.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n <= 2:
        return True
    t = pts[:, 0]
    y = pts[:, 1]
    et = np.concatenate([t, t])
    ey = np.concatenate([y - eps, y + eps])
    i, j = np.triu_indices(2 * n, k=1)
    keep = et[i] != et[j]
    i, j = i[keep], j[keep]
    a = (ey[j] - ey[i]) / (et[j] - et[i])
    b = ey[i] - a * et[i]
    # closed validity with a rounding allowance proportional to the magnitudes
    tol = 1e-9 * (eps + np.abs(y).max() + np.abs(a) * np.abs(t).max())
    r = np.abs(y[None, :] - (a[:, None] * t[None, :] + b[:, None]))
    closed = np.all(r <= eps + tol[:, None], axis=1)
    if not closed.any():
        return False
    a_c = a[closed].mean()
    b_c = b[closed].mean()
    return bool(np.all(np.abs(y - (a_c * t + b_c)) < eps))


def fixed_origin_feasible(origin, points, eps) -> bool:
    """Strict feasibility of some line through ``origin`` for all ``points``."""
    ot, oy = origin
    lo, hi = -np.inf, np.inf
    for t, y in points:
        dt = t - ot
        if dt == 0:
            if not abs(y - oy) < eps:
                return False
            continue
        s1 = (y - eps - oy) / dt
        s2 = (y + eps - oy) / dt
        if dt < 0:
            s1, s2 = s2, s1
        lo = max(lo, s1)
        hi = min(hi, s2)
    return lo < hi
