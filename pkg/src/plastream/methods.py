"""Online PLA methods.

Each method is a single-owner state machine: :meth:`push` feeds one tuple and
returns the segments it closed (usually none), :meth:`finish` flushes the open
segment. Every emitted segment keeps each covered tuple strictly within
``epsilon`` of its line.

A length cap (``max_length``) is enforced when a tuple arrives while the open
segment is already full: the full segment is closed and the tuple starts the
next one, exactly as a break-up tuple would.
"""

from __future__ import annotations

import math

from .core import LineCoefficients, SegmentSummary
from .exceptions import BadParams, NonFiniteValue, NonMonotonicTime
from .geometry import PartialHulls, angle_origin, cone_init, cone_update

METHODS = ("swing", "angle", "disjoint", "linear")

#: Methods whose consecutive segments share endpoints.
JOINT_METHODS = frozenset({"swing"})


class PLAMethod:
    name = None
    joint = False

    def __init__(self, epsilon, max_length=0):
        if not (epsilon > 0 and math.isfinite(epsilon)):
            raise BadParams(f"epsilon must be a positive finite number, got {epsilon!r}")
        if max_length < 0 or max_length == 1:
            raise BadParams(f"max_length must be 0 (uncapped) or at least 2, got {max_length!r}")
        self.epsilon = float(epsilon)
        self.max_length = int(max_length)
        self._n = 0
        self.reset()

    def reset(self):
        """Drop the open segment; the next pushed tuple starts afresh."""
        self._len = 0
        self._start = self._n
        self._first = None
        self._last_t = None

    def _drop(self):
        # like reset, but later pushes must still follow the last timestamp
        last_t = self._last_t
        self.reset()
        self._last_t = last_t

    def __repr__(self):
        return f"{type(self).__name__}(epsilon={self.epsilon!r}, max_length={self.max_length!r})"

    @property
    def buffered(self):
        """Number of pushed tuples not yet covered by an emitted segment."""
        return self._len

    def _check(self, t, y):
        if not (math.isfinite(t) and math.isfinite(y)):
            raise NonFiniteValue(f"non-finite tuple ({t!r}, {y!r})")
        if self._last_t is not None and not t > self._last_t:
            raise NonMonotonicTime(f"timestamp {t!r} does not follow {self._last_t!r}")
        self._last_t = t

    def _summary(self, line, joined=False):
        return SegmentSummary(self._start, self._first[0], self._len, line, joined)

    def _flat(self):
        return LineCoefficients(0.0, self._first[1])

    def push(self, t, y):
        """Feed one tuple; returns the segments it closed."""
        self._check(t, y)
        return self._advance(t, y)

    def _advance(self, t, y):
        # push without input validation, for callers that already checked
        raise NotImplementedError

    def finish(self):
        raise NotImplementedError

    def run(self, t, y):
        """Segments for whole arrays ``t`` and ``y`` (push everything, then finish)."""
        out = []
        push = self.push
        for ti, yi in zip(t, y):
            out.extend(push(float(ti), float(yi)))
        out.extend(self.finish())
        return out


class SwingMethod(PLAMethod):
    """Fixed-apex cone; each segment starts where the previous one ended (joint knots)."""

    name = "swing"
    joint = True

    def reset(self):
        super().reset()
        self._apex = None
        self._cone = None
        self._prev_t = None
        self._last_line = None

    def resume(self, apex):
        """Drop the open segment; the next one starts from the knot ``apex``."""
        self.reset()
        t, y = float(apex[0]), float(apex[1])
        self._apex = (t, y)
        self._prev_t = t
        self._last_line = LineCoefficients(0.0, y)

    def _start_after(self, line, t, y):
        # the previous segment's endpoint becomes the apex of the next one
        t_end = self._prev_t
        self._apex = (t_end, line.a * t_end + line.b)
        self._start = self._n
        self._first = (t, y)
        self._len = 1
        self._cone = cone_init(None, (t, y), self.epsilon, origin=self._apex)

    def _line(self):
        if self._cone is None:
            return self._flat()
        return self._cone.line()

    def _advance(self, t, y):
        closed = []
        if self._len == 0:
            if self._apex is None:
                self._apex = (t, y)
                self._start = self._n
                self._first = (t, y)
                self._len = 1
            else:
                self._start_after(self._last_line, t, y)
        elif self.max_length and self._len >= self.max_length:
            line = self._line()
            closed.append(self._summary(line, True))
            self._start_after(line, t, y)
        elif self._cone is None:
            self._cone = cone_init(None, (t, y), self.epsilon, origin=self._apex)
            self._len += 1
        else:
            cone = cone_update(self._cone, (t, y), self.epsilon)
            if cone is None or not cone.a_min < cone.a_max:
                line = self._cone.line()
                closed.append(self._summary(line, True))
                self._start_after(line, t, y)
            else:
                self._cone = cone
                self._len += 1
        self._prev_t = t
        self._n += 1
        return closed

    def finish(self):
        if self._len == 0:
            return []
        line = self._line()
        seg = self._summary(line, True)
        self._last_line = line
        self._len = 0
        self._cone = None
        self._start = self._n
        return [seg]


class AngleMethod(PLAMethod):
    """Cone whose apex is the crossing of the extreme lines through the first two tuples."""

    name = "angle"

    def reset(self):
        super().reset()
        self._cone = None

    def _open(self, t, y):
        self._start = self._n
        self._first = (t, y)
        self._len = 1
        self._cone = None

    def _line(self):
        if self._cone is None:
            return self._flat()
        return self._cone.line()

    def _advance(self, t, y):
        closed = []
        if self._len == 0:
            self._open(t, y)
        elif self.max_length and self._len >= self.max_length:
            closed.append(self._summary(self._line()))
            self._open(t, y)
        elif self._cone is None:
            apex = angle_origin(self._first, (t, y), self.epsilon)
            cone = cone_init(None, (t, y), self.epsilon, origin=apex)
            # the apex is rounded, so bound the cone by the first tuple as well
            cone = cone_update(cone, self._first, self.epsilon)
            if cone is None or not cone.a_min < cone.a_max:
                closed.append(self._summary(self._line()))
                self._open(t, y)
            else:
                self._cone = cone
                self._len = 2
        else:
            cone = cone_update(self._cone, (t, y), self.epsilon)
            if cone is None or not cone.a_min < cone.a_max:
                closed.append(self._summary(self._cone.line()))
                self._open(t, y)
            else:
                self._cone = cone
                self._len += 1
        self._n += 1
        return closed

    def finish(self):
        if self._len == 0:
            return []
        seg = self._summary(self._line())
        self._drop()
        return [seg]


class DisjointMethod(PLAMethod):
    """Longest segment with any line (partial convex hulls); restarts at the break-up tuple."""

    name = "disjoint"

    def reset(self):
        super().reset()
        self._hulls = PartialHulls()

    def _open(self, t, y):
        self._start = self._n
        self._first = (t, y)
        self._len = 1
        self._hulls = h = PartialHulls()
        h.insert((t, y - self.epsilon, y + self.epsilon))

    def _line(self):
        if self._len == 1:
            return self._flat()
        return self._hulls.central_line()

    def _advance(self, t, y):
        closed = []
        eps = self.epsilon
        if self._len == 0:
            self._open(t, y)
        elif self.max_length and self._len >= self.max_length:
            closed.append(self._summary(self._line()))
            self._open(t, y)
        elif self._hulls.insert((t, y - eps, y + eps)):
            self._len += 1
        else:
            closed.append(self._summary(self._line()))
            self._open(t, y)
        self._n += 1
        return closed

    def finish(self):
        if self._len == 0:
            return []
        seg = self._summary(self._line())
        self._drop()
        return [seg]


class LinearMethod(PLAMethod):
    """Longest segment whose least-squares line stays valid; validity checked on the hulls.

    The regression sums are kept inline (shifted by the first tuple, like
    :class:`~plastream.geometry.RegressionAccumulator`) because this loop is hot.
    """

    name = "linear"

    def reset(self):
        super().reset()
        self._hulls = PartialHulls()
        self._valid = None
        self._sums = None

    def _open(self, t, y):
        self._start = self._n
        self._first = (t, y)
        self._len = 1
        self._hulls = h = PartialHulls()
        h.insert((t, y - self.epsilon, y + self.epsilon))
        self._sums = [0.0, 0.0, 0.0, 0.0]
        self._valid = None

    def _line(self):
        if self._valid is None:
            return self._flat()
        return self._valid

    def _fit(self, t, y):
        # least-squares line over the open segment plus (t, y), in the original frame
        t0, y0 = self._first
        dt = t - t0
        dy = y - y0
        st, sy, stt, sty = self._sums
        st += dt
        sy += dy
        stt += dt * dt
        sty += dt * dy
        n = self._len + 1
        mu_t = st / n
        mu_y = sy / n
        var = stt / n - mu_t * mu_t
        a = (sty / n - mu_t * mu_y) / var
        return (st, sy, stt, sty), a, y0 + mu_y - a * (t0 + mu_t)

    def _advance(self, t, y):
        closed = []
        eps = self.epsilon
        if self._len == 0:
            self._open(t, y)
        elif self.max_length and self._len >= self.max_length:
            closed.append(self._summary(self._line()))
            self._open(t, y)
        else:
            h = self._hulls
            ok = h.insert((t, y - eps, y + eps))
            if ok:
                sums, a, b = self._fit(t, y)
                for pt, py in h.lower_hull:
                    if not a * pt + b > py:
                        ok = False
                        break
                else:
                    for pt, py in h.upper_hull:
                        if not a * pt + b < py:
                            ok = False
                            break
            if ok:
                self._sums = sums
                self._valid = LineCoefficients(a, b)
                self._len += 1
            else:
                closed.append(self._summary(self._line()))
                self._open(t, y)
        self._n += 1
        return closed

    def finish(self):
        if self._len == 0:
            return []
        seg = self._summary(self._line())
        self._drop()
        return [seg]


_REGISTRY = {
    "swing": SwingMethod,
    "angle": AngleMethod,
    "disjoint": DisjointMethod,
    "linear": LinearMethod,
}


def make_method(name, epsilon, max_length=0) -> PLAMethod:
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise BadParams(f"unknown method {name!r}; expected one of {', '.join(METHODS)}") from None
    return cls(epsilon, max_length)
