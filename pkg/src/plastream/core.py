"""Domain types for tuples, knots and segments, and the knot-based reconstruction rule."""

from __future__ import annotations

import math
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

from .exceptions import (
    EqualTimestamps,
    MalformedKnotStream,
    NonContiguous,
    NonMonotonicTime,
    TimestampBeforeFirstKnot,
)


class InputTuple(NamedTuple):
    t: float
    y: float


class LineCoefficients(NamedTuple):
    a: float
    b: float

    def __call__(self, t):
        return self.a * t + self.b


class Joint(NamedTuple):
    """Two consecutive segments sharing the endpoint ``(t, y)``."""

    t: float
    y: float


class Disjoint(NamedTuple):
    """Segment boundary at ``t``: the earlier segment ends at ``y_end``, the next starts at ``y_start``."""

    t: float
    y_end: float
    y_start: float


Knot = Union[Joint, Disjoint]


class SegmentSummary(NamedTuple):
    start_index: int
    start_t: float
    length: int
    line: LineCoefficients
    joined_to_previous: bool = False


class ReconstructedTuple(NamedTuple):
    t: float
    y_approx: float


def segment_from_knots(prev: Knot, cur: Knot) -> LineCoefficients:
    """Coefficients of the line joining the start of ``prev`` to the end of ``cur``."""
    u = prev.t
    v = prev.y_start if type(prev) is Disjoint else prev.y
    u2 = cur.t
    v2 = cur.y_end if type(cur) is Disjoint else cur.y
    du = u2 - u
    if du == 0:
        raise EqualTimestamps(f"knots share timestamp {u!r}")
    return LineCoefficients((v2 - v) / du, (u2 * v - v2 * u) / du)


def _final_knot_time(t_last: float, previous_t: float) -> float:
    # A knot sequence must strictly increase; a trailing one-tuple segment
    # would otherwise end on the timestamp it starts at.
    if t_last > previous_t:
        return t_last
    return t_last + max(1.0, abs(t_last) * 2.0**-40)


def segments_to_knots(
    segments: Sequence[SegmentSummary], tuples: Sequence[Sequence[float]]
) -> list[Knot]:
    """Convert contiguous segments over ``tuples`` into a knot sequence.

    ``tuples`` holds the covered (t, y) pairs; ``segments[0]`` covers ``tuples[0]``.
    A segment flagged ``joined_to_previous`` shares the previous segment's
    endpoint, so the boundary becomes a Joint knot placed at the last
    timestamp covered by the previous segment. Other boundaries become a
    Disjoint knot at the next segment's first timestamp.
    """
    if not segments:
        return []
    base = segments[0].start_index
    expected = base
    for seg in segments:
        if seg.start_index != expected or seg.length < 1:
            raise NonContiguous(
                f"segment starting at {seg.start_index} does not follow index {expected}"
            )
        expected += seg.length
    if expected - base != len(tuples):
        raise NonContiguous(
            f"segments cover {expected - base} tuples but {len(tuples)} were given"
        )

    first = segments[0]
    t0 = tuples[0][0]
    knots: list[Knot] = [Joint(t0, first.line(t0))]
    for prev, seg in zip(segments, segments[1:]):
        if seg.joined_to_previous:
            t_end = tuples[seg.start_index - base - 1][0]
            knots.append(Joint(t_end, prev.line(t_end)))
        else:
            ts = tuples[seg.start_index - base][0]
            knots.append(Disjoint(ts, prev.line(ts), seg.line(ts)))
        if knots[-1].t <= knots[-2].t:
            raise MalformedKnotStream(f"knot times do not increase at t={knots[-1].t!r}")
    last = segments[-1]
    t_last = _final_knot_time(tuples[-1][0], knots[-1].t)
    knots.append(Joint(t_last, last.line(t_last)))
    return knots


def reconstruct(
    timestamps: Iterable[float], knots: Iterable[Knot]
) -> Iterator[ReconstructedTuple]:
    """Lazily rebuild one tuple per timestamp from a knot stream.

    Timestamp ``t`` is evaluated on the latest segment whose start does not
    exceed ``t``; a tuple is yielded once the knot closing its segment has been
    read. Timestamps past the last knot extend the final segment.
    """
    knots = iter(knots)
    ts = iter(timestamps)
    prev = next(knots, None)
    t = next(ts, None)
    if prev is None:
        if t is not None:
            raise MalformedKnotStream("empty knot stream")
        return
    if type(prev) is not Joint:
        raise MalformedKnotStream("first knot must be joint")
    if t is not None and t < prev.t:
        raise TimestampBeforeFirstKnot(f"timestamp {t!r} precedes first knot at {prev.t!r}")

    line = None
    last_t = -math.inf
    for cur in knots:
        if not cur.t > prev.t:
            raise MalformedKnotStream(f"knot times do not increase at t={cur.t!r}")
        line = segment_from_knots(prev, cur)
        # evaluate relative to the segment start: same line as a t + b, but
        # without the cancellation that large timestamps cause in b
        u = prev.t
        v = prev.y_start if type(prev) is Disjoint else prev.y
        while t is not None and t < cur.t:
            if t <= last_t:
                raise NonMonotonicTime()
            yield ReconstructedTuple(t, v + line.a * (t - u))
            last_t = t
            t = next(ts, None)
        prev = cur

    if type(prev) is not Joint:
        raise MalformedKnotStream("last knot must be joint")
    if t is None:
        return
    if line is None:
        raise MalformedKnotStream("a single knot cannot reconstruct any timestamp")
    while t is not None:
        if t <= last_t:
            raise NonMonotonicTime()
        yield ReconstructedTuple(t, v + line.a * (t - u))
        last_t = t
        t = next(ts, None)
