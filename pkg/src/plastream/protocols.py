"""Streaming compression protocols: record types, the encoder pipeline and decoders.

Four protocols turn method output into compression records:

``implicit``
    The knot sequence itself. Joint knots are ``(t, y)`` pairs; disjoint knots
    go out in two parts, ``(-t, y_end)`` then ``y_start``, so timestamps must be
    strictly positive.
``two-streams``
    Segments ``(t0, n, a, b)`` on one stream, raw singleton values on another.
``single-stream``
    Counted segments ``(n, a, b)`` and singletons ``(1, y)`` interleaved.
``single-stream-v``
    Like ``single-stream`` but singletons are grouped into bursts ``(-m, y1..ym)``.

Values are IEEE-754 binary64 little-endian (8 bytes), counters one byte.
"""

from __future__ import annotations

import math
import struct
from collections import deque
from typing import NamedTuple

import numpy as np

from .core import Disjoint, Joint, LineCoefficients, _final_knot_time, reconstruct
from .exceptions import (
    BadParams,
    CorruptStream,
    IllegalPairing,
    InternalError,
    NonFiniteValue,
    NonMonotonicTime,
    NonPositiveTimestamp,
    TruncatedStream,
)
from .methods import METHODS, make_method

PROTOCOLS = ("implicit", "two-streams", "single-stream", "single-stream-v")


class ProtocolLimits(NamedTuple):
    min_length: int
    max_length: int  # 0 = uncapped
    burst_cap: int = 0


LIMITS = {
    "implicit": ProtocolLimits(1, 0),
    "two-streams": ProtocolLimits(4, 256),
    "single-stream": ProtocolLimits(3, 256),
    "single-stream-v": ProtocolLimits(3, 127, 127),
}


# --------------------------------------------------------------------------
# records


class ImplicitJoint(NamedTuple):
    t: float
    y: float
    nbytes = 16


class ImplicitDisjointHead(NamedTuple):
    """First half of a disjoint knot; serialised with ``t`` negated."""

    t: float
    y_end: float
    nbytes = 16


class ImplicitDisjointTail(NamedTuple):
    y_start: float
    nbytes = 8


class QuadSegment(NamedTuple):
    t0: float
    n: int
    a: float
    b: float
    nbytes = 25


class RawSingleton(NamedTuple):
    y: float
    nbytes = 8


class CountedSegment(NamedTuple):
    n: int
    a: float
    b: float
    nbytes = 17


class CountedSingleton(NamedTuple):
    y: float
    nbytes = 9


class SingletonBurst(NamedTuple):
    values: tuple

    @property
    def m(self):
        return len(self.values)

    @property
    def nbytes(self):
        return 1 + 8 * len(self.values)


def record_size_yunits(record) -> float:
    """Record size relative to one 8-byte y value (exact for these sizes)."""
    return record.nbytes / 8


class Emission(NamedTuple):
    """Records emitted together that reconstruct input indices ``start .. start+count-1``.

    ``emitted_at`` is the index of the input tuple whose processing produced
    the records. Most emissions hold a single record; implicit-protocol
    emissions hold the knot parts released when a segment closes.
    """

    records: tuple
    emitted_at: int
    start: int
    count: int

    @property
    def nbytes(self):
        return sum(r.nbytes for r in self.records)

    @property
    def stop(self):
        return self.start + self.count


SEGMENT_STREAM = "segments"
SINGLETON_STREAM = "singletons"
MAIN_STREAM = "main"


def stream_of(protocol, record) -> str:
    if protocol == "two-streams":
        return SINGLETON_STREAM if type(record) is RawSingleton else SEGMENT_STREAM
    return MAIN_STREAM


def stream_names(protocol) -> tuple[str, ...]:
    if protocol == "two-streams":
        return (SEGMENT_STREAM, SINGLETON_STREAM)
    return (MAIN_STREAM,)


def check_pairing(method, protocol):
    if method not in METHODS:
        raise BadParams(f"unknown method {method!r}")
    if protocol not in LIMITS:
        raise BadParams(f"unknown protocol {protocol!r}")
    if protocol != "implicit" and method == "swing":
        raise IllegalPairing(
            f"{protocol} needs a method producing disjoint knots; {method} produces joint knots"
        )


# --------------------------------------------------------------------------
# encoder


class Pipeline:
    """Method plus protocol: turns input tuples into compression records.

    Every closed segment is checked the way the decoder will evaluate it.
    Segments shorter than ``min_length`` are demoted: their first tuple
    becomes a singleton and the remaining tuples are replayed into a fresh
    method state. A segment whose decoded values miss the bound (floating
    point rounding on nearly degenerate input) is cut to its longest valid
    prefix in the same way.
    """

    def __init__(
        self,
        method,
        protocol,
        epsilon,
        max_length=None,
        min_length=None,
        burst_cap=None,
    ):
        check_pairing(method, protocol)
        limits = LIMITS[protocol]
        if max_length is None:
            max_length = limits.max_length
        if min_length is None:
            min_length = limits.min_length
        if burst_cap is None:
            burst_cap = limits.burst_cap
        if limits.max_length and not (2 <= max_length <= limits.max_length):
            raise BadParams(f"{protocol} caps segments at 2..{limits.max_length}, got {max_length}")
        if min_length < limits.min_length:
            raise BadParams(f"{protocol} needs min_length >= {limits.min_length}, got {min_length}")
        if max_length and min_length > max_length:
            raise BadParams("min_length exceeds max_length")
        if protocol == "implicit" and min_length != 1:
            raise BadParams("implicit has no singleton records, so min_length must be 1")
        if protocol == "single-stream-v" and not (1 <= burst_cap <= 127):
            raise BadParams(f"burst cap must be within 1..127, got {burst_cap}")
        self.method_name = method
        self.protocol = protocol
        self.epsilon = float(epsilon)
        self.max_length = max_length
        self.min_length = min_length
        self.burst_cap = burst_cap
        self.method = make_method(method, epsilon, max_length)
        self._joint = self.method.joint
        self._advance = self.method._advance
        self._shadow = deque()
        self._burst = []
        self._n = 0
        self._last_t = None
        # implicit-protocol state
        self._knots = 0
        self._prev_knot_t = None
        self._prev_knot_v = None
        self._open_disjoint = False

    def push(self, t, y) -> list[Emission]:
        t = float(t)
        y = float(y)
        if not (math.isfinite(t) and math.isfinite(y)):
            raise NonFiniteValue(f"non-finite tuple ({t!r}, {y!r})")
        if self._last_t is not None and not t > self._last_t:
            raise NonMonotonicTime(f"timestamp {t!r} does not follow {self._last_t!r}")
        if self.protocol == "implicit" and not t > 0:
            raise NonPositiveTimestamp(
                f"implicit protocol needs timestamps > 0, got {t!r} (use a timestamp offset)"
            )
        self._last_t = t
        i = self._n
        self._n += 1
        out = []
        self._feed((i, t, y), i, out)
        return out

    def _feed(self, item, i, out):
        self._shadow.append(item)
        closed = self._advance(item[1], item[2])
        if closed:
            self._drain(closed, i, out)

    def _drain(self, closed, i, out, final=False):
        shadow = self._shadow
        pending = deque()
        while True:
            for seg in closed:
                covered = [shadow.popleft() for _ in range(seg.length)]
                used = self._place(seg.line, covered, shadow[0][1] if shadow else None, i, out)
                if used < len(covered):
                    pending.extendleft(reversed(shadow))
                    pending.extendleft(reversed(covered[used:]))
                    shadow.clear()
                    self._restart()
                    break
            if pending:
                item = pending.popleft()
                shadow.append(item)
                closed = self._advance(item[1], item[2])
            elif final:
                closed = self.method.finish()
                if not closed:
                    return
            else:
                return

    def _restart(self):
        if self._joint and self._knots:
            self.method.resume((self._prev_knot_t, self._prev_knot_v))
        else:
            self.method.reset()

    def finish(self) -> list[Emission]:
        out = []
        # the end of the stream acts as one more input tuple
        i = self._n
        self._drain(self.method.finish(), i, out, final=True)
        if self._burst:
            self._flush_burst(i, out)
        return out

    def run(self, t, y) -> list[Emission]:
        """Push whole arrays, then finish. Input checks are done once, vectorised."""
        t = np.asarray(t, dtype=float)
        y = np.asarray(y, dtype=float)
        if t.ndim != 1 or t.shape != y.shape:
            raise BadParams("t and y must be 1-D sequences of equal length")
        self._check_batch(t, y)
        out = []
        feed = self._feed
        i = self._n
        for ti, yi in zip(t.tolist(), y.tolist()):
            feed((i, ti, yi), i, out)
            i += 1
            self._n = i
        if len(t):
            self._last_t = float(t[-1])
        out.extend(self.finish())
        return out

    def _check_batch(self, t, y):
        finite = np.isfinite(t) & np.isfinite(y)
        if not finite.all():
            k = int(np.argmin(finite))
            raise NonFiniteValue(f"non-finite tuple ({t[k]!r}, {y[k]!r}) at position {k}")
        if not len(t):
            return
        steps = np.diff(t)
        if self._last_t is not None and not t[0] > self._last_t:
            raise NonMonotonicTime(f"timestamp {t[0]!r} does not follow {self._last_t!r}")
        if not (steps > 0).all():
            k = int(np.argmin(steps > 0)) + 1
            raise NonMonotonicTime(f"timestamp {t[k]!r} at position {k} does not follow {t[k - 1]!r}")
        if self.protocol == "implicit" and not t[0] > 0:
            raise NonPositiveTimestamp(
                f"implicit protocol needs timestamps > 0, got {t[0]!r} (use a timestamp offset)"
            )

    # -- emission helpers

    def _place(self, line, covered, next_t, i, out):
        """Emit records for a leading part of ``covered``; returns how many tuples they cover."""
        n = len(covered)
        if self.protocol != "implicit":
            k = self._counted_prefix(line, covered)
            if k >= self.min_length:
                self._segment(line, covered[:k] if k < n else covered, i, out, None)
                return k
            self._singleton(covered[0], i, out)
            return 1
        k = self._implicit_prefix(line, covered, next_t)
        if k == n:
            self._segment(line, covered, i, out, next_t)
            return n
        for j in range(min(k, n - 1), max(k - 2, 0), -1):
            nt = covered[j][1]
            if self._implicit_prefix(line, covered[:j], nt) == j:
                self._segment(line, covered[:j], i, out, nt)
                return j
        # a piece through the data itself decodes (almost) exactly
        j = 2 if self._joint and not self._knots and n > 1 else 1
        (_, t0, y0), (_, t1, y1) = covered[0], covered[j - 1]
        a = (y1 - y0) / (t1 - t0) if j == 2 else 0.0
        line = LineCoefficients(a, y0 - a * t0)
        nt = covered[j][1] if j < n else next_t
        if self._implicit_prefix(line, covered[:j], nt) != j:
            raise InternalError(f"cannot place tuple at t={t0!r} within epsilon")
        self._segment(line, covered[:j], i, out, nt)
        return j

    def _counted_prefix(self, line, covered):
        a, b = line
        eps = self.epsilon
        neg = -eps
        for item in covered:
            if not neg < item[2] - (a * item[1] + b) < eps:
                return covered.index(item)
        return len(covered)

    def _implicit_prefix(self, line, covered, next_t):
        """Leading tuples that the knots of this segment reconstruct within epsilon."""
        a, b = line
        t_first = covered[0][1]
        if self._knots and self._joint:
            u, v = self._prev_knot_t, self._prev_knot_v
        else:
            u, v = t_first, a * t_first + b
        if next_t is None:
            tk = _final_knot_time(covered[-1][1], u)
        elif self._joint:
            tk = covered[-1][1]
        else:
            tk = next_t
        if not tk > u:
            return 0
        slope = (a * tk + b - v) / (tk - u)
        eps = self.epsilon
        neg = -eps
        for item in covered:
            if not neg < item[2] - (v + slope * (item[1] - u)) < eps:
                return covered.index(item)
        return len(covered)


    def _segment(self, line, covered, i, out, next_t):
        n = len(covered)
        start = covered[0][0]
        proto = self.protocol
        a, b = line
        if proto == "single-stream":
            out.append(Emission((CountedSegment(n, a, b),), i, start, n))
        elif proto == "two-streams":
            out.append(Emission((QuadSegment(covered[0][1], n, a, b),), i, start, n))
        elif proto == "single-stream-v":
            if self._burst:
                self._flush_burst(i, out)
            out.append(Emission((CountedSegment(n, a, b),), i, start, n))
        else:
            out.append(Emission(self._knot_parts(line, covered, next_t), i, start, n))

    def _knot_parts(self, line, covered, next_t):
        a, b = line
        parts = []
        t_first = covered[0][1]
        if self._knots == 0:
            parts.append(ImplicitJoint(t_first, a * t_first + b))
            self._prev_knot_t = t_first
            self._knots = 1
        elif self._open_disjoint:
            parts.append(ImplicitDisjointTail(a * t_first + b))
        if next_t is None:
            tk = _final_knot_time(covered[-1][1], self._prev_knot_t)
            parts.append(ImplicitJoint(tk, a * tk + b))
            self._open_disjoint = False
        elif self._joint:
            tk = covered[-1][1]
            parts.append(ImplicitJoint(tk, a * tk + b))
            self._open_disjoint = False
        else:
            tk = next_t
            parts.append(ImplicitDisjointHead(tk, a * tk + b))
            self._open_disjoint = True
        self._prev_knot_t = tk
        self._prev_knot_v = parts[-1][1]
        self._knots += 1
        return tuple(parts)

    def _singleton(self, item, i, out):
        idx, _, y = item
        proto = self.protocol
        if proto == "single-stream":
            out.append(Emission((CountedSingleton(y),), i, idx, 1))
        elif proto == "two-streams":
            out.append(Emission((RawSingleton(y),), i, idx, 1))
        else:
            self._burst.append(item)
            if len(self._burst) >= self.burst_cap:
                self._flush_burst(i, out)

    def _flush_burst(self, i, out):
        burst = self._burst
        out.append(
            Emission((SingletonBurst(tuple(item[2] for item in burst)),), i, burst[0][0], len(burst))
        )
        self._burst = []


class EncodeResult(NamedTuple):
    emissions: list
    streams: dict

    @property
    def nbytes(self):
        return sum(e.nbytes for e in self.emissions)


def split_streams(protocol, emissions) -> dict:
    streams = {name: [] for name in stream_names(protocol)}
    for e in emissions:
        for r in e.records:
            streams[stream_of(protocol, r)].append(r)
    return streams


def encode(method, protocol, t, y, epsilon, **kwargs) -> EncodeResult:
    """Compress arrays ``t`` and ``y`` in one go."""
    pipe = Pipeline(method, protocol, epsilon, **kwargs)
    emissions = pipe.run(t, y)
    return EncodeResult(emissions, split_streams(protocol, emissions))


# --------------------------------------------------------------------------
# binary serialisation

MAGIC = b"PLA1"
_HEADER = struct.Struct("<4sBBxxd")
HEADER_SIZE = _HEADER.size  # 16

STREAM_IDS = {
    ("implicit", MAIN_STREAM): 0,
    ("two-streams", SEGMENT_STREAM): 1,
    ("two-streams", SINGLETON_STREAM): 2,
    ("single-stream", MAIN_STREAM): 3,
    ("single-stream-v", MAIN_STREAM): 4,
}
_STREAM_BY_ID = {v: k for k, v in STREAM_IDS.items()}
METHOD_IDS = {name: i for i, name in enumerate(METHODS)}

_D = struct.Struct("<d")
_DD = struct.Struct("<dd")
_QUAD = struct.Struct("<dBdd")
_UBDD = struct.Struct("<Bdd")
_SBDD = struct.Struct("<bdd")
_BD = struct.Struct("<Bd")


class StreamHeader(NamedTuple):
    protocol: str
    stream: str
    method: str
    epsilon: float


def pack_header(protocol, stream, method, epsilon) -> bytes:
    return _HEADER.pack(MAGIC, STREAM_IDS[protocol, stream], METHOD_IDS[method], float(epsilon))


def unpack_header(data: bytes) -> StreamHeader:
    if len(data) < HEADER_SIZE:
        raise TruncatedStream("stream shorter than its 16-byte header")
    magic, pid, mid, eps = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CorruptStream(f"bad magic {magic!r}")
    if pid not in _STREAM_BY_ID or mid >= len(METHODS):
        raise CorruptStream(f"unknown protocol id {pid} or method id {mid}")
    protocol, stream = _STREAM_BY_ID[pid]
    return StreamHeader(protocol, stream, METHODS[mid], eps)


def _check_count(ok, what):
    if not ok:
        raise CorruptStream(f"illegal {what}")


def pack_record(protocol, record) -> bytes:
    kind = type(record)
    if kind is ImplicitJoint:
        return _DD.pack(record.t, record.y)
    if kind is ImplicitDisjointHead:
        return _DD.pack(-record.t, record.y_end)
    if kind is ImplicitDisjointTail or kind is RawSingleton:
        return _D.pack(record[0])
    if kind is QuadSegment:
        _check_count(4 <= record.n <= 256, f"segment length {record.n}")
        return _QUAD.pack(record.t0, record.n - 1, record.a, record.b)
    if kind is CountedSingleton:
        return _BD.pack(1, record.y)
    if kind is CountedSegment:
        if protocol == "single-stream-v":
            _check_count(3 <= record.n <= 127, f"segment length {record.n}")
            return _SBDD.pack(record.n, record.a, record.b)
        _check_count(3 <= record.n <= 256, f"segment length {record.n}")
        return _UBDD.pack(record.n & 0xFF, record.a, record.b)
    if kind is SingletonBurst:
        m = len(record.values)
        _check_count(1 <= m <= 127, f"burst length {m}")
        return struct.pack(f"<b{m}d", -m, *record.values)
    raise TypeError(f"not a compression record: {record!r}")


def records_to_bytes(protocol, records) -> bytes:
    return b"".join(pack_record(protocol, r) for r in records)


def dump_stream(protocol, stream, method, epsilon, records) -> bytes:
    return pack_header(protocol, stream, method, epsilon) + records_to_bytes(protocol, records)


def parse_records(protocol, stream, data, offset=0) -> list:
    """Parse the record payload of one stream (no header)."""
    view = memoryview(data)
    size = len(view)
    pos = offset
    out = []

    def need(k):
        if pos + k > size:
            raise TruncatedStream(f"stream ends inside a record at byte {pos}")

    if protocol == "implicit":
        while pos < size:
            need(16)
            t, y = _DD.unpack_from(view, pos)
            pos += 16
            if t > 0:
                out.append(ImplicitJoint(t, y))
            elif t < 0:
                need(8)
                (ys,) = _D.unpack_from(view, pos)
                pos += 8
                out.append(ImplicitDisjointHead(-t, y))
                out.append(ImplicitDisjointTail(ys))
            else:
                raise CorruptStream(f"knot timestamp {t!r} is neither positive nor negative")
    elif protocol == "two-streams" and stream == SEGMENT_STREAM:
        while pos < size:
            need(25)
            t0, c, a, b = _QUAD.unpack_from(view, pos)
            pos += 25
            _check_count(c >= 3, f"segment counter byte {c}")
            out.append(QuadSegment(t0, c + 1, a, b))
    elif protocol == "two-streams":
        if (size - pos) % 8:
            raise TruncatedStream("singleton stream is not a whole number of values")
        out.extend(RawSingleton(v) for (v,) in _D.iter_unpack(view[pos:]))
    elif protocol == "single-stream":
        while pos < size:
            c = view[pos]
            if c == 1:
                need(9)
                out.append(CountedSingleton(_BD.unpack_from(view, pos)[1]))
                pos += 9
            else:
                _check_count(c != 2, "counter byte 2")
                need(17)
                _, a, b = _UBDD.unpack_from(view, pos)
                pos += 17
                out.append(CountedSegment(c or 256, a, b))
    elif protocol == "single-stream-v":
        while pos < size:
            (c,) = struct.unpack_from("<b", view, pos)
            if c < 0:
                m = -c
                _check_count(m <= 127, f"counter {c}")
                need(1 + 8 * m)
                out.append(SingletonBurst(struct.unpack_from(f"<{m}d", view, pos + 1)))
                pos += 1 + 8 * m
            else:
                _check_count(c >= 3, f"counter {c}")
                need(17)
                _, a, b = _SBDD.unpack_from(view, pos)
                pos += 17
                out.append(CountedSegment(c, a, b))
    else:
        raise BadParams(f"unknown protocol {protocol!r}")
    return out


def load_stream(data: bytes) -> tuple[StreamHeader, list]:
    header = unpack_header(data)
    return header, parse_records(header.protocol, header.stream, data, HEADER_SIZE)


# --------------------------------------------------------------------------
# decoders


def records_to_knots(records):
    """Rebuild knots from implicit-protocol records."""
    it = iter(records)
    for r in it:
        kind = type(r)
        if kind is ImplicitJoint:
            yield Joint(r.t, r.y)
        elif kind is ImplicitDisjointHead:
            tail = next(it, None)
            if tail is None:
                raise TruncatedStream("disjoint knot head without its tail")
            if type(tail) is not ImplicitDisjointTail:
                raise CorruptStream("disjoint knot head not followed by a tail")
            yield Disjoint(r.t, r.y_end, tail.y_start)
        else:
            raise CorruptStream(f"unexpected record {r!r} in implicit stream")


def _take(ts, pos, n):
    if pos + n > len(ts):
        raise TruncatedStream("timestamp stream ends inside a segment")
    return ts[pos : pos + n]


def decode(protocol, timestamps, streams) -> np.ndarray:
    """Reconstructed values, one per timestamp.

    ``streams`` maps stream names to record lists (see :func:`stream_names`);
    a plain record list is accepted for single-stream protocols.
    """
    ts = np.asarray(timestamps, dtype=float)
    if isinstance(streams, dict):
        main = streams.get(MAIN_STREAM)
    else:
        main = list(streams)
        streams = {MAIN_STREAM: main}
    out = np.empty(len(ts))
    n_ts = len(ts)

    if protocol == "implicit":
        k = 0
        for rec in reconstruct(ts.tolist(), records_to_knots(main)):
            out[k] = rec.y_approx
            k += 1
        if k != n_ts:
            raise TruncatedStream("knot stream ended early")
        return out

    pos = 0
    if protocol == "two-streams":
        segs = streams[SEGMENT_STREAM]
        singles = streams[SINGLETON_STREAM]
        si = 0
        gi = 0
        while pos < n_ts:
            t = ts[pos]
            if gi < len(segs) and t >= segs[gi].t0:
                seg = segs[gi]
                _check_count(4 <= seg.n <= 256, f"segment length {seg.n}")
                chunk = _take(ts, pos, seg.n)
                out[pos : pos + seg.n] = seg.a * chunk + seg.b
                pos += seg.n
                gi += 1
            else:
                if si >= len(singles):
                    raise TruncatedStream("singleton stream exhausted")
                out[pos] = singles[si].y
                si += 1
                pos += 1
        if gi != len(segs) or si != len(singles):
            raise CorruptStream("records left over after the last timestamp")
        return out

    if protocol not in ("single-stream", "single-stream-v"):
        raise BadParams(f"unknown protocol {protocol!r}")
    seg_max = 127 if protocol == "single-stream-v" else 256
    ri = 0
    while pos < n_ts:
        if ri >= len(main):
            raise TruncatedStream("record stream exhausted")
        r = main[ri]
        ri += 1
        kind = type(r)
        if kind is CountedSegment:
            _check_count(3 <= r.n <= seg_max, f"segment length {r.n}")
            chunk = _take(ts, pos, r.n)
            out[pos : pos + r.n] = r.a * chunk + r.b
            pos += r.n
        elif kind is CountedSingleton and protocol == "single-stream":
            out[pos] = r.y
            pos += 1
        elif kind is SingletonBurst and protocol == "single-stream-v":
            m = len(r.values)
            _check_count(1 <= m <= 127, f"burst length {m}")
            _take(ts, pos, m)
            out[pos : pos + m] = r.values
            pos += m
        else:
            raise CorruptStream(f"unexpected record {r!r} for {protocol}")
    if ri != len(main):
        raise CorruptStream("records left over after the last timestamp")
    return out


def decode_bytes(timestamps, *blobs) -> np.ndarray:
    """Decode header-prefixed stream(s); two-streams needs both blobs."""
    streams = {}
    protocol = None
    for blob in blobs:
        header, records = load_stream(blob)
        if protocol is not None and header.protocol != protocol:
            raise CorruptStream("streams belong to different protocols")
        protocol = header.protocol
        streams[header.stream] = records
    if protocol is None:
        raise BadParams("no stream given")
    missing = set(stream_names(protocol)) - set(streams)
    if missing:
        raise BadParams(f"missing stream(s): {', '.join(sorted(missing))}")
    return decode(protocol, timestamps, streams)

