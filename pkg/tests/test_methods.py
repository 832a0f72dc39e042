import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import walk
from oracles import feasible, lstsq_line, min_segments, valid_scan
from plastream.exceptions import BadParams, NonFiniteValue, NonMonotonicTime
from plastream.geometry import angle_origin, fixed_origin_feasible
from plastream.methods import METHODS, make_method


def covered(segs, t, y):
    for s in segs:
        sl = slice(s.start_index, s.start_index + s.length)
        yield s, t[sl], y[sl]


def assert_valid(segs, t, y, eps):
    assert sum(s.length for s in segs) == len(t)
    pos = 0
    for s, tt, yy in covered(segs, t, y):
        assert s.start_index == pos and s.start_t == tt[0]
        assert valid_scan(tt, yy, s.line.a, s.line.b, eps), s
        pos += s.length


@pytest.mark.parametrize("name", METHODS)
def test_constant_stream_is_one_exact_segment(name):
    m = make_method(name, 0.1)
    out = []
    for k in range(10):
        out += m.push(float(k), 5.0)
    assert out == []
    (seg,) = m.finish()
    assert seg.length == 10
    assert [seg.line(k) for k in range(10)] == [5.0] * 10
    if name in ("linear", "disjoint"):
        assert seg.line == (0.0, 5.0)


@pytest.mark.parametrize("name", ["angle", "disjoint", "linear"])
def test_alternating_breaks_every_pair(name):
    t = np.arange(20.0)
    y = np.where(np.arange(20) % 2, 4.0, 0.0)
    segs = make_method(name, 1.0).run(t, y)
    assert [s.length for s in segs] == [2] * 10


@pytest.mark.parametrize("name", METHODS)
def test_cap_bounds_segment_length(name, rng):
    t, y = walk(rng, 10_000, sigma=0.05)
    segs = make_method(name, 1.0, max_length=256).run(t, y)
    assert max(s.length for s in segs) == 256
    assert_valid(segs, t, y, 1.0)


def test_full_segment_closes_on_the_next_tuple():
    m = make_method("disjoint", 1.0, max_length=4)
    closed = [m.push(float(k), 0.0) for k in range(5)]
    assert [len(c) for c in closed] == [0, 0, 0, 0, 1]
    assert closed[4][0].length == 4 and m.buffered == 1


@pytest.mark.parametrize("name", METHODS)
def test_finish_empty(name):
    assert make_method(name, 1.0).finish() == []


def test_finish_single_tuple():
    m = make_method("linear", 1.0)
    m.push(7.0, 3.0)
    (seg,) = m.finish()
    assert seg.length == 1 and seg.line == (0.0, 3.0)


def test_swing_finish_is_joined():
    m = make_method("swing", 1.0)
    for k in range(3):
        m.push(float(k), float(k))
    (seg,) = m.finish()
    assert seg.length == 3 and seg.joined_to_previous


@pytest.mark.parametrize("name", METHODS)
def test_rejects_bad_input(name):
    m = make_method(name, 1.0)
    m.push(1.0, 0.0)
    with pytest.raises(NonMonotonicTime):
        m.push(1.0, 0.0)
    with pytest.raises(NonFiniteValue):
        m.push(2.0, math.nan)


@pytest.mark.parametrize("eps", [0, -1, math.inf, math.nan])
def test_bad_epsilon(eps):
    with pytest.raises(BadParams):
        make_method("angle", eps)


def test_bad_cap_and_name():
    with pytest.raises(BadParams):
        make_method("angle", 1.0, max_length=1)
    with pytest.raises(BadParams):
        make_method("optimal", 1.0)


def test_state_survives_finish():
    # after finish, later pushes must still respect time order
    m = make_method("angle", 1.0)
    m.push(1.0, 0.0)
    m.finish()
    with pytest.raises(NonMonotonicTime):
        m.push(0.5, 0.0)


streams = st.integers(2, 60).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0.05, 3.0), min_size=n, max_size=n),
        st.lists(st.floats(-3.0, 3.0), min_size=n, max_size=n),
    )
)


@pytest.mark.parametrize("name", METHODS)
@given(data=streams, eps=st.sampled_from([0.1, 0.5, 2.0]), cap=st.sampled_from([0, 2, 5]))
def test_every_segment_is_valid(name, data, eps, cap):
    gaps, steps = data
    t = np.cumsum(gaps)
    y = np.cumsum(steps)
    segs = make_method(name, eps, max_length=cap).run(t, y)
    assert_valid(segs, t, y, eps)
    if cap:
        assert all(s.length <= cap for s in segs)


def test_angle_is_greedy(rng):
    for _ in range(100):
        t, y = walk(rng, 60, spacing="irregular")
        segs = make_method("angle", 1.0).run(t, y)
        for s, tt, yy in covered(segs[:-1], t, y):
            if s.length < 2:
                continue
            apex = angle_origin((tt[0], yy[0]), (tt[1], yy[1]), 1.0)
            j = s.start_index + s.length
            pts = list(zip(tt[1:], yy[1:])) + [(t[j], y[j])]
            assert not fixed_origin_feasible(apex, pts, 1.0)


def test_disjoint_is_greedy(rng):
    for _ in range(100):
        t, y = walk(rng, 60, spacing="irregular")
        segs = make_method("disjoint", 1.0).run(t, y)
        for s in segs[:-1]:
            j = s.start_index + s.length
            assert not feasible(t[s.start_index : j + 1], y[s.start_index : j + 1], 1.0)


def test_disjoint_is_optimal(rng):
    for _ in range(40):
        n = int(rng.integers(5, 40))
        t, y = walk(rng, n, spacing="irregular")
        for eps in (0.3, 1.0):
            segs = make_method("disjoint", eps).run(t, y)
            assert len(segs) == min_segments(t, y, eps)


def test_linear_is_least_squares(rng):
    for _ in range(60):
        t, y = walk(rng, 200, spacing="irregular")
        for s, tt, yy in covered(make_method("linear", 1.0).run(t, y), t, y):
            if s.length < 2:
                continue
            a, b = lstsq_line(tt, yy)
            assert s.line.a == pytest.approx(a, rel=1e-9, abs=1e-12)
            assert s.line(tt[0]) == pytest.approx(a * tt[0] + b, rel=1e-9, abs=1e-9)


def test_swing_segments_meet(rng):
    for _ in range(50):
        t, y = walk(rng, 300, spacing="irregular")
        segs = make_method("swing", 1.0).run(t, y)
        assert all(s.joined_to_previous for s in segs)
        for prev, cur in zip(segs, segs[1:]):
            end = t[cur.start_index - 1]
            assert cur.line(end) == pytest.approx(prev.line(end), rel=1e-9, abs=1e-9)
        assert_valid(segs, t, y, 1.0)


def test_swing_resume_starts_from_apex():
    m = make_method("swing", 0.5)
    m.resume((1.0, 2.0))
    assert m.push(2.0, 3.0) == []
    assert m.push(3.0, 4.0) == []
    (seg,) = m.finish()
    assert seg.joined_to_previous
    assert seg.line.a * 1.0 + seg.line.b == pytest.approx(2.0)
    assert seg.line.a == pytest.approx(1.0)
