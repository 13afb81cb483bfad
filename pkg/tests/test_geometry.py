import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from specular.geometry import (DirectedLine, Direction, Point, Segment, ray_segment_hit,
                               reflect_direction)

angles = st.floats(0, 2 * math.pi, allow_nan=False)


def test_reflect_45_mirror():
    r = reflect_direction(Direction.from_vector(1, 0), Direction.from_vector(1, -1))
    assert abs(r.x) < 1e-12 and abs(r.y + 1) < 1e-12


def test_reflect_parallel_and_normal():
    m = Direction.from_angle(0.7)
    r = reflect_direction(m, m)
    assert abs(r.x - m.x) < 1e-12 and abs(r.y - m.y) < 1e-12
    n = Direction.from_angle(0.7 + math.pi / 2)
    r = reflect_direction(n, m)
    assert abs(r.x + n.x) < 1e-12 and abs(r.y + n.y) < 1e-12


@given(angles, angles)
def test_reflect_involution_unit(a, b):
    v, m = Direction.from_angle(a), Direction.from_angle(b)
    r = reflect_direction(v, m)
    assert abs(math.hypot(r.x, r.y) - 1) < 1e-12
    rr = reflect_direction(r, m)
    assert abs(rr.x - v.x) < 1e-12 and abs(rr.y - v.y) < 1e-12


@given(st.floats(0, math.pi, allow_nan=False))
def test_slope_minus_one_turns_normal_into_reflected(theta):
    v = Direction.from_angle(theta + math.pi / 2)
    r = reflect_direction(v, Direction.from_vector(1, -1))
    assert abs(r.x - math.cos(math.pi - theta)) < 1e-12
    assert abs(r.y - math.sin(math.pi - theta)) < 1e-12


def test_direction_angle_range():
    d = Direction.from_vector(0, -2)
    assert 0 <= d.angle < 2 * math.pi
    assert abs(d.angle - 1.5 * math.pi) < 1e-12


def test_segment_rejects_degenerate():
    with pytest.raises(ValueError):
        Segment((1, 1), (1, 1))
    with pytest.raises(ValueError):
        Segment((0, 0), (math.inf, 1))


def test_hit_interior():
    h = ray_segment_hit(Point(0, 0.5), Direction.from_vector(1, 0), Segment((1, 0), (1, 1)))
    assert h.kind == "interior" and abs(h.t - 1) < 1e-12
    assert abs(h.point.x - 1) < 1e-12 and abs(h.point.y - 0.5) < 1e-12


def test_hit_endpoint():
    h = ray_segment_hit(Point(0, 0), Direction.from_vector(1, 0), Segment((1, 0), (1, 1)))
    assert h.kind == "endpoint" and abs(h.t - 1) < 1e-12


def test_hit_miss():
    assert ray_segment_hit(Point(0, 2), Direction.from_vector(1, 0), Segment((1, 0), (1, 1))) is None


def test_hit_behind_origin_ignored():
    assert ray_segment_hit(Point(2, 0.5), Direction.from_vector(1, 0), Segment((1, 0), (1, 1))) is None


def test_directed_line_canonical():
    v = Direction.from_angle(0.3)
    L = DirectedLine.through(v, (2.0, 1.0))
    assert abs(L.v.x * L.w.x + L.v.y * L.w.y) < 1e-12
    with pytest.raises(ValueError):
        DirectedLine(v, Point(1.0, 0.0))


def test_from_coords_roundtrip():
    L = DirectedLine.from_coords(0.4, 0.6, 1)
    assert abs(math.hypot(*L.w) - 0.6) < 1e-12
    assert abs(L.v.x * L.w.x + L.v.y * L.w.y) < 1e-12


def test_reflect_batch_random(rng):
    a = rng.uniform(0, 2 * np.pi, (1000, 2))
    for x, y in a:
        v, m = Direction.from_angle(x), Direction.from_angle(y)
        rr = reflect_direction(reflect_direction(v, m), m)
        assert abs(rr.x - v.x) < 1e-12 and abs(rr.y - v.y) < 1e-12
