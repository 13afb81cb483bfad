import math

import numpy as np
import pytest

from specular import _backend
from specular.geometry import Direction
from specular.intervals import IntervalSet
from specular.mirror import diagonal_L
from specular.scene import Scene
from specular.tracer import (CapExceeded, ST_DEGENERATE, ST_OK, bundle_transport, trace,
                             trace_lines, trace_many)


def test_empty_scene_passes_through():
    p = trace(Scene(), Direction.from_angle(0.3), (-0.2 * math.sin(0.3), 0.2 * math.cos(0.3)))
    assert p.bounces == 0 and p.exit is not None
    assert abs(p.exit.w.x - p.entry.w.x) < 1e-15 and abs(p.exit.w.y - p.entry.w.y) < 1e-15


def test_single_diagonal_reflects_to_theta():
    sc = Scene([diagonal_L(math.pi / 4).as_tuple()])
    p = trace(sc, Direction.from_angle(0.0), (0.0, 0.5))
    assert p.bounces == 1
    assert abs(p.exit.v.x - math.cos(math.pi / 4)) < 1e-12
    assert abs(p.exit.v.y - math.sin(math.pi / 4)) < 1e-12


def test_time_reversal(rng):
    segs = []
    for _ in range(30):
        c = rng.uniform(-1, 1, 2)
        a = rng.uniform(0, math.pi)
        d = 0.15 * np.array([math.cos(a), math.sin(a)])
        segs.append(np.concatenate((c - d, c + d)))
    sc = Scene(np.array(segs))
    for k in range(20):
        th = rng.uniform(0, 2 * math.pi)
        v = Direction.from_angle(th)
        r = rng.uniform(-1, 1)
        p = trace(sc, v, (-r * v.y, r * v.x))
        if p.degenerate or p.cap_exceeded:
            continue
        back = trace(sc, Direction.from_vector(-p.exit.v.x, -p.exit.v.y), p.exit.w)
        assert back.bounces == p.bounces
        assert abs(back.exit.v.x + v.x) < 1e-9 and abs(back.exit.v.y + v.y) < 1e-9
        assert abs(back.exit.w.x - p.entry.w.x) < 1e-9 and abs(back.exit.w.y - p.entry.w.y) < 1e-9


def test_exit_canonical(rng):
    sc = Scene(rng.uniform(-1, 1, (40, 4)))
    th = rng.uniform(0, 2 * np.pi, 200)
    v = np.column_stack((np.cos(th), np.sin(th)))
    r = rng.uniform(-1, 1, 200)
    w = r[:, None] * np.column_stack((-v[:, 1], v[:, 0]))
    res = trace_lines(sc, v, w)
    ew = res.exit_w()
    ok = res.status == ST_OK
    assert np.all(np.abs(np.einsum("ij,ij->i", ew[ok], res.dirs[ok])) < 1e-9)
    assert np.allclose(np.linalg.norm(res.dirs, axis=1), 1, atol=1e-12)


def test_endpoint_hit_is_degenerate():
    sc = Scene([((1, 0), (1, 1))])
    res = trace_many(sc, np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]]))
    assert res.status[0] == ST_DEGENERATE


def test_cap_exceeded_flagged():
    # periscope: two bounces
    sc = Scene([((0, 0), (1, 1)), ((0, 3), (1, 4))])
    p = trace(sc, Direction.from_angle(0.0), (0.0, 0.5))
    assert p.bounces == 2 and not p.cap_exceeded
    assert abs(p.exit.v.x - 1) < 1e-12
    p = trace(sc, Direction.from_angle(0.0), (0.0, 0.5), cap=1)
    assert p.cap_exceeded and p.exit is None
    with pytest.raises(CapExceeded):
        trace(sc, Direction.from_angle(0.0), (0.0, 0.5), cap=1, raise_on_cap=True)


def test_threads_do_not_change_results(rng):
    sc = Scene(rng.uniform(-1, 1, (60, 4)))
    o = rng.uniform(-3, -2, (5000, 2))
    d = rng.normal(size=(5000, 2))
    d /= np.linalg.norm(d, axis=1)[:, None]
    a = trace_many(sc, o, d, threads=1, chunk=512)
    b = trace_many(sc, o, d, threads=3, chunk=512)
    for x, y in zip((a.pos, a.dirs, a.bounces, a.status), (b.pos, b.dirs, b.bounces, b.status)):
        assert np.array_equal(x, y)


def test_backends_agree(rng):
    sc = Scene(rng.uniform(-1, 1, (50, 4)))
    o = rng.uniform(-3, -2, (300, 2))
    d = rng.normal(size=(300, 2))
    d /= np.linalg.norm(d, axis=1)[:, None]
    before = _backend.name
    try:
        _backend.use("python")
        a = trace_many(sc, o, d)
        _backend.use(before)
        b = trace_many(sc, o, d)
    finally:
        _backend.use(before)
    assert np.array_equal(a.status, b.status) and np.array_equal(a.bounces, b.bounces)
    assert np.allclose(a.pos, b.pos, atol=1e-9) and np.allclose(a.dirs, b.dirs, atol=1e-12)


def _parallel_family(rng, k):
    segs = []
    for _ in range(k):
        x, y = rng.uniform(-1, 1, 2)
        h = rng.uniform(0.05, 0.5)
        segs.append((x, y, x + h, y - h))
    return Scene(np.array(segs))


def test_bundle_no_mirrors():
    r = bundle_transport(Scene(), 0.4, IntervalSet([(-1, 1)]), 2000)
    assert abs(r.b2 - 2) < 1e-12 and r.b3 == 0


def test_bundle_one_spanning_mirror():
    sc = Scene([((-5, 5), (5, -5))])
    r = bundle_transport(sc, 0.4, IntervalSet([(-1, 1)]), 2000)
    assert r.b2 == 0 and abs(r.b3 - 2) < 1e-12
    assert abs(r.dir_B3 - (math.pi - 0.4)) < 1e-12


def test_bundle_conservation_and_dichotomy(rng):
    for _ in range(5):
        sc = _parallel_family(rng, 8)
        th = rng.uniform(0.05, math.pi - 0.05)
        n = 4000
        r = bundle_transport(sc, th, IntervalSet([(-1.5, 1.5)]), n)
        assert r.mixed == 0
        assert abs(r.b2 + r.b3 - r.b1) <= 2 * r.b1 / n
