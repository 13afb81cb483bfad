import math

import numpy as np
import pytest

from specular.blocks import Schedule, schedule_scene
from specular.urchin import (BlockTooWide, Infeasible, block_for, build_urchin, chord,
                             rectangle_M, solve_parameters)


@pytest.fixture(scope="module")
def small():
    p = solve_parameters(0.5, 20, 0.1, eps1_floor=0.25)
    unit = schedule_scene(Schedule(((2, 1.9), (2, 2.6)), 0.2725, 1.13, (0.245, 0.30)))
    return p, unit, build_urchin(p, block_for(p, unit))


def test_rejects_N16():
    with pytest.raises(Infeasible):
        solve_parameters(0.5, 16)


def test_default_N_is_20():
    assert solve_parameters(0.5).N == 20


def test_chord_and_q():
    p = solve_parameters(0.5, 20, 0.1)
    assert abs(chord(20, 0.1) - 0.0312869) < 1e-7
    assert abs(p.q - 2 * 0.1 * math.sin(math.pi / 20)) < 1e-12
    a0, a1 = p.a(0), p.a(1)
    assert abs(math.hypot(a1.x - a0.x, a1.y - a0.y) - p.q) < 1e-12


def test_strict_at_eps_one():
    p = solve_parameters(1.0)
    assert p.strict and p.eps1 > 0
    assert p.ineq1_lhs < p.ineq1_rhs and p.ineq2_lhs < p.ineq2_rhs


def test_relaxed_flag():
    p = solve_parameters(0.5, 20, 0.1, eps1_floor=0.25)
    assert not p.strict and p.eps1 == 0.25


def test_rectangle_M():
    p = solve_parameters(0.5, 20, 0.1)
    R = rectangle_M(0, p)
    assert abs(R[0].x - 0.1 * math.cos(-math.pi / 20)) < 1e-15
    assert abs(R[1].y - 0.1 * math.sin(math.pi / 20)) < 1e-15
    for v in R[2:]:
        assert abs(math.hypot(*v) - 1) < 1e-12
    assert abs(math.hypot(R[1].x - R[0].x, R[1].y - R[0].y) - p.q) < 1e-12
    # sides are perpendicular and 0 is outside (the rectangle lies at x > 0)
    assert min(v.x for v in R) > 0


def test_jstar_and_count(small):
    p, unit, u = small
    assert p.jstar == 27
    assert len(u.scene) == len(unit) * (p.jstar + 1) * p.N
    assert p.jstar <= math.ceil(p.N / (math.pi * p.r1))


def test_inside_disc(small):
    _, _, u = small
    pts = u.scene.points()
    assert np.all(np.hypot(pts[:, 0], pts[:, 1]) <= 1 + 1e-9)


def test_rotation_invariance(small):
    p, _, u = small
    rot = u.scene.transformed(phi=2 * math.pi / p.N).segs
    key = lambda a: a[np.lexsort(np.round(a, 7).T[::-1])]
    assert np.allclose(key(rot), key(u.scene.segs), atol=1e-9)


def test_provenance(small):
    p, unit, u = small
    assert set(np.unique(u.spike)) == set(range(p.N))
    assert u.slot.max() == p.jstar


def test_block_too_wide():
    p = solve_parameters(0.5, 20, 0.999)
    assert p.jstar < 0
    with pytest.raises(BlockTooWide):
        build_urchin(p, schedule_scene(Schedule(((2, 1.9),), 0.27, 1.0, (0.245, 0.3))))
