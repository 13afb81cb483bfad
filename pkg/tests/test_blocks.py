import math

import numpy as np
import pytest

from specular.blocks import (ARCTAN_THIRD, BlockSpec, Diamond, Schedule, diamond_scene,
                             diamond_segments, schedule_scene, slopes_minus_one, verify_block,
                             venetian_blind)
from specular.projection import project_scene, shadow_profile
from specular.scene import Scene


def test_diamond_segments_example():
    segs = diamond_segments(Diamond((0, 0), 1))
    got = [(tuple(a), tuple(b)) for a, b in segs]
    assert got == [((0, 0), (1, -1)), ((1, 1), (2, 0)), ((0.5, 0.5), (1.5, -0.5))]


def test_diamond_scaling():
    a = diamond_scene([Diamond((0, 0), 1)]).segs
    b = diamond_scene([Diamond((0, 0), 0.5)]).segs
    assert np.allclose(a * 0.5, b)


def test_three_segments_shadow_equals_diamond(rng):
    for _ in range(10):
        d = Diamond(tuple(rng.uniform(-1, 1, 2)), rng.uniform(0.1, 1))
        sc = diamond_scene([d])
        V = np.array(d.vertices())
        for t in np.linspace(0, ARCTAN_THIRD - 1e-6, 25):
            p = V @ [math.cos(t), math.sin(t)]
            iv = project_scene(sc, t).intervals
            assert len(iv) == 1
            assert abs(iv[0, 0] - p.min()) < 1e-12 and abs(iv[0, 1] - p.max()) < 1e-12


def test_spec_validation():
    with pytest.raises(ValueError):
        BlockSpec(eps=1.0)
    with pytest.raises(ValueError):
        BlockSpec(theta1=0.33)
    with pytest.raises(ValueError):
        BlockSpec(rho=0)


def test_empty_scene_fails_low_range():
    rep = verify_block(Scene(), BlockSpec(), 1e-3)
    assert not rep.accepted and abs(rep.bad_low - 0.30) < 1e-9


def test_lone_segment_not_accepted():
    rep = verify_block(Scene([((0, 0), (1, -1))]), BlockSpec(), 1e-3)
    assert rep.bad_high > 0.25 and not rep.accepted


def test_venetian_blind_contiguous_at_theta_c():
    tc = 0.27
    xy, h = venetian_blind([(3, 2.0), (2, 1.7)], tc, 1.0)
    c, s = math.cos(tc), math.sin(tc)
    lo = xy @ [c, s]
    hi = lo + h * (c - s)
    o = np.argsort(lo)
    assert np.allclose(lo[o][1:], hi[o][:-1], atol=1e-12)


def test_venetian_blind_collapses_at_last_level_angle():
    phi = 2.0
    xy, h = venetian_blind([(4, phi)], 0.27, 1.0)
    p = xy @ [math.cos(phi), math.sin(phi)]
    assert np.ptp(p) < 1e-12


def test_schedule_scene_slopes_and_scaling():
    sch = Schedule(((2, 1.9), (2, 2.6)), 0.27, 1.1, (0.245, 0.30))
    sc = schedule_scene(sch)
    assert slopes_minus_one(sc) and len(sc) == 4
    big = schedule_scene(sch, 2.0)
    assert np.allclose(big.segs, 2 * sc.segs)


def test_scaling_convention():
    sch = Schedule(((4, 1.647), (2, 2.43), (2, 1.46)), 0.2725, 1.13, (0.245, 0.30))
    sc = schedule_scene(sch)
    r1 = verify_block(sc, BlockSpec(1.0, 0.30, 0.25), 1e-3)
    r2 = verify_block(sc.transformed(scale=0.5), BlockSpec(0.5, 0.30, 0.25), 1e-3)
    assert r1.accepted == r2.accepted
    assert abs(r1.bad_low - r2.bad_low) < 1e-9 and abs(r1.bad_high - r2.bad_high) < 1e-9


def test_window_has_near_interval_shadow():
    sch = Schedule(((4, 1.647), (2, 2.43)), 0.2725, 1.13, (0.245, 0.30))
    sc = schedule_scene(sch)
    _, sd = shadow_profile(sc, [0.245, 0.30], 1.0)
    # placement puts the left end of the shadow at 0 at both window angles
    for t in (0.245, 0.30):
        assert abs(project_scene(sc, t).intervals[0, 0]) < 1e-12
