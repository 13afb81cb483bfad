import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specular.intervals import IntervalSet
from specular.mirror import (BudgetExhausted, ChainPermutation, Rhombus, Z_shadow, apply_map,
                             build_invisible_mirror, chain_invariants, chain_permutation,
                             chain_step_alpha, compose, copies_of_Z, copy_intervals, diagonal_L,
                             lattice_hit, lattice_point, map_offsets, mirror_segments,
                             nearest_lattice_approx, n1_for, on_lattice, rhombus,
                             signed_chain_permutation, verify_mirror)
from specular.scene import Scene

Q = math.pi / 4


def test_rhombus_square_case():
    R = rhombus(math.pi / 2)
    assert np.allclose(R.vertices, [(0, 0), (0, 1), (-1, 0), (-1, 1)], atol=1e-15)
    L = diagonal_L(math.pi / 2)
    assert np.allclose(L.as_tuple(), (-1, 0, 0, 1), atol=1e-15)


def test_rhombus_quarter_pi():
    R = rhombus(Q)
    r2 = math.sqrt(2)
    assert np.allclose(R.vertices, [(0, 0), (1, 1), (-r2, 0), (1 - r2, 1)], atol=1e-12)
    P = R.polygon()
    sides = np.linalg.norm(np.roll(P, -1, 0) - P, axis=1)
    assert np.allclose(sides, 1 / math.sin(Q), atol=1e-12)


def test_L_bisects():
    L = diagonal_L(Q)
    assert abs(math.atan2(L.q.y - L.p.y, L.q.x - L.p.x) - math.pi / 8) < 1e-12
    # L avoids the origin
    assert abs(L.p.x * L.q.y - L.p.y * L.q.x) > 0.1


def test_apply_map_identity():
    R = Rhombus(0.9)
    assert np.allclose(apply_map(1, [1], R.polygon(), 0.9), R.polygon())


def test_fig4_rows_and_columns():
    s = (3, 1, 2, 4)
    V = copies_of_Z(4, s, Q)
    for k, j in enumerate(s):
        ys = V[k, :, 1]
        assert abs(ys.min() - (j - 1) / 4) < 1e-12 and abs(ys.max() - j / 4) < 1e-12
    assert on_lattice(V.reshape(-1, 2), 4, Q)
    M = mirror_segments(4, s, Q)
    assert M.shape == (4, 4)
    for k in range(4):
        assert np.allclose(M[k, :2], V[k, 3]) and np.allclose(M[k, 2:], V[k, 1])


def test_lattice_membership_random(rng):
    for _ in range(10):
        n = int(rng.integers(1, 9))
        s = rng.permutation(n) + 1
        th = rng.uniform(0.2, 2.9)
        assert on_lattice(copies_of_Z(n, s, th).reshape(-1, 2), n, th)


def test_lattice_hit_square():
    assert lattice_hit(math.pi / 2 + 3 * math.pi / 4, math.pi / 2) == (1, 1)
    with pytest.raises(ValueError):
        lattice_hit(math.pi / 2 + 0.7, 0.7)


def test_lattice_hit_irrational_none():
    a = math.pi / 2 + math.atan2(1, -(1 + 5 ** 0.5) / 2)
    assert lattice_hit(a, math.pi / 2, 50) is None


def test_nearest_matches_hit():
    a = chain_step_alpha(2, 3, Q)
    assert lattice_hit(a, Q) == (2, 3)
    ap = nearest_lattice_approx(a, Q, 1, 1e-6)
    z = lattice_point(2, 3, Q)
    assert (ap.k1, ap.k2) == (2, 3) and abs(ap.z.x - z.x) < 1e-12 and abs(ap.z.y - z.y) < 1e-12


def test_nearest_fibonacci():
    phi = (1 + 5 ** 0.5) / 2
    a = math.pi / 2 + math.atan2(1, -phi)
    fib = [1, 1]
    while fib[-1] < 10 ** 6:
        fib.append(fib[-1] + fib[-2])
    pairs = {(fib[i + 1], fib[i]) for i in range(len(fib) - 1)}
    prev = math.inf
    for d in (1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8):
        ap = nearest_lattice_approx(a, math.pi / 2, 1, d)
        assert (ap.k1, ap.k2) in pairs
        assert ap.rel_error <= d and ap.rel_error <= prev
        prev = ap.rel_error


def test_chain_small_examples():
    cp = chain_permutation(4, 1, 2, enforce_bound=False)
    assert cp.s.tolist() == [1, 3, 2, 4]
    assert cp.chains == [[(1, 1), (2, 3)], [(3, 2), (4, 4)]]
    assert chain_permutation(4, 1, 1, enforce_bound=False).s.tolist() == [1, 2, 3, 4]
    with pytest.raises(ValueError):
        chain_permutation(4, 1, 2)


def test_chain_25_2_3():
    cp = chain_permutation(25, 2, 3)
    inv = chain_invariants(cp)
    assert all(inv.values())
    # every chain runs until one coordinate leaves 1..n
    for c in cp.chains:
        a, b = c[-1]
        assert a + 2 > 25 or b + 3 > 25


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 40))
def test_chain_invariants_property(k1, k2, extra):
    n = 2 * k1 * k2 + 1 + extra
    assert all(chain_invariants(chain_permutation(n, k1, k2)).values())


def test_signed_chain_law():
    for k1, k2 in ((-1, 1), (-2, 3), (3, -1)):
        cp = signed_chain_permutation(30, k1, k2)
        assert all(chain_invariants(cp).values())


def _vertex_key(V):
    return np.round(V.reshape(-1, 2), 9).tolist()


def test_compose_identity_and_small():
    s = np.array([2, 3, 1])
    assert compose(1, [1], 3, s)[1].tolist() == s.tolist()
    assert compose(3, s, 1, [1])[1].tolist() == s.tolist()
    for s1 in itertools.permutations((1, 2)):
        for s2 in itertools.permutations((1, 2)):
            n3, s3 = compose(2, s1, 2, s2)
            assert sorted(s3.tolist()) == [1, 2, 3, 4]
            inner = copies_of_Z(2, s2, Q).reshape(-1, 2)
            outer = apply_map(2, s1, inner, Q).reshape(-1, 4, 2)
            assert np.allclose(outer, copies_of_Z(4, s3, Q), atol=1e-9)


def test_compose_keeps_shadow_bound():
    cp = chain_permutation(30, 1, 2)
    a = chain_step_alpha(1, 2, Q)
    base = Z_shadow(30, cp.s, Q, [a])[0]
    n, s = compose(3, [2, 3, 1], 30, cp.s)
    assert Z_shadow(n, s, Q, [a])[0] < base + 1e-12


def test_chain_projection_identity():
    for k1, k2 in ((1, 2), (2, 1), (-1, 1), (2, 3)):
        a = chain_step_alpha(k1, k2, Q)
        n = 2 * abs(k1 * k2) + 20
        cp = signed_chain_permutation(n, k1, k2)
        iv = copy_intervals(n, cp.s, Q, a)
        for c in cp.chains:
            sets = [IntervalSet([iv[j - 1]]) for j, _ in c]
            assert all(sets[0].approx_equal(t, 1e-9) for t in sets[1:])


def test_single_copy_shadow_bound(rng):
    R = Rhombus(Q)
    for n in (3, 7, 20):
        s = rng.permutation(n) + 1
        for a in rng.uniform(0, math.pi, 10):
            iv = copy_intervals(n, s, Q, a)
            assert np.all(iv[:, 1] - iv[:, 0] <= R.ell / n + 1e-9)


def test_shadow_continuity():
    cp = chain_permutation(40, 1, 2)
    a = np.arange(0, math.pi, 1e-3)
    m = Z_shadow(40, cp.s, Q, a)
    assert np.max(np.abs(np.diff(m))) < 40 * 2 * Rhombus(Q).ell * 1e-3


def test_n1_chains_long():
    n1 = n1_for(1, 2, Q, 0.5)
    assert n1 > 4 and n1 % 2 == 0


def test_single_alpha_stage_shrinks_shadow():
    a = chain_step_alpha(1, 2, Q)
    G, rep = build_invisible_mirror(Q, 0.5, alphas=[a], budget=10_000)
    assert rep.shadows[0] < Z_shadow(1, [1], Q, [a])[0]
    st = rep.stages[0]
    assert st["shadow_at_alpha"] < 0.25


def test_single_diagonal_part_i():
    G = Scene(mirror_segments(1, [1], Q))
    rep = verify_mirror(G, Q, 0.5, 200)
    assert rep.part_i["passed"] and rep.part_i["single_bounce"] == 200


def test_boundary_ray_degenerate():
    G = Scene(mirror_segments(4, [3, 1, 2, 4], Q), {"n_star": "4"})
    rep = verify_mirror(G, Q, 0.5, 4)  # heights 1/8, 3/8, ... avoid boundaries
    assert rep.part_i["degenerate"] == 0
    rep = verify_mirror(G, Q, 0.5, 2)  # heights 1/4 and 3/4 hit sub-rhombus corners
    assert rep.part_i["degenerate"] == 2 and rep.part_i["non_degenerate"] == 0


def test_mirror_budget_and_coverage():
    G, rep = build_invisible_mirror(Q, 0.5, budget=64)
    assert rep.n_star <= 64 and len(G) == rep.n_star
    v = verify_mirror(G, Q, 0.5, 500, [math.pi / 2 + Q / 2])
    assert v.part_i["passed"] and v.shadows[0] < 0.5
