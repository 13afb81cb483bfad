"""The invisible mirror: subdivided rhombi, chain permutations and their composition."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import Point, Segment
from .intervals import IntervalSet
from .projection import shadow_profile
from .scene import Scene
from .tracer import ST_DEGENERATE, ST_OK, trace_many


class BudgetExhausted(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# rhombus, maps, lattice


@dataclass(frozen=True)
class Rhombus:
    theta: float

    def __post_init__(self):
        if not 0 < self.theta < math.pi:
            raise ValueError("theta must lie in (0, pi)")

    @property
    def vertices(self) -> list[Point]:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return [Point(0.0, 0.0), Point(c / s, 1.0), Point(-1 / s, 0.0), Point((c - 1) / s, 1.0)]

    @property
    def diagonal_L(self) -> tuple[Point, Point]:
        v = self.vertices
        return (v[2], v[1])

    @property
    def other_diagonal(self) -> tuple[Point, Point]:
        v = self.vertices
        return (v[0], v[3])

    @property
    def ell(self) -> float:
        """Length of the longer diagonal."""
        a, b = self.diagonal_L
        c, d = self.other_diagonal
        return max(math.hypot(b.x - a.x, b.y - a.y), math.hypot(d.x - c.x, d.y - c.y))

    def polygon(self) -> np.ndarray:
        """Vertices in boundary order (0,0), (cos/sin, 1), ((cos-1)/sin, 1), (-1/sin, 0)."""
        v = self.vertices
        return np.array([v[0], v[1], v[3], v[2]], dtype=float)


def rhombus(theta: float) -> Rhombus:
    return Rhombus(theta)


def diagonal_L(theta: float) -> Segment:
    return Segment(*Rhombus(theta).diagonal_L)


def _perm(s: Sequence[int]) -> np.ndarray:
    a = np.asarray(s, dtype=np.int64).ravel()
    if not np.array_equal(np.sort(a), np.arange(1, a.size + 1)):
        raise ValueError("s must be a permutation of 1..n")
    return a


def map_offsets(n: int, s: Sequence[int], theta: float) -> np.ndarray:
    """Translation of copy k (row k-1): -(k-1)/(n sin) + (s_k - 1) e^{i theta}/(n sin)."""
    s = _perm(s)
    if s.size != n:
        raise ValueError("permutation length must equal n")
    sn = n * math.sin(theta)
    k = np.arange(n)
    j = s - 1
    return np.column_stack((-k / sn + j * math.cos(theta) / sn, j * math.sin(theta) / sn))


def apply_map(n: int, s: Sequence[int], A, theta: float):
    """M_{n,s}(A) for a point array (m, 2) or segment array (m, 4).

    Returns an array with the n copies stacked in order k = 1..n.
    """
    A = np.asarray(A, dtype=float)
    off = map_offsets(n, s, theta)
    if A.ndim == 2 and A.shape[1] == 4:
        sh = np.hstack((off, off))
    else:
        A = A.reshape(-1, 2)
        sh = off
    return (A[None, :, :] / n + sh[:, None, :]).reshape(-1, A.shape[1])


def copies_of_Z(n: int, s: Sequence[int], theta: float) -> np.ndarray:
    """(n, 4, 2) vertex array of the rhombi M_{n,s,k}(Z)."""
    poly = Rhombus(theta).polygon()
    return apply_map(n, s, poly, theta).reshape(n, 4, 2)


def Z_diagonals(n: int, s: Sequence[int], theta: float) -> np.ndarray:
    """Both diagonals of every copy; their shadows union to the copy's shadow."""
    R = Rhombus(theta)
    d = np.array([[*R.diagonal_L[0], *R.diagonal_L[1]], [*R.other_diagonal[0], *R.other_diagonal[1]]])
    return apply_map(n, s, d, theta)


def mirror_segments(n: int, s: Sequence[int], theta: float) -> np.ndarray:
    return apply_map(n, s, np.array([diagonal_L(theta).as_tuple()]), theta)


def lattice_point(k1: int, k2: int, theta: float, n: int = 1) -> Point:
    """-k1/(n sin) + k2 e^{i theta}/(n sin); the sign convention matches the chain step."""
    sn = n * math.sin(theta)
    return Point((-k1 + k2 * math.cos(theta)) / sn, k2 * math.sin(theta) / sn)


def on_lattice(pts: np.ndarray, n: int, theta: float, tol: float = 1e-9) -> bool:
    """All points are integer combinations of 1/(n sin) and e^{i theta}/(n sin)."""
    pts = np.asarray(pts, float).reshape(-1, 2)
    sn = n * math.sin(theta)
    b = pts[:, 1] * sn / math.sin(theta)
    a = pts[:, 0] * sn - b * math.cos(theta)
    return bool(np.all(np.abs(a - np.round(a)) <= tol * n) and np.all(np.abs(b - np.round(b)) <= tol * n))


def _excluded(alpha: float, theta: float) -> bool:
    phi = (alpha - math.pi / 2) % math.pi
    return min(phi, math.pi - phi) < 1e-12 or abs(phi - theta % math.pi) < 1e-12


def lattice_hit(alpha: float, theta: float, K_max: int = 50) -> Optional[tuple[int, int]]:
    """Smallest positive (k1, k2) <= K_max with z on K_{alpha - pi/2} within 1e-9."""
    if _excluded(alpha, theta):
        raise ValueError("alpha - pi/2 must avoid 0 and theta (mod pi)")
    u = (math.cos(alpha - math.pi / 2), math.sin(alpha - math.pi / 2))
    best = None
    for tot in range(2, 2 * K_max + 1):
        for k1 in range(max(1, tot - K_max), min(K_max, tot - 1) + 1):
            k2 = tot - k1
            z = lattice_point(k1, k2, theta)
            if abs(z.x * u[1] - z.y * u[0]) <= 1e-9:
                best = (k1, k2)
                break
        if best:
            break
    return best


@dataclass
class LatticeApprox:
    k1: int
    k2: int
    z: Point
    rel_error: float  # distance to the line divided by |z|


def nearest_lattice_approx(alpha: float, theta: float, n: int = 1, delta: float = 1e-3,
                           bound: int = 10**6) -> LatticeApprox:
    """Lattice point of L_{n,theta} of least norm within delta |z| of K_{alpha - pi/2}.

    (k1, k2) may have any signs; z = -k1/(n sin) + k2 e^{i theta}/(n sin).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if _excluded(alpha, theta):
        raise ValueError("alpha - pi/2 must avoid 0 and theta (mod pi)")
    ph = alpha - math.pi / 2
    u = np.array([math.cos(ph), math.sin(ph)])
    c, s = math.cos(theta), math.sin(theta)
    B = 64
    while True:
        k2 = np.arange(0, B + 1, dtype=np.float64)
        # exact solution of cross(z, u) = 0 for k1 given k2: (-k1 + k2 c) u_y - k2 s u_x = 0
        if abs(u[1]) > 1e-15:
            k1s = k2 * c - k2 * s * u[0] / u[1]
            cand = np.concatenate((np.floor(k1s), np.ceil(k1s)))
            kk2 = np.concatenate((k2, k2))
        else:
            cand = np.zeros(0)
            kk2 = np.zeros(0)
        # k2 = 0 row: points on the real axis
        cand = np.concatenate((cand, np.arange(1, B + 1, dtype=np.float64)))
        kk2 = np.concatenate((kk2, np.zeros(B)))
        zx = (-cand + kk2 * c) / (n * s)
        zy = kk2 * s / (n * s)
        nz = np.hypot(zx, zy)
        ok = (nz > 0) & (np.abs(cand) <= bound) & (kk2 <= bound)
        err = np.full(nz.shape, np.inf)
        err[ok] = np.abs(zx[ok] * u[1] - zy[ok] * u[0]) / nz[ok]
        good = np.flatnonzero(err <= delta)
        if good.size:
            i = good[np.lexsort((err[good], nz[good]))[0]]
            k1, kk = int(cand[i]), int(kk2[i])
            return LatticeApprox(k1, kk, Point(float(zx[i]), float(zy[i])), float(err[i]))
        if B >= bound:
            raise BudgetExhausted("no lattice point within the coefficient bound")
        B = min(bound, B * 16)


# ---------------------------------------------------------------------------
# chains


@dataclass
class ChainPermutation:
    n: int
    s: np.ndarray  # 1-based values, s[j-1] = s(j)
    step: tuple[int, int]
    chains: list  # list of lists of (j1, j2), each starting at its root
    reversed: bool = False  # True when built for a negative first step

    def __call__(self, j: int) -> int:
        return int(self.s[j - 1])

    @property
    def roots(self) -> list[tuple[int, int]]:
        return [c[0] for c in self.chains]


def chain_permutation(n1: int, k1: int, k2: int, enforce_bound: bool = True) -> ChainPermutation:
    """Maximal forward chains from successive minimal roots until s is a permutation."""
    if k1 <= 0 or k2 <= 0:
        raise ValueError("steps must be positive")
    if enforce_bound and not n1 > 2 * k1 * k2:
        raise ValueError(f"need n1 > 2 k1 k2 = {2 * k1 * k2}")
    if n1 < 1:
        raise ValueError("n1 must be positive")
    s = np.zeros(n1 + 1, dtype=np.int64)
    in_range = np.zeros(n1 + 1, dtype=bool)
    chains = []
    r1 = r2 = 1
    next1 = next2 = 1
    while True:
        chain = []
        j1, j2 = r1, r2
        while j1 <= n1 and j2 <= n1:
            if s[j1] or in_range[j2]:
                raise AssertionError("chains are not orthogonal")
            s[j1] = j2
            in_range[j2] = True
            chain.append((j1, j2))
            j1 += k1
            j2 += k2
        chains.append(chain)
        while next1 <= n1 and s[next1]:
            next1 += 1
        if next1 > n1:
            break
        while in_range[next2]:
            next2 += 1
        r1, r2 = next1, next2
    return ChainPermutation(n1, s[1:].copy(), (k1, k2), chains)


def signed_chain_permutation(n1: int, k1: int, k2: int) -> ChainPermutation:
    """Reduce any nonzero step to positive ones by reversing indices.

    The returned s satisfies s(j + k1) = s(j) + k2 along chains for the
    original signs; ``reversed`` records which transformation was applied.
    """
    if k1 == 0 or k2 == 0:
        raise ValueError("steps must be nonzero")
    if k1 < 0 and k2 < 0:
        k1, k2 = -k1, -k2
    if k1 > 0 and k2 > 0:
        return chain_permutation(n1, k1, k2)
    if k1 < 0:
        # j -> n+1-j flips the sign of k1
        cp = chain_permutation(n1, -k1, k2)
        s = cp.s[::-1].copy()
        chains = [[(n1 + 1 - a, b) for a, b in c] for c in cp.chains]
        return ChainPermutation(n1, s, (k1, k2), chains, True)
    # k2 < 0 < k1: equivalent to step (-k1, -k2) with -k1 < 0
    return signed_chain_permutation(n1, -k1, -k2)


def chain_invariants(cp: ChainPermutation) -> dict:
    n, s = cp.n, cp.s
    k1, k2 = cp.step
    bij = bool(np.array_equal(np.sort(s), np.arange(1, n + 1)))
    firsts = [a for c in cp.chains for a, _ in c]
    seconds = [b for c in cp.chains for _, b in c]
    orth = len(set(firsts)) == len(firsts) and len(set(seconds)) == len(seconds)
    law = True
    for j in range(1, n + 1):
        j2 = j + k1
        if 1 <= j2 <= n and 1 <= s[j - 1] + k2 <= n:
            law &= bool(s[j2 - 1] == s[j - 1] + k2)
    maximal = True
    for c in cp.chains:
        a, b = c[-1]
        maximal &= not (1 <= a + k1 <= n and 1 <= b + k2 <= n)
        for (x, y), (u, v) in zip(c, c[1:]):
            maximal &= (u - x, v - y) == (k1, k2)
    return {"bijective": bij, "orthogonal": orth, "forward_law": law, "maximal": maximal}


def compose(n1: int, s1: Sequence[int], n2: int, s2: Sequence[int]) -> tuple[int, np.ndarray]:
    """(n1 n2, s3) with M_{n1,s1}(M_{n2,s2}(Z)) = Z_{n1 n2, s3}."""
    s1, s2 = _perm(s1), _perm(s2)
    k1 = np.repeat(np.arange(n1), n2)
    k2 = np.tile(np.arange(n2), n1)
    s3 = (s1[k1] - 1) * n2 + s2[k2]
    return n1 * n2, s3


# ---------------------------------------------------------------------------
# shadows


def Z_shadow(n: int, s: Sequence[int], theta: float, alphas) -> np.ndarray:
    """Leb(Pi_alpha Z_{n,s}) for each alpha."""
    m, _ = shadow_profile(Z_diagonals(n, s, theta), alphas)
    return m


def copy_intervals(n: int, s: Sequence[int], theta: float, alpha: float) -> np.ndarray:
    """(n, 2) projection interval of each copy M_{n,s,k}(Z) on K_alpha."""
    V = copies_of_Z(n, s, theta)
    p = V @ np.array([math.cos(alpha), math.sin(alpha)])
    return np.column_stack((p.min(1), p.max(1)))


def chain_step_alpha(k1: int, k2: int, theta: float) -> float:
    """alpha in [pi/2, 3 pi/2) whose K_{alpha - pi/2} contains the chain step."""
    z = lattice_point(k1, k2, theta)
    return math.atan2(z.y, z.x) % math.pi + math.pi / 2


def n1_for(k1: int, k2: int, theta: float, eps: float, n2: Optional[int] = None,
           max_n1: int = 2_000_000) -> int:
    """Smallest admissible n1 whose chains rooted in D1 all have at least n2 elements.

    D1 = {(j, k): j, k <= n1 (1 - eps / (16 ell))}.  Candidates are multiples of
    lcm(k1, k2); the condition is monotone in n1 in practice, so a bisection over
    the multiples is followed by a short downward check.
    """
    ell = Rhombus(theta).ell
    if n2 is None:
        n2 = math.ceil(8 * ell / eps)
    a1, a2 = abs(k1), abs(k2)
    frac = eps / (16 * ell)
    step = a1 * a2 // math.gcd(a1, a2)
    first = (2 * a1 * a2) // step + 1

    def ok(m: int) -> bool:
        return _d1_chains_long(m * step, k1, k2, frac, n2)

    hi = first
    while not ok(hi):
        hi *= 2
        if hi * step > max_n1:
            raise BudgetExhausted("n1 search exceeded its bound")
    lo = max(first, hi // 2)
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    while hi > first and ok(hi - 1):
        hi -= 1
    return hi * step


def _d1_chains_long(n: int, k1: int, k2: int, frac: float, n2: int) -> bool:
    # signed steps are relabelings of the positive case, so check that one
    cp = chain_permutation(n, abs(k1), abs(k2))
    lim = n * (1 - frac)
    return all(len(c) >= n2 for c in cp.chains if c[0][0] <= lim and c[0][1] <= lim)


# ---------------------------------------------------------------------------
# construction


@dataclass
class Stage:
    alpha: float
    k1: int
    k2: int
    n1: int
    s: np.ndarray = field(repr=False)
    shadow_at_alpha: float
    lo: float  # covered interval of alpha where Leb(Pi Z_{n1,s}) < eps
    hi: float
    rational: bool
    rel_error: float = 0.0


@dataclass
class MirrorReport:
    theta: float
    eps: float
    alphas: list
    shadows: list
    max_shadow: float
    shadow_ok: bool
    n_star: int
    stages: list
    covered: list
    uncovered: list
    part_i: dict = field(default_factory=dict)
    accepted: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def alpha_range(theta: float, eps: float) -> list[tuple[float, float]]:
    """alpha with alpha - pi/2 in [eps, theta - eps] U [theta + eps, pi - eps]."""
    out = []
    for a, b in ((eps, theta - eps), (theta + eps, math.pi - eps)):
        if a <= b:
            out.append((a + math.pi / 2, b + math.pi / 2))
    return out


def make_stage(alpha: float, theta: float, eps: float, K_max: int = 12, delta: float = 1e-3,
               n1_mode: str = "bookkeeping", n1_cap: int = 10**6) -> Stage:
    """Chain permutation aimed at alpha, with its alpha-interval of shadow < eps."""
    hit = lattice_hit(alpha, theta, K_max)
    if hit is not None:
        k1, k2 = hit
        rational, err = True, 0.0
    else:
        ap = nearest_lattice_approx(alpha, theta, 1, delta)
        k1, k2 = ap.k1, ap.k2
        rational, err = ap.rel_error <= 1e-9, ap.rel_error
        if k1 == 0:
            k1 = 1 if k2 > 0 else -1  # keep the step off the excluded direction
    if n1_mode == "bookkeeping":
        n1 = n1_for(k1, k2, theta, eps, max_n1=n1_cap)
    else:
        n1 = _measured_n1(k1, k2, theta, eps, alpha, n1_cap)
    cp = signed_chain_permutation(n1, k1, k2)
    sh = float(Z_shadow(n1, cp.s, theta, [alpha])[0])
    lo, hi = _cover(n1, cp.s, theta, eps, alpha)
    return Stage(alpha, k1, k2, n1, cp.s, sh, lo, hi, rational, err)


def _measured_n1(k1, k2, theta, eps, alpha, cap) -> int:
    n = 2 * abs(k1 * k2) + 1
    while n <= cap:
        cp = signed_chain_permutation(n, k1, k2)
        if Z_shadow(n, cp.s, theta, [alpha])[0] < eps / 2:
            return n
        n = n + 1 if n < 64 else int(n * 1.1)
    raise BudgetExhausted("no n1 reached the shadow target")


def _cover(n1, s, theta, eps, alpha, step: float = 1e-3, reach: float = math.pi) -> tuple[float, float]:
    """Largest grid interval around alpha where the shadow stays below eps."""
    ends = []
    for sign in (1, -1):
        done, k0, chunk = 0.0, 1, 256
        while True:
            ks = np.arange(k0, k0 + chunk)
            m = Z_shadow(n1, s, theta, alpha + sign * ks * step)
            bad = np.flatnonzero(m >= eps)
            if bad.size:
                done = (ks[bad[0]] - 1) * step
                break
            k0 += chunk
            done = (k0 - 1) * step
            if done >= reach:
                break
        ends.append(alpha + sign * done)
    return ends[1], ends[0]


def _rational_steps(K_max: int) -> list[tuple[int, int]]:
    """Primitive steps of both sign patterns ordered by height max(|k1|, k2)."""
    out = []
    for h in range(1, K_max + 1):
        for a in range(1, h + 1):
            for b in range(1, h + 1):
                if max(a, b) == h and math.gcd(a, b) == 1:
                    out += [(a, b), (-a, b)]
    return out


def _stage_for_step(k1, k2, theta, eps, n1_mode, cap) -> Stage:
    alpha = chain_step_alpha(k1, k2, theta)
    if n1_mode == "bookkeeping":
        n1 = n1_for(k1, k2, theta, eps, max_n1=cap)
    else:
        n1 = _measured_n1(k1, k2, theta, eps, alpha, cap)
    cp = signed_chain_permutation(n1, k1, k2)
    sh = float(Z_shadow(n1, cp.s, theta, [alpha])[0])
    lo, hi = _cover(n1, cp.s, theta, eps, alpha)
    return Stage(alpha, k1, k2, n1, cp.s, sh, lo, hi, True, 0.0)


def cover_range(theta: float, eps: float, K_max: int = 12, delta: float = 1e-3,
                n1_mode: str = "bookkeeping", cap: int = 10**6) -> list[Stage]:
    """Greedy interval cover of the compact alpha range by chain stages.

    At the leftmost uncovered alpha, rational steps of increasing height whose
    direction lies just ahead are tried; the first whose covered interval reaches
    back over that point is taken.  Otherwise an approximating step aimed at the
    point itself is used.
    """
    steps = _rational_steps(K_max)
    stages: list[Stage] = []
    cache: dict = {}

    def stage(k1, k2):
        if (k1, k2) not in cache:
            try:
                cache[k1, k2] = _stage_for_step(k1, k2, theta, eps, n1_mode, cap)
            except BudgetExhausted:
                cache[k1, k2] = None
        return cache[k1, k2]

    for a0, b0 in alpha_range(theta, eps):
        a = a0
        while a <= b0:
            pick = None
            for k1, k2 in steps:
                if a - 1e-12 <= chain_step_alpha(k1, k2, theta) <= a + 0.5:
                    st = stage(k1, k2)
                    if st is not None and st.lo <= a:
                        pick = st
                        break
            if pick is None:
                try:
                    pick = make_stage(a, theta, eps, K_max, delta, n1_mode, cap)
                except BudgetExhausted:
                    # skip the gap up to the next affordable stage
                    ahead = [st.lo for k in steps if (st := stage(*k)) is not None and st.lo > a]
                    if not ahead:
                        break
                    a = min(ahead)
                    continue
            stages.append(pick)
            a = max(pick.hi, a + 1e-3) + 1e-6
    return stages


def _select(stages: list[Stage], target: IntervalSet, budget: int) -> list[int]:
    """Stages whose composed size fits the budget, maximizing covered target measure.

    Exhaustive over subsets for short lists, widest-first greedy otherwise.
    """
    def gain(idx):
        cov = IntervalSet([(stages[i].lo, stages[i].hi) for i in idx])
        if target.measure() > 0:
            return (target & cov).measure()
        return sum(cov.contains(a) for a, _ in target)

    if len(stages) <= 12:
        best, best_key = [], (0.0, 0)
        for mask in range(1, 1 << len(stages)):
            idx = [i for i in range(len(stages)) if mask >> i & 1]
            if math.prod(stages[i].n1 for i in idx) > budget:
                continue
            key = (gain(idx), -math.prod(stages[i].n1 for i in idx))
            if key > best_key:
                best, best_key = idx, key
        return sorted(best, key=lambda i: -stages[i].n1)
    order = sorted(range(len(stages)), key=lambda i: (-(stages[i].hi - stages[i].lo), stages[i].n1))
    chosen, n_star = [], 1
    for i in order:
        if n_star * stages[i].n1 <= budget:
            chosen.append(i)
            n_star *= stages[i].n1
    return chosen


def build_invisible_mirror(theta: float, eps: float, alphas: Optional[Sequence[float]] = None,
                           budget: int = 10**6, K_max: int = 12, delta: float = 1e-3,
                           n1_mode: str = "bookkeeping"):
    """Compose chain stages aimed at the target directions and return (G, report).

    Without explicit ``alphas`` the stages greedily cover the compact alpha
    range.  Stages are composed widest-coverage first while n* stays within
    ``budget``; parts of the target left out are listed in ``report.uncovered``.
    """
    if not 0 < theta < math.pi or eps <= 0:
        raise ValueError("need theta in (0, pi) and eps > 0")
    if alphas is not None:
        stages = []
        for a in alphas:
            try:
                stages.append(make_stage(a, theta, eps, K_max, delta, n1_mode, budget))
            except BudgetExhausted:
                pass
        target = IntervalSet([(a, a) for a in alphas])
    else:
        stages = cover_range(theta, eps, K_max, delta, n1_mode, budget)
        target = IntervalSet(alpha_range(theta, eps))
    chosen = _select(stages, target, budget)
    n, s = 1, np.array([1])
    for i in chosen:
        n, s = compose(n, s, stages[i].n1, stages[i].s)
    covered = IntervalSet([(stages[i].lo, stages[i].hi) for i in chosen])
    if alphas is not None:
        missed = [a for a in alphas if not covered.contains(a)]
        uncovered = [(a, a) for a in missed]
    else:
        uncovered = target.difference(covered).intervals.tolist()
    G = Scene(mirror_segments(n, s, theta), {"kind": "invisible-mirror", "theta": repr(theta),
                                             "eps": repr(eps), "n_star": str(n)})
    G.meta["s_star"] = " ".join(map(str, s.tolist())) if n <= 4096 else "omitted"
    if alphas is not None:
        grid = np.asarray(alphas, dtype=float)
    else:
        grid = np.concatenate([np.arange(a, b + 1e-12, 0.01) for a, b in alpha_range(theta, eps)]) \
            if alpha_range(theta, eps) else np.zeros(0)
    shadows = shadow_profile(G, grid)[0] if grid.size else np.zeros(0)
    rep = MirrorReport(theta, eps, grid.tolist(), shadows.tolist(),
                       float(shadows.max()) if shadows.size else 0.0,
                       bool(np.all(shadows < eps)), int(n),
                       [{"alpha": st.alpha, "k1": st.k1, "k2": st.k2, "n1": st.n1,
                         "shadow_at_alpha": st.shadow_at_alpha, "covered": [st.lo, st.hi],
                         "rational": st.rational, "rel_error": st.rel_error,
                         "composed": i in chosen} for i, st in enumerate(stages)],
                       covered.intervals.tolist(), uncovered)
    rep.s_star = s
    return G, rep


def verify_mirror(G: Scene, theta: float, eps: float, n_rays: int = 1000,
                  alphas: Optional[Sequence[float]] = None, margin: float = 1.0,
                  tol: float = 1e-9) -> MirrorReport:
    """Part (i): horizontal rays at heights (i + 1/2)/n_rays bounce once and exit in B.
    Part (ii): shadows of G below eps on the alpha grid."""
    r = (np.arange(n_rays) + 0.5) / n_rays
    x0 = (G.bbox()[0] if len(G) else 0.0) - margin
    res = trace_many(G, np.column_stack((np.full(n_rays, x0), r)), np.tile([1.0, 0.0], (n_rays, 1)))
    ok = res.status == ST_OK
    deg = res.status == ST_DEGENERATE
    e = np.array([math.cos(theta), math.sin(theta)])
    nrm = np.array([-e[1], e[0]])
    one = ok & (res.bounces == 1)
    dir_ok = ok & np.all(np.abs(res.dirs - e) <= tol, axis=1)
    rp = res.exit_w() @ nrm
    in_b = ok & (rp >= -tol) & (rp <= 1 + tol)
    angle_err = np.abs(np.arctan2(res.dirs[ok, 1], res.dirs[ok, 0]) - theta)
    nd = int(ok.sum())
    part_i = {
        "n_rays": int(n_rays), "non_degenerate": nd, "degenerate": int(deg.sum()),
        "single_bounce": int(one.sum()), "exit_direction_ok": int(dir_ok.sum()),
        "offset_in_bundle": int(in_b.sum()),
        "max_angle_error": float(angle_err.max()) if nd else 0.0,
        "offset_min": float(rp[ok].min()) if nd else float("nan"),
        "offset_max": float(rp[ok].max()) if nd else float("nan"),
        "passed": bool(nd == one.sum() == dir_ok.sum() == in_b.sum()),
    }
    if alphas is None:
        ranges = alpha_range(theta, eps)
        alphas = np.concatenate([np.arange(a, b + 1e-12, 0.01) for a, b in ranges]) if ranges else []
    alphas = np.asarray(alphas, dtype=float)
    sh = shadow_profile(G, alphas)[0] if alphas.size else np.zeros(0)
    n_star = int(G.meta.get("n_star", len(G)))
    rep = MirrorReport(theta, eps, alphas.tolist(), sh.tolist(), float(sh.max()) if sh.size else 0.0,
                       bool(np.all(sh < eps)), n_star, [], [], [], part_i)
    rep.accepted = part_i["passed"] and rep.shadow_ok
    return rep
