"""The sea urchin: N thin radial rectangles packed with rows of blocks."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .blocks import ARCTAN_THIRD
from .geometry import Point
from .scene import Scene


class Infeasible(ValueError):
    pass


class BlockTooWide(ValueError):
    pass


@dataclass(frozen=True)
class UrchinParams:
    eps: float
    N: int
    r1: float
    rho: float
    eps1: float
    strict: bool
    ineq1_lhs: float  # eps1 * rho * N^2 / (pi r1)
    ineq1_rhs: float  # eps / (16 pi)
    ineq2_lhs: float  # N eps1
    ineq2_rhs: float  # eps / (16 N)

    @property
    def theta1(self) -> float:
        return 2 * math.pi / self.N

    @property
    def q(self) -> float:
        return self.rho * (1 + 2 * self.eps1)

    def a(self, k: int) -> Point:
        phi = (k - 0.5) * 2 * math.pi / self.N
        return Point(self.r1 * math.cos(phi), self.r1 * math.sin(phi))

    @property
    def jstar(self) -> int:
        q = self.q
        outer = math.sqrt(1 - q * q / 4)
        # T_j(Q) spans [a0.x + j q, a0.x + (j + 1) q] horizontally
        return int(math.floor((outer - self.a(0).x) / q + 1e-12)) - 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(theta1=self.theta1, q=self.q, jstar=self.jstar)
        return d


def chord(N: int, r1: float) -> float:
    return 2 * r1 * math.sin(math.pi / N)


def _check_N(N: int) -> None:
    if N % 4 or N <= 0:
        raise Infeasible("N must be a positive multiple of 4")
    if not 2 * math.pi / N < ARCTAN_THIRD:
        raise Infeasible(f"theta1 = 2 pi / {N} = {2 * math.pi / N:.6f} is not below arctan(1/3)")


def _params(eps: float, N: int, r1: float, eps1: float, strict: Optional[bool] = None) -> UrchinParams:
    q = chord(N, r1)
    rho = q / (1 + 2 * eps1)
    l1, r1s = eps1 * rho * N * N / (math.pi * r1), eps / (16 * math.pi)
    l2, r2 = N * eps1, eps / (16 * N)
    ok = l1 < r1s and l2 < r2
    return UrchinParams(eps, N, r1, rho, eps1, ok if strict is None else strict and ok,
                        l1, r1s, l2, r2)


def solve_parameters(eps: float, N: Optional[int] = None, r1: Optional[float] = None,
                     eps1_floor: Optional[float] = None) -> UrchinParams:
    """Pick N, r1, then eps1 just below the tighter of the two inequalities.

    With ``eps1_floor`` (desk-scale relaxation) eps1 is raised to that value and
    the strict flag records whether the inequalities still hold.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if N is None:
        N = 4
        while not 2 * math.pi / N < ARCTAN_THIRD:
            N += 4
    _check_N(N)
    r1 = 0.1 if r1 is None else float(r1)
    if not 0 < r1 < 1:
        raise Infeasible("r1 must lie in (0, 1)")
    q = chord(N, r1)
    # ineq 2: eps1 < eps / (16 N^2); ineq 1: eps1 / (1 + 2 eps1) < eps r1 / (16 q N^2)
    b2 = eps / (16 * N * N)
    c = eps * r1 / (16 * q * N * N)
    b1 = c / (1 - 2 * c) if c < 0.5 else math.inf
    eps1 = min(b1, b2, 0.999) * (1 - 1e-9)
    if eps1_floor is not None and eps1_floor > eps1:
        return _params(eps, N, r1, float(eps1_floor))
    return _params(eps, N, r1, eps1)


def rectangle_M(k: int, p: UrchinParams) -> list[Point]:
    """Vertices a_k, a_{k+1}, then the two on the unit circle (counter-clockwise)."""
    if not 0 <= k < p.N:
        raise ValueError("k out of range")
    ak, ak1 = p.a(k), p.a(k + 1)
    # long sides run along the outward normal of the chord a_k a_{k+1}
    mid = ((ak.x + ak1.x) / 2, (ak.y + ak1.y) / 2)
    nrm = math.hypot(*mid)
    u = (mid[0] / nrm, mid[1] / nrm)
    out = []
    for z in (ak1, ak):
        # solve |z + t u| = 1 for the far root t > 0
        b = z.x * u[0] + z.y * u[1]
        cc = z.x * z.x + z.y * z.y - 1
        t = -b + math.sqrt(b * b - cc)
        out.append(Point(z.x + t * u[0], z.y + t * u[1]))
    return [ak, ak1, out[0], out[1]]


@dataclass
class UrchinScene:
    scene: Scene
    params: UrchinParams
    block_size: int

    @property
    def spike(self) -> np.ndarray:
        return self.scene.tags[:, 0]

    @property
    def slot(self) -> np.ndarray:
        return self.scene.tags[:, 1]


def build_urchin(p: UrchinParams, block: Scene) -> UrchinScene:
    """Rows of translated blocks in M'_0, rotated to every k = 0..N-1.

    ``block`` is the block at scale rho (it must lie in Q_{eps1, rho}).
    """
    js = p.jstar
    if js < 0:
        raise BlockTooWide("no translate of Q fits inside M'_0")
    a0 = p.a(0)
    d = p.rho * p.eps1
    base = block.segs
    rows = []
    for j in range(js + 1):
        sh = np.array([a0.x + j * p.q + d, a0.y + d] * 2)
        rows.append(base + sh)
    row = np.vstack(rows)
    parts, tags = [], []
    nb = len(base)
    for k in range(p.N):
        phi = 2 * math.pi * k / p.N
        c, s = math.cos(phi), math.sin(phi)
        r = np.empty_like(row)
        r[:, 0::2] = c * row[:, 0::2] - s * row[:, 1::2]
        r[:, 1::2] = s * row[:, 0::2] + c * row[:, 1::2]
        parts.append(r)
        t = np.empty((len(row), 2), dtype=np.int64)
        t[:, 0] = k
        t[:, 1] = np.repeat(np.arange(js + 1), nb)
        tags.append(t)
    meta = {"kind": "urchin", "N": str(p.N), "r1": repr(p.r1), "rho": repr(p.rho),
            "eps1": repr(p.eps1), "jstar": str(js), "strict": str(p.strict).lower()}
    sc = Scene(np.vstack(parts), meta, np.vstack(tags))
    return UrchinScene(sc, p, nb)


def block_for(p: UrchinParams, unit_block: Scene) -> Scene:
    """Scale a rho = 1 block to the urchin's rho."""
    return unit_block.transformed(scale=p.rho)


def relaxed_urchin(eps: float, N: int = 20, r1: float = 0.1, eps1: float = 0.25,
                   grid_step: float = 1e-3):
    """Desk-scale urchin whose blocks come from ``build_block`` at theta1 = 2 pi / N.

    If no candidate passes verification the closest one is used and the
    returned block report says so.  Returns (UrchinScene, BlockReport).
    """
    from .blocks import BlockSpec, BudgetExhausted, build_block, verify_block

    p = solve_parameters(eps, N, r1, eps1_floor=eps1)
    spec = BlockSpec(1.0, p.theta1, eps1)
    try:
        unit = build_block(spec, grid_step)
    except BudgetExhausted as e:
        if e.scene is None:
            raise
        unit = e.scene
    rep = verify_block(unit, spec, grid_step)
    return build_urchin(p, block_for(p, unit)), rep
