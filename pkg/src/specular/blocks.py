"""Blocks: families of slope -1 segments with prescribed shadow behaviour.

A block for (rho, theta1, eps) projects onto roughly [0, rho] for most angles
in [0, theta1] and casts a shadow of at most eps * rho for most angles in
(theta1, pi).  Blocks are produced by a deterministic generate-and-verify
search over iterated "venetian blind" families and accepted only through
``verify_block``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .geometry import Point
from .projection import ShadowAtMost, SymdiffAtMost, bad_angle_measure, shadow_profile
from .scene import Scene

ARCTAN_THIRD = math.atan(1.0 / 3.0)


class BudgetExhausted(RuntimeError):
    """No candidate passed verification; ``best`` holds the closest report."""

    def __init__(self, msg: str, best: Optional["BlockReport"] = None,
                 scene: Optional[Scene] = None):
        super().__init__(msg)
        self.best = best
        self.scene = scene


@dataclass(frozen=True)
class Diamond:
    x1: Point
    r: float

    def __post_init__(self):
        object.__setattr__(self, "x1", Point(*self.x1))
        if not self.r > 0:
            raise ValueError("diamond size must be positive")

    @property
    def x2(self) -> Point:
        return Point(self.x1.x + self.r, self.x1.y + self.r)

    @property
    def x3(self) -> Point:
        return Point(self.x1.x + self.r, self.x1.y - self.r)

    @property
    def x4(self) -> Point:
        return Point(self.x1.x + 2 * self.r, self.x1.y)

    def vertices(self) -> list[Point]:
        return [self.x1, self.x2, self.x4, self.x3]


def diamond_segments(d: Diamond) -> list[tuple[Point, Point]]:
    """Lower side, upper side and mid-line of the diamond, all of slope -1."""
    m12 = Point((d.x1.x + d.x2.x) / 2, (d.x1.y + d.x2.y) / 2)
    m34 = Point((d.x3.x + d.x4.x) / 2, (d.x3.y + d.x4.y) / 2)
    return [(d.x1, d.x3), (d.x2, d.x4), (m12, m34)]


def diamond_scene(diamonds: Iterable[Diamond]) -> Scene:
    return Scene([seg for d in diamonds for seg in diamond_segments(d)])


@dataclass(frozen=True)
class BlockSpec:
    rho: float = 1.0
    theta1: float = 0.30
    eps: float = 0.25
    budget: int = 16  # maximum number of subdivision levels tried

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not 0 < self.theta1 < ARCTAN_THIRD:
            raise ValueError(f"theta1 must lie in (0, arctan(1/3)) = (0, {ARCTAN_THIRD:.6f})")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")

    def box(self) -> tuple[float, float]:
        """Open square Q = (lo, hi)^2."""
        return (-self.rho * self.eps, self.rho * (1 + self.eps))


@dataclass
class BlockReport:
    rho: float
    theta1: float
    eps: float
    grid_step: float
    bad_low: float          # estimated Leb of bad angles in [0, theta1]
    bad_high: float         # estimated Leb of bad angles in (theta1, pi)
    max_symdiff_good: float  # largest symdiff over the accepted low angles
    contained: bool
    diameter: float
    n_segments: int
    slopes_ok: bool
    accepted: bool
    n_grid_low: int = 0
    n_grid_high: int = 0
    bad_low_angles: list = field(default_factory=list, repr=False)
    bad_high_angles: list = field(default_factory=list, repr=False)

    def to_dict(self, with_angles: bool = False) -> dict:
        d = asdict(self)
        if not with_angles:
            d.pop("bad_low_angles")
            d.pop("bad_high_angles")
        return d


def slopes_minus_one(scene: Scene, tol: float = 1e-9) -> bool:
    s = scene.segs
    if not len(s):
        return True
    dx = s[:, 2] - s[:, 0]
    dy = s[:, 3] - s[:, 1]
    return bool(np.all(np.abs(dx + dy) <= tol * np.maximum(1.0, np.abs(dx))))


def verify_block(scene: Scene, spec: BlockSpec, grid_step: float = 1e-3) -> BlockReport:
    """Grid estimates of the two bad-angle sets plus containment and diameter."""
    rho, eps = spec.rho, spec.eps
    low = bad_angle_measure(scene, (0.0, spec.theta1), SymdiffAtMost(eps * rho, rho), grid_step)
    high = bad_angle_measure(scene, (spec.theta1, math.pi), ShadowAtMost(eps * rho), grid_step)
    lo, hi = spec.box()
    if len(scene):
        bb = scene.bbox()
        contained = bb[0] > lo and bb[1] > lo and bb[2] < hi and bb[3] < hi
    else:
        contained = True
    diam = scene.diameter()
    good_low = np.setdiff1d(
        np.round((np.arange(low.n_grid) + 0.5) * grid_step, 12), np.round(low.bad_list, 12))
    if good_low.size:
        _, sd = shadow_profile(scene, good_low, rho)
        max_sd = float(sd.max())
    else:
        max_sd = float("nan")
    slopes_ok = slopes_minus_one(scene)
    accepted = (low.estimate <= eps and high.estimate <= eps and contained
                and diam < 3 * math.sqrt(2) * rho and slopes_ok)
    return BlockReport(rho, spec.theta1, eps, grid_step, low.estimate, high.estimate, max_sd,
                       bool(contained), diam, len(scene), slopes_ok, bool(accepted),
                       low.n_grid, high.n_grid, low.bad_list.tolist(), high.bad_list.tolist())


# ---------------------------------------------------------------------------
# generator


@dataclass(frozen=True)
class Schedule:
    """One venetian-blind candidate.

    Level j splits every segment into ``m_j`` pieces; neighbouring pieces are
    displaced perpendicular to e^{i collapse_j} so that their shadows coincide
    at that angle, and the displacement length makes them abut exactly at
    ``theta_c``.  ``length`` is the horizontal extent of the parent segment.
    """
    levels: tuple[tuple[int, float], ...]
    theta_c: float
    length: float
    window: tuple[float, float]

    @property
    def n_segments(self) -> int:
        return int(np.prod([m for m, _ in self.levels])) if self.levels else 1


def venetian_blind(levels: Sequence[tuple[int, float]], theta_c: float, length: float) -> np.ndarray:
    """Left endpoints (x, y) and common horizontal extent h of the leaf segments."""
    x = np.array([0.0])
    y = np.array([0.0])
    h = float(length)
    cc, sc = math.cos(theta_c), math.sin(theta_c)
    for m, phi in levels:
        hh = h / m
        k = np.arange(m) - (m - 1) / 2.0
        c = hh * (cc - sc) / math.sin(theta_c - phi)
        dx, dy = -c * math.sin(phi), c * math.cos(phi)
        x = (x[:, None] + (h - hh) / 2 + k * dx).ravel()
        y = (y[:, None] - (h - hh) / 2 + k * dy).ravel()
        h = hh
    return np.column_stack((x, y)), h


def place(xy: np.ndarray, h: float, window: tuple[float, float]) -> np.ndarray:
    """Translate so the shadow's left end sits at 0 at both window angles."""
    ea = np.array([math.cos(window[0]), math.sin(window[0])])
    eb = np.array([math.cos(window[1]), math.sin(window[1])])
    ends = np.vstack((xy, xy + np.array([h, -h])))
    rhs = [-(ends @ ea).min(), -(ends @ eb).min()]
    t = np.linalg.solve(np.array([ea, eb]), rhs)
    return xy + t


def schedule_scene(sch: Schedule, rho: float = 1.0) -> Scene:
    xy, h = venetian_blind(sch.levels, sch.theta_c, sch.length)
    xy = place(xy, h, sch.window)
    segs = np.column_stack((xy[:, 0], xy[:, 1], xy[:, 0] + h, xy[:, 1] - h)) * rho
    return Scene(segs, {"generator": "venetian-blind", "levels": len(sch.levels),
                        "theta_c": repr(sch.theta_c)})


def _window(spec: BlockSpec) -> tuple[float, float]:
    # the good part of [0, theta1] must have measure >= theta1 - eps; keep it next to theta1
    need = max(spec.theta1 - spec.eps, 0.0)
    w = min(spec.theta1, need + 0.005) if need > 0 else min(spec.theta1, 0.02)
    return (spec.theta1 - w, spec.theta1)


# Tuned collapse angles (radians), found offline by coordinate descent on the
# verification objective at theta1 = 0.30, eps = 0.25.  Each row: (child counts,
# collapse angles, theta_c, length).  Rows are tried in order.
TUNED: tuple = (
    ((4, 4, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2),
     (1.329096, 2.429792, 1.463411, 2.829574, 2.759844, 1.858487, 1.891707, 2.536681, 1.2376,
      2.509669, 2.818613, 2.03107),
     0.2656, 1.15639),
    ((4, 4, 2, 2, 2, 2, 2, 2, 2),
     (1.647048, 2.429792, 1.463411, 2.794183, 2.606091, 1.858487, 1.891707, 2.46466, 1.2376),
     0.2725, 1.1329),
    ((8, 2, 2, 2, 2, 2, 2, 2, 2),
     (1.464795, 2.870868, 2.036841, 1.771267, 2.674886, 2.282388, 2.507043, 2.750453, 1.248086),
     0.2725, 1.1431),
)


def candidates(spec: BlockSpec) -> list[Schedule]:
    """Deterministic candidate ordering: tuned rows, then generic self-similar ones."""
    win = _window(spec)
    out = []
    for ms, angles, tc, L in TUNED:
        if len(ms) <= spec.budget:
            out.append(Schedule(tuple(zip(ms, angles)), tc, L, win))
    tc = 0.5 * (win[0] + win[1])
    L = 1.0 / (math.cos(tc) - math.sin(tc))
    # generic family: collapse angles spread geometrically through (theta1, pi)
    for depth in range(2, spec.budget + 1):
        for m in (2, 3, 4):
            if m ** depth > 1 << 12:
                continue
            lo, hi = spec.theta1 + 0.15, math.pi - 0.15
            angles = lo + (hi - lo) * (np.arange(depth) + 0.5) / depth
            out.append(Schedule(tuple((m, float(a)) for a in angles), tc, L, win))
    return out


def build_block(spec: BlockSpec, grid_step: float = 1e-3,
                return_report: bool = False):
    """First candidate that passes ``verify_block``; scaled copy of the rho = 1 block."""
    unit = BlockSpec(1.0, spec.theta1, spec.eps, spec.budget)
    best: Optional[tuple[float, BlockReport, Scene]] = None
    for sch in candidates(unit):
        scene = schedule_scene(sch)
        rep = verify_block(scene, unit, grid_step)
        if rep.accepted:
            out = scene.transformed(scale=spec.rho) if spec.rho != 1.0 else scene
            out.meta.update({"rho": repr(spec.rho), "theta1": repr(spec.theta1),
                             "eps": repr(spec.eps), "kind": "block"})
            if return_report:
                return out, verify_block(out, spec, grid_step)
            return out
        score = rep.bad_low + rep.bad_high + (0 if rep.contained else 10)
        if best is None or score < best[0]:
            best = (score, rep, scene)
    raise BudgetExhausted(
        f"no candidate passed verification for theta1={spec.theta1}, eps={spec.eps}",
        best[1] if best else None, best[2] if best else None)
