"""Planar primitives: points, directions, segments, directed lines and ray hits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

EPS_GEOM = 1e-9


class Point(NamedTuple):
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Point(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Point(self.x - other[0], self.y - other[1])

    def scale(self, c: float) -> "Point":
        return Point(c * self.x, c * self.y)

    def dot(self, other) -> float:
        return self.x * other[0] + self.y * other[1]

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class Direction:
    """Unit direction e^{i angle}; angle is stored in [0, 2pi)."""

    angle: float
    x: float
    y: float

    @classmethod
    def from_angle(cls, angle: float) -> "Direction":
        a = math.fmod(angle, 2 * math.pi)
        if a < 0:
            a += 2 * math.pi
        return cls(a, math.cos(a), math.sin(a))

    @classmethod
    def from_vector(cls, x: float, y: float) -> "Direction":
        n = math.hypot(x, y)
        if n == 0:
            raise ValueError("zero vector has no direction")
        x, y = x / n, y / n
        a = math.atan2(y, x)
        if a < 0:
            a += 2 * math.pi
        return cls(a, x, y)

    @property
    def vec(self) -> Point:
        return Point(self.x, self.y)

    def dot(self, other) -> float:
        return self.x * other[0] + self.y * other[1]

    def __iter__(self):
        yield self.x
        yield self.y

    def __getitem__(self, i):
        return (self.x, self.y)[i]


def reflect_direction(v: Direction, m: Direction) -> Direction:
    """Mirror v across the line spanned by m: 2(v.m)m - v."""
    d = v.x * m.x + v.y * m.y
    rx = 2 * d * m.x - v.x
    ry = 2 * d * m.y - v.y
    return Direction.from_vector(rx, ry)


@dataclass(frozen=True)
class Segment:
    p: Point
    q: Point

    def __post_init__(self):
        p, q = Point(*self.p), Point(*self.q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if not all(map(math.isfinite, (*p, *q))):
            raise ValueError("segment coordinates must be finite")
        if p == q:
            raise ValueError("degenerate segment")

    @property
    def length(self) -> float:
        return math.hypot(self.q.x - self.p.x, self.q.y - self.p.y)

    @property
    def direction(self) -> Direction:
        return Direction.from_vector(self.q.x - self.p.x, self.q.y - self.p.y)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p.x, self.p.y, self.q.x, self.q.y)


@dataclass(frozen=True)
class DirectedLine:
    """Line t -> t v + w with w the foot of the perpendicular from the origin."""

    v: Direction
    w: Point

    def __post_init__(self):
        if abs(self.v.dot(self.w)) > EPS_GEOM * max(1.0, Point(*self.w).norm()):
            raise ValueError("w must be perpendicular to v")

    @classmethod
    def through(cls, v: Direction, p) -> "DirectedLine":
        """Canonical line with direction v passing through p."""
        t = v.x * p[0] + v.y * p[1]
        return cls(v, Point(p[0] - t * v.x, p[1] - t * v.y))

    @classmethod
    def from_coords(cls, theta: float, r: float, side: int) -> "DirectedLine":
        """Line with w = r e^{i theta}, v = e^{i(theta + side pi/2)}."""
        v = Direction.from_angle(theta + side * math.pi / 2)
        w = Point(r * math.cos(theta), r * math.sin(theta))
        return cls(v, w)

    def offset(self, normal: Direction) -> float:
        return self.w.dot(normal)


class Hit(NamedTuple):
    t: float
    point: Point
    kind: str  # "interior" or "endpoint"


def ray_segment_hit(origin, v, s: Segment, eps: float = EPS_GEOM) -> Optional[Hit]:
    """First intersection of the ray origin + t v (t > eps) with the closed segment s."""
    ox, oy = origin[0], origin[1]
    vx, vy = v[0], v[1]
    px, py = s.p
    ex, ey = s.q.x - px, s.q.y - py
    den = vx * ey - vy * ex
    dx, dy = px - ox, py - oy
    L = math.hypot(ex, ey)
    if abs(den) <= 1e-15 * L:
        # parallel: collinear overlap means the ray grazes the segment
        if abs(dx * vy - dy * vx) > eps:
            return None
        t0 = dx * vx + dy * vy
        t1 = (s.q.x - ox) * vx + (s.q.y - oy) * vy
        ts = [t for t in (t0, t1) if t > eps]
        if not ts:
            return None
        t = min(ts)
        return Hit(t, Point(ox + t * vx, oy + t * vy), "endpoint")
    t = (dx * ey - dy * ex) / den
    u = (dx * vy - dy * vx) / den
    tol = eps / L
    if t <= eps or u < -tol or u > 1 + tol:
        return None
    kind = "endpoint" if (u * L <= eps or (1 - u) * L <= eps) else "interior"
    return Hit(t, Point(ox + t * vx, oy + t * vy), kind)


def segments_array(segments) -> np.ndarray:
    """Stack segments (Segment objects or 4-tuples) as an (n, 4) float array."""
    rows = [s.as_tuple() if isinstance(s, Segment) else tuple(s) for s in segments]
    if not rows:
        return np.zeros((0, 4))
    return np.asarray(rows, dtype=float).reshape(-1, 4)


def rotate(points: np.ndarray, phi: float) -> np.ndarray:
    """Rotate an (..., 2k) coordinate array by phi about the origin."""
    c, s = math.cos(phi), math.sin(phi)
    a = np.asarray(points, dtype=float)
    out = np.empty_like(a)
    out[..., 0::2] = c * a[..., 0::2] - s * a[..., 1::2]
    out[..., 1::2] = s * a[..., 0::2] + c * a[..., 1::2]
    return out
