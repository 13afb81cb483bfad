"""Specular ray transport through segment scenes."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _backend
from .geometry import EPS_GEOM, DirectedLine, Direction, Point
from .intervals import IntervalSet
from .scene import Scene

DEFAULT_CAP = 10_000
ST_OK, ST_DEGENERATE, ST_CAP = 0, 1, 2


class CapExceeded(RuntimeError):
    pass


@dataclass
class Accel:
    """Uniform grid over the scene bounding box with CSR cell lists."""
    segs: np.ndarray
    gbox: np.ndarray
    start: np.ndarray
    items: np.ndarray


def build_accel(segs: np.ndarray, target: float = 2.0, max_cells: int = 4_000_000) -> Accel:
    segs = np.ascontiguousarray(segs, dtype=float)
    n = len(segs)
    if n == 0:
        return Accel(segs, np.array([0, 0, 1, 1, 1, 1], float), np.zeros(2, np.int64),
                     np.zeros(0, np.int32))
    xs, ys = segs[:, 0::2], segs[:, 1::2]
    x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    pad = 1e-6 * max(1.0, x1 - x0, y1 - y0)
    x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
    w, h = x1 - x0, y1 - y0
    cells = int(min(max_cells, max(1, n / target)))
    cw = math.sqrt(w * h / cells)
    # keep cells no smaller than the typical segment so each lands in a few cells
    cw = max(cw, 0.5 * float(np.median(np.hypot(xs[:, 1] - xs[:, 0], ys[:, 1] - ys[:, 0]))))
    nx = max(1, min(4096, int(math.ceil(w / cw))))
    ny = max(1, min(4096, int(math.ceil(h / cw))))
    cw, ch = w / nx, h / ny
    # candidate cells: bounding-box cells of each segment, kept if the cell meets the segment
    ix0 = np.clip(((xs.min(1) - x0) / cw).astype(np.int64), 0, nx - 1)
    ix1 = np.clip(((xs.max(1) - x0) / cw).astype(np.int64), 0, nx - 1)
    iy0 = np.clip(((ys.min(1) - y0) / ch).astype(np.int64), 0, ny - 1)
    iy1 = np.clip(((ys.max(1) - y0) / ch).astype(np.int64), 0, ny - 1)
    cx = ix1 - ix0 + 1
    cy = iy1 - iy0 + 1
    cnt = cx * cy
    sid = np.repeat(np.arange(n), cnt)
    loc = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    gx = ix0[sid] + loc % cx[sid]
    gy = iy0[sid] + loc // cx[sid]
    # separating-axis test against the segment's normal (cells are axis-aligned)
    ex = segs[sid, 2] - segs[sid, 0]
    ey = segs[sid, 3] - segs[sid, 1]
    ccx = x0 + (gx + 0.5) * cw - segs[sid, 0]
    ccy = y0 + (gy + 0.5) * ch - segs[sid, 1]
    L = np.hypot(ex, ey)
    dist = np.abs(ccx * ey - ccy * ex) / L
    reach = 0.5 * (cw * np.abs(ey) + ch * np.abs(ex)) / L + 1e-9
    keep = dist <= reach
    sid, cell = sid[keep], (gy * nx + gx)[keep]
    o = np.lexsort((sid, cell))
    sid, cell = sid[o], cell[o]
    start = np.zeros(nx * ny + 1, dtype=np.int64)
    np.add.at(start, cell + 1, 1)
    start = np.cumsum(start)
    return Accel(segs, np.array([x0, y0, cw, ch, nx, ny], float), start, sid.astype(np.int32))


def _accel_for(scene) -> Accel:
    if isinstance(scene, Accel):
        return scene
    segs = scene.segs if isinstance(scene, Scene) else np.asarray(scene, float).reshape(-1, 4)
    if isinstance(scene, Scene):
        cached = getattr(scene, "_accel", None)
        if cached is not None and cached.segs is scene.segs:
            return cached
        acc = build_accel(segs)
        scene._accel = acc
        return acc
    return build_accel(segs)


@dataclass
class RayPath:
    entry: DirectedLine
    points: list = field(default_factory=list)
    exit: Optional[DirectedLine] = None
    bounces: int = 0
    degenerate: bool = False
    cap_exceeded: bool = False
    segment_ids: list = field(default_factory=list)


def canonical(p, v) -> tuple[float, float]:
    """Foot of the perpendicular from the origin onto the line through p along v."""
    t = p[0] * v[0] + p[1] * v[1]
    return (p[0] - t * v[0], p[1] - t * v[1])


def _start(v: Direction, w, margin: float, acc: Accel) -> tuple[float, float]:
    # begin far enough back that no mirror lies behind the start point
    x0, y0, cw, ch, nx, ny = acc.gbox
    corners = np.array([[x0, y0], [x0 + cw * nx, y0], [x0, y0 + ch * ny], [x0 + cw * nx, y0 + ch * ny]])
    back = float(np.max(-(corners - np.array([w[0], w[1]])) @ np.array([v.x, v.y])))
    back = max(back, 0.0) + margin
    return (w[0] - back * v.x, w[1] - back * v.y)


def trace(scene, v: Direction, w, cap: int = DEFAULT_CAP, eps: float = EPS_GEOM,
          raise_on_cap: bool = False) -> RayPath:
    """Follow the directed line L_{v,w} through all reflections."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    w = Point(*w)
    entry = DirectedLine(v, w)
    acc = _accel_for(scene)
    ox, oy = _start(v, w, 1.0, acc)
    pts, (vx, vy), status = _backend.kernels.trace_path(
        acc.segs, acc.gbox, acc.start, acc.items, ox, oy, v.x, v.y, int(cap), float(eps))
    path = RayPath(entry)
    path.points = [Point(p[0], p[1]) for p in pts]
    path.segment_ids = [int(p[2]) for p in pts]
    path.degenerate = status == ST_DEGENERATE
    path.cap_exceeded = status == ST_CAP
    path.bounces = len(pts) - (1 if status != ST_OK else 0)
    if path.cap_exceeded and raise_on_cap:
        raise CapExceeded(f"more than {cap} reflections")
    if status == ST_OK:
        vout = Direction.from_vector(vx, vy)
        last = path.points[-1] if path.points else w
        path.exit = DirectedLine.through(vout, last)
    return path


def _threads(threads: Optional[int]) -> int:
    if threads is None:
        threads = int(os.environ.get("SPECULAR_THREADS", "1") or 1)
    return max(1, int(threads))


@dataclass
class BatchResult:
    pos: np.ndarray
    dirs: np.ndarray
    bounces: np.ndarray
    status: np.ndarray
    first_seg: np.ndarray

    @property
    def hit(self) -> np.ndarray:
        return self.first_seg >= 0

    def exit_w(self) -> np.ndarray:
        t = np.einsum("ij,ij->i", self.pos, self.dirs)
        return self.pos - t[:, None] * self.dirs


def trace_many(scene, origins: np.ndarray, dirs: np.ndarray, cap: int = DEFAULT_CAP,
               eps: float = EPS_GEOM, threads: Optional[int] = None,
               chunk: int = 4096) -> BatchResult:
    """Trace rays from explicit start points; results do not depend on threads."""
    acc = _accel_for(scene)
    origins = np.ascontiguousarray(origins, dtype=float).reshape(-1, 2)
    dirs = np.ascontiguousarray(dirs, dtype=float).reshape(-1, 2)
    n = len(origins)
    k = _backend.kernels
    spans = [(a, min(n, a + chunk)) for a in range(0, n, chunk)] or [(0, 0)]

    def run(span):
        return k.trace_batch(acc.segs, acc.gbox, acc.start, acc.items, origins, dirs,
                             int(cap), float(eps), span[0], span[1])

    nt = _threads(threads)
    if nt > 1 and len(spans) > 1:
        with ThreadPoolExecutor(nt) as ex:
            parts = list(ex.map(run, spans))
    else:
        parts = [run(s) for s in spans]
    cat = [np.concatenate([p[i] for p in parts]) for i in range(5)]
    return BatchResult(cat[0].reshape(-1, 2), cat[1].reshape(-1, 2), *cat[2:])


def trace_lines(scene, v: np.ndarray, w: np.ndarray, cap: int = DEFAULT_CAP,
                eps: float = EPS_GEOM, threads: Optional[int] = None) -> BatchResult:
    """Trace directed lines (v, w); rays start outside the scene's bounding box."""
    acc = _accel_for(scene)
    v = np.asarray(v, float).reshape(-1, 2)
    w = np.asarray(w, float).reshape(-1, 2)
    x0, y0, cw, ch, nx, ny = acc.gbox
    corners = np.array([[x0, y0], [x0 + cw * nx, y0], [x0, y0 + ch * ny], [x0 + cw * nx, y0 + ch * ny]])
    back = np.max(-np.einsum("ikj,ij->ik", corners[None, :, :] - w[:, None, :], v), axis=1)
    back = np.maximum(back, 0.0) + 1.0
    origins = w - back[:, None] * v
    return trace_many(acc, origins, v, cap, eps, threads)


@dataclass
class BundleTransportResult:
    B2: IntervalSet
    B3: IntervalSet
    b1: float
    b2: float
    b3: float
    dir_B3: float
    n_rays: int
    degenerate: int
    mixed: int
    cap_exceeded: int


def _offsets_to_set(offsets: np.ndarray, width: float) -> IntervalSet:
    return IntervalSet.from_bounds(offsets - width / 2, offsets + width / 2)


def bundle_transport(scene, theta: float, B1: IntervalSet, n_rays: int,
                     cap: int = DEFAULT_CAP, threads: Optional[int] = None) -> BundleTransportResult:
    """Transport the bundle v = e^{i(theta + pi/2)}, w in B1 * e^{i theta}.

    B1 is discretized into n_rays midpoint offsets.  Exits moving along v land in
    B2, exits moving along e^{i(pi - theta)} land in B3; offsets are measured
    along e^{i theta} and e^{i(pi/2 - theta)} respectively (the perpendiculars
    of the exit directions).  Degenerate rays are dropped and counted.
    """
    if n_rays < 1:
        raise ValueError("n_rays must be positive")
    iv = B1.intervals
    b1 = B1.measure()
    lens = iv[:, 1] - iv[:, 0]
    # midpoint quadrature: rays spread over the components in proportion to length
    cum = np.concatenate(([0.0], np.cumsum(lens)))
    u = (np.arange(n_rays) + 0.5) * (b1 / n_rays)
    comp = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(iv) - 1)
    r = iv[comp, 0] + (u - cum[comp])
    dw = b1 / n_rays
    e = np.array([math.cos(theta), math.sin(theta)])
    v = np.array([-e[1], e[0]])
    res = trace_lines(scene, np.tile(v, (n_rays, 1)), r[:, None] * e, cap=cap, threads=threads)
    ok = res.status == ST_OK
    d = res.dirs
    same = ok & (np.abs(d[:, 0] - v[0]) <= 1e-9) & (np.abs(d[:, 1] - v[1]) <= 1e-9)
    v3 = np.array([math.cos(math.pi - theta), math.sin(math.pi - theta)])
    refl = ok & (np.abs(d[:, 0] - v3[0]) <= 1e-9) & (np.abs(d[:, 1] - v3[1]) <= 1e-9)
    mixed = int(np.sum(ok & ~same & ~refl))
    w_exit = res.exit_w()
    n2 = np.array([v3[1], -v3[0]])  # unit normal of the B3 direction
    off2 = w_exit[same] @ e
    off3 = w_exit[refl] @ n2
    B2 = _offsets_to_set(off2, dw)
    B3 = _offsets_to_set(off3, dw)
    return BundleTransportResult(B2, B3, b1, dw * int(same.sum()), dw * int(refl.sum()),
                                 float((math.pi - theta) % (2 * math.pi)), int(n_rays),
                                 int(np.sum(res.status == ST_DEGENERATE)), mixed,
                                 int(np.sum(res.status == ST_CAP)))
