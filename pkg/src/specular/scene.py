"""Ordered collections of mirror segments."""
from __future__ import annotations

import math
from typing import Iterable, Iterator, Optional

import numpy as np

from .geometry import Segment, rotate, segments_array


class Scene:
    """Mirror segments stored as an (n, 4) array of x1, y1, x2, y2 rows.

    ``meta`` carries free-form string metadata that survives serialization;
    ``tags`` optionally maps each segment to an integer provenance row.
    """

    def __init__(self, segments: Iterable | np.ndarray = (), meta: Optional[dict] = None,
                 tags: Optional[np.ndarray] = None):
        if isinstance(segments, np.ndarray):
            arr = np.array(segments, dtype=float).reshape(-1, 4)
        else:
            arr = segments_array(segments)
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("non-finite segment coordinates")
        if arr.size and np.any((arr[:, 0] == arr[:, 2]) & (arr[:, 1] == arr[:, 3])):
            raise ValueError("zero-length segment")
        self.segs = arr
        self.meta = dict(meta or {})
        self.tags = None if tags is None else np.asarray(tags, dtype=np.int64).reshape(len(arr), -1)

    def __len__(self) -> int:
        return len(self.segs)

    def __iter__(self) -> Iterator[Segment]:
        for r in self.segs:
            yield Segment((r[0], r[1]), (r[2], r[3]))

    def __eq__(self, other) -> bool:
        return isinstance(other, Scene) and np.array_equal(self.segs, other.segs)

    def __repr__(self) -> str:
        return f"Scene({len(self)} segments)"

    def copy(self) -> "Scene":
        return Scene(self.segs.copy(), self.meta, None if self.tags is None else self.tags.copy())

    def transformed(self, scale: float = 1.0, shift=(0.0, 0.0), phi: float = 0.0) -> "Scene":
        """Apply z -> scale * e^{i phi} z + shift to every endpoint."""
        a = self.segs * scale
        if phi:
            a = rotate(a, phi)
        a = a + np.array([shift[0], shift[1], shift[0], shift[1]])
        return Scene(a, self.meta, self.tags)

    def bbox(self) -> tuple[float, float, float, float]:
        if not len(self):
            return (0.0, 0.0, 0.0, 0.0)
        xs = self.segs[:, 0::2]
        ys = self.segs[:, 1::2]
        return (float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max()))

    def points(self) -> np.ndarray:
        return self.segs.reshape(-1, 2)

    def diameter(self) -> float:
        """Exact diameter of the endpoint set (segments are convex hull pieces)."""
        pts = self.points()
        if len(pts) < 2:
            return 0.0
        try:
            from scipy.spatial import ConvexHull
            hull = pts[ConvexHull(pts).vertices]
        except Exception:
            hull = pts
        d = hull[:, None, :] - hull[None, :, :]
        return float(math.sqrt(np.max(np.einsum("ijk,ijk->ij", d, d))))

    def lengths(self) -> np.ndarray:
        return np.hypot(self.segs[:, 2] - self.segs[:, 0], self.segs[:, 3] - self.segs[:, 1])

    @staticmethod
    def concat(scenes: Iterable["Scene"], meta: Optional[dict] = None) -> "Scene":
        scenes = list(scenes)
        arr = np.vstack([s.segs for s in scenes]) if scenes else np.zeros((0, 4))
        return Scene(arr, meta)
