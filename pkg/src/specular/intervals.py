"""Finite unions of closed intervals with exact measure."""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

MERGE_GAP = 1e-12


def _normalize(lo: np.ndarray, hi: np.ndarray, gap: float = MERGE_GAP) -> np.ndarray:
    if lo.size == 0:
        return np.zeros((0, 2))
    lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
    o = np.argsort(lo, kind="stable")
    lo, hi = lo[o], hi[o]
    run = np.maximum.accumulate(hi)
    # a new component starts where lo exceeds every previous hi by at least gap
    start = np.ones(lo.size, dtype=bool)
    start[1:] = lo[1:] - run[:-1] >= gap
    idx = np.flatnonzero(start)
    ends = np.append(idx[1:], lo.size) - 1
    return np.column_stack((lo[idx], run[ends]))


class IntervalSet:
    """Sorted disjoint closed intervals [a_i, b_i]."""

    __slots__ = ("_iv",)

    def __init__(self, intervals: Iterable[Sequence[float]] | np.ndarray = ()):
        a = np.asarray(list(intervals) if not isinstance(intervals, np.ndarray) else intervals,
                       dtype=float).reshape(-1, 2)
        self._iv = _normalize(a[:, 0], a[:, 1])

    @classmethod
    def _raw(cls, arr: np.ndarray) -> "IntervalSet":
        out = cls.__new__(cls)
        out._iv = arr
        return out

    @classmethod
    def from_bounds(cls, lo, hi) -> "IntervalSet":
        return cls._raw(_normalize(np.asarray(lo, float).ravel(), np.asarray(hi, float).ravel()))

    @property
    def intervals(self) -> np.ndarray:
        return self._iv.copy()

    def __len__(self) -> int:
        return len(self._iv)

    def __iter__(self):
        return (tuple(r) for r in self._iv.tolist())

    def __repr__(self) -> str:
        return f"IntervalSet({self._iv.tolist()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and np.array_equal(self._iv, other._iv)

    def is_empty(self) -> bool:
        return len(self._iv) == 0

    def measure(self) -> float:
        return float(np.sum(self._iv[:, 1] - self._iv[:, 0])) if len(self._iv) else 0.0

    def union(self, other: "IntervalSet") -> "IntervalSet":
        a = np.vstack((self._iv, other._iv))
        return IntervalSet._raw(_normalize(a[:, 0], a[:, 1]))

    def _sweep(self, other: "IntervalSet", keep) -> "IntervalSet":
        # boundary sweep: coverage counts for each set, keep(ca, cb) selects pieces
        pts = np.concatenate((self._iv.ravel(), other._iv.ravel()))
        if pts.size == 0:
            return IntervalSet()
        xs = np.unique(pts)
        if xs.size < 2:
            return IntervalSet()
        mid = 0.5 * (xs[:-1] + xs[1:])
        ca = _covered(self._iv, mid)
        cb = _covered(other._iv, mid)
        sel = keep(ca, cb)
        return IntervalSet._raw(_normalize(xs[:-1][sel], xs[1:][sel]))

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        return self._sweep(other, lambda a, b: a & b)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return self._sweep(other, lambda a, b: a & ~b)

    def symmetric_difference(self, other: "IntervalSet") -> "IntervalSet":
        return self._sweep(other, lambda a, b: a ^ b)

    __or__ = union
    __and__ = intersection
    __xor__ = symmetric_difference

    def contains(self, x: float) -> bool:
        return bool(_covered(self._iv, np.array([float(x)]))[0])

    def approx_equal(self, other: "IntervalSet", tol: float) -> bool:
        return self._iv.shape == other._iv.shape and bool(np.all(np.abs(self._iv - other._iv) <= tol))


def _covered(iv: np.ndarray, x: np.ndarray) -> np.ndarray:
    if len(iv) == 0:
        return np.zeros(x.shape, dtype=bool)
    k = np.searchsorted(iv[:, 0], x, side="right") - 1
    ok = k >= 0
    res = np.zeros(x.shape, dtype=bool)
    res[ok] = x[ok] <= iv[k[ok], 1]
    return res


def union_measure(lo: np.ndarray, hi: np.ndarray) -> float:
    """Measure of a union of intervals without building the set."""
    return IntervalSet.from_bounds(lo, hi).measure()
