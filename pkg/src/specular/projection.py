"""Orthogonal projections of segment scenes onto the lines K_theta."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import _backend
from .intervals import IntervalSet
from .scene import Scene


def _segs(scene) -> np.ndarray:
    return scene.segs if isinstance(scene, Scene) else np.asarray(scene, float).reshape(-1, 4)


def project_scene(scene, theta: float) -> IntervalSet:
    """Pi_theta of the scene as coordinates p . (cos theta, sin theta)."""
    s = _segs(scene)
    c, si = math.cos(theta), math.sin(theta)
    a = s[:, 0] * c + s[:, 1] * si
    b = s[:, 2] * c + s[:, 3] * si
    return IntervalSet.from_bounds(a, b)


def shadow_measure(scene, theta: float) -> float:
    return project_scene(scene, theta).measure()


def symdiff_measure(scene, theta: float, rho: float) -> float:
    """Leb(Pi_theta A symmetric-difference [0, rho])."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return project_scene(scene, theta).symmetric_difference(IntervalSet([(0.0, rho)])).measure()


def shadow_profile(scene, thetas, rho: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (measure, symdiff-vs-[0, rho]) over an array of angles."""
    s = np.ascontiguousarray(_segs(scene), dtype=float)
    th = np.ascontiguousarray(np.atleast_1d(np.asarray(thetas, dtype=float)))
    return _backend.kernels.shadow_profile(s, th, float(rho))


def angle_grid(a: float, b: float, step: float) -> np.ndarray:
    """Midpoint grid of [a, b] with spacing step."""
    n = max(1, int(math.ceil((b - a) / step - 1e-9)))
    return a + (np.arange(n) + 0.5) * step


@dataclass(frozen=True)
class ShadowAtMost:
    """Pass when Leb(Pi_theta A) <= bound."""
    bound: float

    def evaluate(self, scene, thetas) -> np.ndarray:
        m, _ = shadow_profile(scene, thetas)
        return m <= self.bound


@dataclass(frozen=True)
class SymdiffAtMost:
    """Pass when Leb(Pi_theta A symdiff [0, rho]) <= bound."""
    bound: float
    rho: float = 1.0

    def evaluate(self, scene, thetas) -> np.ndarray:
        _, sd = shadow_profile(scene, thetas, self.rho)
        return sd <= self.bound


Predicate = Union[ShadowAtMost, SymdiffAtMost, Callable[[float], bool]]


@dataclass
class BadAngles:
    estimate: float
    bad_list: np.ndarray = field(repr=False)
    grid_step: float = 0.0
    n_grid: int = 0


def bad_angle_measure(scene, rng: tuple[float, float], predicate: Predicate,
                      grid_step: float) -> BadAngles:
    """grid_step times the number of midpoint-grid angles failing the predicate."""
    a, b = rng
    if not a < b:
        raise ValueError("empty angle range")
    if grid_step <= 0 or grid_step > (b - a) / 100 * (1 + 1e-9):
        raise ValueError("grid_step must be in (0, (b - a) / 100]")
    ths = angle_grid(a, b, grid_step)
    if hasattr(predicate, "evaluate"):
        ok = np.asarray(predicate.evaluate(scene, ths), dtype=bool)
    else:
        ok = np.array([bool(predicate(t)) for t in ths], dtype=bool)
    bad = ths[~ok]
    return BadAngles(float(grid_step * bad.size), bad, grid_step, int(ths.size))
