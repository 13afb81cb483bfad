"""The line measure nu2 on V = {lines meeting the unit disc} and Monte Carlo reports."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .tracer import ST_CAP, ST_DEGENERATE, ST_OK, trace_lines

NU2_V = 4 * math.pi
Z95 = 1.959963984540054


@dataclass
class LineSamples:
    """theta in [0, 2 pi), r in [0, 1], side = +1 / -1 (v = e^{i(theta + side pi/2)})."""
    theta: np.ndarray
    r: np.ndarray
    side: np.ndarray
    weight: float
    seed: int

    def __len__(self) -> int:
        return len(self.theta)

    @property
    def v(self) -> np.ndarray:
        a = self.theta + self.side * (math.pi / 2)
        return np.column_stack((np.cos(a), np.sin(a)))

    @property
    def w(self) -> np.ndarray:
        return np.column_stack((self.r * np.cos(self.theta), self.r * np.sin(self.theta)))


def _uniforms(seed: int, n: int) -> np.ndarray:
    # sample i consumes Philox block i (counter = i), so values depend only on (seed, i)
    bg = np.random.Philox(key=int(seed) & (2**64 - 1))
    raw = bg.random_raw(4 * n).reshape(n, 4)[:, :2]
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def sample_lines(n: int, seed: int = 0) -> LineSamples:
    """Stratified in theta: sample i sits in stratum i // 2 with side +1 for even i."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        e = np.zeros(0)
        return LineSamples(e, e, np.zeros(0, dtype=np.int8), 0.0, seed)
    u = _uniforms(seed, n)
    i = np.arange(n)
    strata = (n + 1) // 2
    theta = 2 * math.pi * ((i // 2) + u[:, 0]) / strata
    side = np.where(i % 2 == 0, 1, -1).astype(np.int8)
    return LineSamples(theta, u[:, 1], side, NU2_V / n, seed)


@dataclass
class Estimate:
    measure: float
    ci: float
    fraction: float
    n: int


def nu2_estimate(samples: LineSamples, event) -> Estimate:
    """4 pi times the fraction of samples in the event, with a 95% normal half-width.

    ``event`` is a boolean array or a callable (theta, r, side) -> bool array.
    """
    n = len(samples)
    if n == 0:
        return Estimate(0.0, 0.0, 0.0, 0)
    if callable(event):
        hit = np.asarray(event(samples.theta, samples.r, samples.side), dtype=bool)
    else:
        hit = np.asarray(event, dtype=bool)
    hit = np.broadcast_to(hit, (n,))
    p = float(hit.mean())
    ci = NU2_V * Z95 * math.sqrt(p * (1 - p) / n)
    return Estimate(NU2_V * p, ci, p, n)


def _ci(p: float, n: int) -> float:
    return Z95 * math.sqrt(max(p * (1 - p), 0.0) / n) if n else 0.0


@dataclass
class Theorem1Report:
    n_samples: int
    seed: int
    eps: float
    hit_fraction: float
    hit_ci: float
    same_direction_fraction: float   # among hit rays
    same_direction_ci: float
    good_fraction: float             # hit and same direction and |w - w1| <= eps, over all samples
    good_ci: float
    displacement_median: float
    displacement_q90: float
    displacement_max: float
    small_displacement_fraction: float  # among hit rays with same direction
    degenerate: int
    cap_exceeded: int
    nu2_miss: float                  # nu2 of lines missing F
    nu2_not_good: float              # nu2 of lines outside the good event
    mean_bounces: float

    def to_dict(self) -> dict:
        return asdict(self)


def _quantile(x: np.ndarray, q: float) -> float:
    return float(np.quantile(x, q)) if x.size else float("nan")


def theorem1_report(scene, eps: float, n: int, seed: int = 0, cap: int = 10_000,
                    threads: Optional[int] = None) -> Theorem1Report:
    """Trace n sampled lines of V through the scene and aggregate invisibility statistics."""
    sc = getattr(scene, "scene", scene)
    s = sample_lines(n, seed)
    if n == 0:
        nan = float("nan")
        return Theorem1Report(0, seed, eps, 0, 0, nan, 0, 0, 0, nan, nan, nan, nan, 0, 0, 0, 0, 0)
    v, w = s.v, s.w
    res = trace_lines(sc, v, w, cap=cap, threads=threads)
    hit = res.first_seg >= 0
    ok = res.status == ST_OK
    same = ok & np.all(np.abs(res.dirs - v) <= 1e-9, axis=1)
    disp = np.linalg.norm(res.exit_w() - w, axis=1)
    good = hit & same & (disp <= eps)
    nh = int(hit.sum())
    hs = hit & same
    p_same = float(same[hit].mean()) if nh else float("nan")
    d_hs = disp[hs]
    return Theorem1Report(
        n, int(seed), float(eps),
        float(hit.mean()), _ci(float(hit.mean()), n),
        p_same, _ci(p_same, nh) if nh else float("nan"),
        float(good.mean()), _ci(float(good.mean()), n),
        _quantile(d_hs, 0.5), _quantile(d_hs, 0.9), float(d_hs.max()) if d_hs.size else float("nan"),
        float((d_hs <= eps).mean()) if d_hs.size else float("nan"),
        int(np.sum(res.status == ST_DEGENERATE)), int(np.sum(res.status == ST_CAP)),
        NU2_V * float((~hit).mean()), NU2_V * float((~good).mean()),
        float(res.bounces.mean()),
    )
