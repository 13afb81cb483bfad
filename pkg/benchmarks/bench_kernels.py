"""Compare the compiled and numpy backends on shadow profiles and batched tracing.

    python benchmarks/bench_kernels.py [--segments 2000] [--rays 2000] [--angles 2000]
"""
import argparse
import time

import numpy as np

from specular import _backend
from specular.projection import shadow_profile
from specular.scene import Scene
from specular.tracer import trace_lines


def _time(fn, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--segments", type=int, default=2000)
    ap.add_argument("--rays", type=int, default=2000)
    ap.add_argument("--angles", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    rng = np.random.default_rng(a.seed)
    # slope -1 pieces, as in blocks
    xy = rng.uniform(0, 1, (a.segments, 2))
    h = rng.uniform(0.001, 0.01, a.segments)
    blocks = Scene(np.column_stack((xy, xy[:, 0] + h, xy[:, 1] - h)))
    p = rng.uniform(-1, 1, (a.segments // 4, 2))
    d = rng.uniform(-0.05, 0.05, (a.segments // 4, 2))
    clutter = Scene(np.hstack((p, p + d)))
    th = (np.arange(a.angles) + 0.5) * np.pi / a.angles
    ang = rng.uniform(0, 2 * np.pi, a.rays)
    v = np.column_stack((np.cos(ang), np.sin(ang)))
    r = rng.uniform(-1, 1, a.rays)
    w = r[:, None] * np.column_stack((-v[:, 1], v[:, 0]))

    rows = []
    results = {}
    for name in ("cython", "python"):
        try:
            _backend.use(name)
        except ImportError:
            print(f"{name}: unavailable")
            continue
        t1, s = _time(lambda: shadow_profile(blocks, th))
        t2, tr = _time(lambda: trace_lines(clutter, v, w), repeat=1)
        results[name] = (s, tr)
        rows.append((name, t1, t2))
    print(f"{'backend':8s} {'shadow [s]':>12s} {'trace [s]':>12s}")
    for name, t1, t2 in rows:
        print(f"{name:8s} {t1:12.4f} {t2:12.4f}")
    if len(results) == 2:
        (s1, r1), (s2, r2) = results["cython"], results["python"]
        print("max shadow difference:", float(np.max(np.abs(s1[0] - s2[0]))))
        print("max exit difference:  ", float(np.max(np.abs(r1.pos - r2.pos))))
        print("speed-up (shadow, trace): %.1fx, %.1fx" % (rows[1][1] / rows[0][1], rows[1][2] / rows[0][2]))


if __name__ == "__main__":
    main()
