"""Pure numpy versions of the compiled kernels (same signatures, same results)."""
from __future__ import annotations

import math

import numpy as np

ST_OK, ST_DEGENERATE, ST_CAP = 0, 1, 2


def shadow_profile(segs, thetas, rho):
    segs = np.asarray(segs, float)
    thetas = np.asarray(thetas, float)
    m = thetas.size
    if len(segs) == 0:
        return np.zeros(m), np.full(m, float(rho))
    out_m = np.empty(m)
    out_s = np.empty(m)
    chunk = max(1, 2_000_000 // len(segs))
    for a in range(0, m, chunk):
        th = thetas[a:a + chunk]
        c = np.cos(th)[:, None]
        s = np.sin(th)[:, None]
        p = segs[:, 0] * c + segs[:, 1] * s
        q = segs[:, 2] * c + segs[:, 3] * s
        lo = np.minimum(p, q)
        hi = np.maximum(p, q)
        o = np.argsort(lo, axis=1, kind="stable")
        lo = np.take_along_axis(lo, o, 1)
        hi = np.take_along_axis(hi, o, 1)
        run = np.maximum.accumulate(hi, axis=1)
        prev = np.concatenate((np.full((len(th), 1), -np.inf), run[:, :-1]), 1)
        # components start where the gap to every earlier interval is at least 1e-12
        start = (lo - prev) >= 1e-12
        start[:, 0] = True
        comp = np.cumsum(start, axis=1) - 1
        tot = np.zeros(len(th))
        inter = np.zeros(len(th))
        for r in range(len(th)):
            idx = np.flatnonzero(start[r])
            ends = np.append(idx[1:], lo.shape[1]) - 1
            cl = lo[r, idx]
            ch = run[r, ends]
            tot[r] = np.sum(ch - cl)
            inter[r] = np.sum(np.clip(np.minimum(ch, rho) - np.maximum(cl, 0.0), 0.0, None))
        del comp
        out_m[a:a + chunk] = tot
        out_s[a:a + chunk] = tot + rho - 2 * inter
    return out_m, out_s


def _nearest(segs, ex, ey, L, ox, oy, vx, vy, eps):
    den = vx * ey - vy * ex
    dx = segs[:, 0] - ox
    dy = segs[:, 1] - oy
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (dx * ey - dy * ex) / den
        u = (dx * vy - dy * vx) / den
    tol = eps / L
    ok = (np.abs(den) > 1e-15 * L) & (t > eps) & (u >= -tol) & (u <= 1 + tol)
    if not ok.any():
        return -1, 0.0, 0
    idx = np.flatnonzero(ok)
    tt = t[idx]
    j = idx[np.argmin(tt)]
    tb = t[j]
    ties = idx[np.abs(tt - tb) <= 1e-15]
    ep_all = (u[ties] * L[ties] <= eps) | ((1 - u[ties]) * L[ties] <= eps)
    if ep_all.any():
        return int(ties[np.argmax(ep_all)]), float(tb), 1
    uj = u[j]
    ep = int(uj * L[j] <= eps or (1 - uj) * L[j] <= eps)
    return int(j), float(tb), ep


def _prep(segs):
    ex = segs[:, 2] - segs[:, 0]
    ey = segs[:, 3] - segs[:, 1]
    return ex, ey, np.hypot(ex, ey)


def _walk(segs, pre, ox, oy, vx, vy, cap, eps, record=None):
    ex, ey, L = pre
    b = 0
    status = ST_OK
    first = -1
    while len(segs):
        k, t, ep = _nearest(segs, ex, ey, L, ox, oy, vx, vy, eps)
        if k < 0:
            break
        if b == 0:
            first = k
        ox, oy = ox + t * vx, oy + t * vy
        if record is not None:
            record.append((ox, oy, k))
        if ep:
            status = ST_DEGENERATE
            break
        if b >= cap:
            status = ST_CAP
            break
        mx, my = ex[k] / L[k], ey[k] / L[k]
        d = vx * mx + vy * my
        nvx, nvy = 2 * d * mx - vx, 2 * d * my - vy
        nn = math.sqrt(nvx * nvx + nvy * nvy)
        vx, vy = nvx / nn, nvy / nn
        b += 1
        ox += eps * vx
        oy += eps * vy
    return ox, oy, vx, vy, b, status, first


def trace_batch(segs, gbox, start, items, origins, dirs, cap, eps, first=0, last=-1):
    segs = np.asarray(segs, float)
    if last < 0:
        last = len(origins)
    n = last - first
    pos = np.empty((n, 2))
    dout = np.empty((n, 2))
    nb = np.zeros(n, dtype=np.int64)
    st = np.zeros(n, dtype=np.int8)
    fs = np.full(n, -1, dtype=np.int64)
    pre = _prep(segs)
    for i in range(n):
        r = first + i
        ox, oy, vx, vy, b, status, f = _walk(segs, pre, float(origins[r, 0]), float(origins[r, 1]),
                                             float(dirs[r, 0]), float(dirs[r, 1]), cap, eps)
        pos[i] = ox, oy
        dout[i] = vx, vy
        nb[i] = b
        st[i] = status
        fs[i] = f
    return pos, dout, nb, st, fs


def trace_path(segs, gbox, start, items, ox, oy, vx, vy, cap, eps):
    segs = np.asarray(segs, float)
    pts: list = []
    _, _, vx, vy, _, status, _ = _walk(segs, _prep(segs), ox, oy, vx, vy, cap, eps, pts)
    return pts, (vx, vy), status
