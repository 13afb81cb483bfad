# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: shadow profiles over angle grids and batched ray tracing."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fabs, floor, INFINITY
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

DEF ST_OK = 0
DEF ST_DEGENERATE = 1
DEF ST_CAP = 2


cdef struct KV:
    double k
    double v


cdef int _cmp_kv(const void* a, const void* b) noexcept nogil:
    cdef double x = (<KV*> a).k, y = (<KV*> b).k
    return (x > y) - (x < y)


cdef inline int _insertion_sort(double* key, double* val, Py_ssize_t n,
                                Py_ssize_t limit) noexcept nogil:
    # returns 0 (arrays still a permutation) once more than `limit` moves are needed
    cdef Py_ssize_t i, j, moves = 0
    cdef double k, v
    for i in range(1, n):
        k = key[i]
        v = val[i]
        j = i - 1
        while j >= 0 and key[j] > k:
            key[j + 1] = key[j]
            val[j + 1] = val[j]
            j -= 1
            moves += 1
        key[j + 1] = k
        val[j + 1] = v
        if moves > limit:
            return 0
    return 1


cdef void _sort_pairs(double* key, double* val, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    if _insertion_sort(key, val, n, 32 * n + 64):
        return
    cdef KV* buf = <KV*> malloc(n * sizeof(KV))
    for i in range(n):
        buf[i].k = key[i]
        buf[i].v = val[i]
    qsort(buf, n, sizeof(KV), _cmp_kv)
    for i in range(n):
        key[i] = buf[i].k
        val[i] = buf[i].v
    free(buf)


def shadow_profile(double[:, ::1] segs, double[::1] thetas, double rho):
    """Per-angle union measure and symmetric difference against [0, rho]."""
    cdef Py_ssize_t n = segs.shape[0], m = thetas.shape[0], i, k, j
    out_m = np.zeros(m, dtype=np.float64)
    out_s = np.zeros(m, dtype=np.float64)
    cdef double[::1] om = out_m, osd = out_s
    if n == 0:
        for k in range(m):
            osd[k] = rho
        return out_m, out_s
    cdef int* order = <int*> malloc(n * sizeof(int))
    cdef double* lo = <double*> malloc(n * sizeof(double))
    cdef double* hi = <double*> malloc(n * sizeof(double))
    cdef double* slo = <double*> malloc(n * sizeof(double))
    cdef double* shi = <double*> malloc(n * sizeof(double))
    cdef double c, s, a, b, cur_lo, cur_hi, tot, inter, l2, h2
    cdef int t
    try:
        with nogil:
            for i in range(n):
                order[i] = <int> i
            for k in range(m):
                c = cos(thetas[k])
                s = sin(thetas[k])
                for i in range(n):
                    a = segs[i, 0] * c + segs[i, 1] * s
                    b = segs[i, 2] * c + segs[i, 3] * s
                    if a <= b:
                        lo[i] = a
                        hi[i] = b
                    else:
                        lo[i] = b
                        hi[i] = a
                # warm start from the previous angle's order; full sort when far from sorted
                for i in range(n):
                    slo[i] = lo[order[i]]
                    shi[i] = <double> order[i]
                _sort_pairs(slo, shi, n)
                for i in range(n):
                    t = <int> shi[i]
                    order[i] = t
                    shi[i] = hi[t]
                tot = 0.0
                inter = 0.0
                cur_lo = slo[0]
                cur_hi = shi[0]
                for i in range(1, n + 1):
                    if i < n and slo[i] - cur_hi < 1e-12:
                        if shi[i] > cur_hi:
                            cur_hi = shi[i]
                        continue
                    tot += cur_hi - cur_lo
                    l2 = cur_lo if cur_lo > 0.0 else 0.0
                    h2 = cur_hi if cur_hi < rho else rho
                    if h2 > l2:
                        inter += h2 - l2
                    if i < n:
                        cur_lo = slo[i]
                        cur_hi = shi[i]
                om[k] = tot
                osd[k] = tot + rho - 2.0 * inter
    finally:
        free(order); free(lo); free(hi); free(slo); free(shi)
    return out_m, out_s


cdef inline int _hit(double ox, double oy, double vx, double vy,
                     double px, double py, double qx, double qy, double eps,
                     double* t_out, int* endpoint) noexcept nogil:
    cdef double ex = qx - px, ey = qy - py
    cdef double den = vx * ey - vy * ex
    cdef double L = sqrt(ex * ex + ey * ey)
    cdef double dx, dy, t, u, tol
    if fabs(den) <= 1e-15 * L:
        return 0
    dx = px - ox
    dy = py - oy
    t = (dx * ey - dy * ex) / den
    if t <= eps:
        return 0
    u = (dx * vy - dy * vx) / den
    tol = eps / L
    if u < -tol or u > 1.0 + tol:
        return 0
    t_out[0] = t
    endpoint[0] = 1 if (u * L <= eps or (1.0 - u) * L <= eps) else 0
    return 1


cdef struct Grid:
    double x0, y0, cw, ch
    int nx, ny
    const long* start
    const int* items


cdef int _nearest(const double[:, ::1] segs, Grid* g, int* stamp, int tag,
                  double ox, double oy, double vx, double vy, double eps,
                  double* t_best, int* endpoint) noexcept nogil:
    """Amanatides-Woo walk over the grid; returns the index of the first hit or -1."""
    cdef double tmin = 0.0, tmax = INFINITY, t1, t2, tt
    cdef double xmax = g.x0 + g.nx * g.cw, ymax = g.y0 + g.ny * g.ch
    cdef int best = -1, ep, ix, iy, sx, sy, c
    cdef long a, b, kk
    cdef double tdx, tdy, tnx, tny, tcell, t_enter
    # clip to the grid box
    if vx != 0.0:
        t1 = (g.x0 - ox) / vx
        t2 = (xmax - ox) / vx
        if t1 > t2:
            t1, t2 = t2, t1
        tmin = max(tmin, t1)
        tmax = min(tmax, t2)
    elif ox < g.x0 or ox > xmax:
        return -1
    if vy != 0.0:
        t1 = (g.y0 - oy) / vy
        t2 = (ymax - oy) / vy
        if t1 > t2:
            t1, t2 = t2, t1
        tmin = max(tmin, t1)
        tmax = min(tmax, t2)
    elif oy < g.y0 or oy > ymax:
        return -1
    if tmin > tmax:
        return -1
    t_enter = tmin
    ix = <int> floor((ox + tmin * vx - g.x0) / g.cw)
    iy = <int> floor((oy + tmin * vy - g.y0) / g.ch)
    ix = min(max(ix, 0), g.nx - 1)
    iy = min(max(iy, 0), g.ny - 1)
    if vx > 0:
        sx = 1
        tdx = g.cw / vx
        tnx = (g.x0 + (ix + 1) * g.cw - ox) / vx
    elif vx < 0:
        sx = -1
        tdx = -g.cw / vx
        tnx = (g.x0 + ix * g.cw - ox) / vx
    else:
        sx = 0
        tdx = INFINITY
        tnx = INFINITY
    if vy > 0:
        sy = 1
        tdy = g.ch / vy
        tny = (g.y0 + (iy + 1) * g.ch - oy) / vy
    elif vy < 0:
        sy = -1
        tdy = -g.ch / vy
        tny = (g.y0 + iy * g.ch - oy) / vy
    else:
        sy = 0
        tdy = INFINITY
        tny = INFINITY
    t_best[0] = INFINITY
    while True:
        c = iy * g.nx + ix
        a = g.start[c]
        b = g.start[c + 1]
        for kk in range(a, b):
            k = g.items[kk]
            if stamp[k] == tag:
                continue
            stamp[k] = tag
            if _hit(ox, oy, vx, vy, segs[k, 0], segs[k, 1], segs[k, 2], segs[k, 3], eps, &tt, &ep):
                if tt < t_best[0] - 1e-15 or (tt <= t_best[0] + 1e-15 and ep and not endpoint[0]):
                    t_best[0] = tt
                    endpoint[0] = ep
                    best = k
        tcell = tnx if tnx < tny else tny
        if best >= 0 and t_best[0] <= tcell + eps:
            return best
        if tcell > tmax + eps:
            return best
        if tnx < tny:
            ix += sx
            tnx += tdx
            if ix < 0 or ix >= g.nx:
                return best
        else:
            iy += sy
            tny += tdy
            if iy < 0 or iy >= g.ny:
                return best


def trace_batch(double[:, ::1] segs, double[::1] gbox, long[::1] start, int[::1] items,
                double[:, ::1] origins, double[:, ::1] dirs, long cap, double eps,
                long first=0, long last=-1):
    """Trace rays [first, last) and return (pos, dir, bounces, status, first_seg)."""
    cdef Py_ssize_t nr = origins.shape[0], ns = segs.shape[0]
    if last < 0:
        last = nr
    cdef Py_ssize_t cnt = last - first
    pos = np.empty((cnt, 2), dtype=np.float64)
    dout = np.empty((cnt, 2), dtype=np.float64)
    nb = np.zeros(cnt, dtype=np.int64)
    st = np.zeros(cnt, dtype=np.int8)
    fs = np.full(cnt, -1, dtype=np.int64)
    cdef double[:, ::1] P = pos, D = dout
    cdef long[::1] NB = nb
    cdef signed char[::1] ST = st
    cdef long[::1] FS = fs
    cdef Grid g
    g.x0 = gbox[0]; g.y0 = gbox[1]; g.cw = gbox[2]; g.ch = gbox[3]
    g.nx = <int> gbox[4]; g.ny = <int> gbox[5]
    g.start = &start[0]
    g.items = &items[0] if items.shape[0] > 0 else NULL
    cdef int* stamp = <int*> malloc((ns + 1) * sizeof(int))
    cdef int tag = 0, k, ep
    cdef Py_ssize_t r, i
    cdef long b
    cdef double ox, oy, vx, vy, t, mx, my, ml, d, nvx, nvy, nn
    for i in range(ns + 1):
        stamp[i] = -1
    try:
        with nogil:
            for i in range(cnt):
                r = first + i
                ox = origins[r, 0]; oy = origins[r, 1]
                vx = dirs[r, 0]; vy = dirs[r, 1]
                b = 0
                ST[i] = ST_OK
                while True:
                    if ns == 0:
                        break
                    tag += 1
                    ep = 0
                    k = _nearest(segs, &g, stamp, tag, ox, oy, vx, vy, eps, &t, &ep)
                    if k < 0:
                        break
                    if b == 0:
                        FS[i] = k
                    ox = ox + t * vx
                    oy = oy + t * vy
                    if ep:
                        ST[i] = ST_DEGENERATE
                        break
                    if b >= cap:
                        ST[i] = ST_CAP
                        break
                    mx = segs[k, 2] - segs[k, 0]
                    my = segs[k, 3] - segs[k, 1]
                    ml = sqrt(mx * mx + my * my)
                    mx /= ml
                    my /= ml
                    d = vx * mx + vy * my
                    nvx = 2.0 * d * mx - vx
                    nvy = 2.0 * d * my - vy
                    nn = sqrt(nvx * nvx + nvy * nvy)
                    vx = nvx / nn
                    vy = nvy / nn
                    b += 1
                    ox += eps * vx
                    oy += eps * vy
                P[i, 0] = ox; P[i, 1] = oy
                D[i, 0] = vx; D[i, 1] = vy
                NB[i] = b
    finally:
        free(stamp)
    return pos, dout, nb, st, fs


def trace_path(double[:, ::1] segs, double[::1] gbox, long[::1] start, int[::1] items,
               double ox, double oy, double vx, double vy, long cap, double eps):
    """Single ray with recorded reflection points; returns (points, dir, status)."""
    cdef Grid g
    g.x0 = gbox[0]; g.y0 = gbox[1]; g.cw = gbox[2]; g.ch = gbox[3]
    g.nx = <int> gbox[4]; g.ny = <int> gbox[5]
    g.start = &start[0]
    g.items = &items[0] if items.shape[0] > 0 else NULL
    cdef Py_ssize_t ns = segs.shape[0], i
    cdef int* stamp = <int*> malloc((ns + 1) * sizeof(int))
    cdef int tag = 0, k, ep
    cdef double t, mx, my, ml, d, nvx, nvy, nn
    cdef long b = 0
    status = ST_OK
    pts = []
    for i in range(ns + 1):
        stamp[i] = -1
    try:
        while ns > 0:
            tag += 1
            ep = 0
            k = _nearest(segs, &g, stamp, tag, ox, oy, vx, vy, eps, &t, &ep)
            if k < 0:
                break
            ox = ox + t * vx
            oy = oy + t * vy
            pts.append((ox, oy, k))
            if ep:
                status = ST_DEGENERATE
                break
            if b >= cap:
                status = ST_CAP
                break
            mx = segs[k, 2] - segs[k, 0]
            my = segs[k, 3] - segs[k, 1]
            ml = sqrt(mx * mx + my * my)
            mx /= ml
            my /= ml
            d = vx * mx + vy * my
            nvx = 2.0 * d * mx - vx
            nvy = 2.0 * d * my - vy
            nn = sqrt(nvx * nvx + nvy * nvy)
            vx = nvx / nn
            vy = nvy / nn
            b += 1
            ox += eps * vx
            oy += eps * vy
    finally:
        free(stamp)
    return pts, (vx, vy), status
