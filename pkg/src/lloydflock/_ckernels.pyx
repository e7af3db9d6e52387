# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same algorithms and signatures as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, exp, expm1, atan2, cos, sin, hypot, log, INFINITY, isfinite, M_PI
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double GEO_TOL = 1e-9
cdef double AREA_EPS = 1e-12
cdef int MAX_DEPTH = 48
cdef int MAX_GRADE = 24
# Kronrod evaluations per refinement pass; a guard, not normally reached
cdef int BUDGET = 20000

cdef double XK[4]
cdef double WK[4]
cdef double WG[4]
XK[:] = [0.9604912687080202834235071, 0.7745966692414833770358531,
         0.4342437493468025580020715, 0.0]
WK[:] = [0.1046562260264672651938239, 0.2684880898683334407285722,
         0.4013974147759622229050518, 0.4509165386584741423451497]
WG[:] = [0.0, 5.0 / 9.0, 0.0, 8.0 / 9.0]


cdef struct Piece:
    double lo, hi
    double c0x, c0y, d0
    double fnx, fny, fh
    int near
    double nnx, nny, nh


cdef struct Edge:
    double a0, a1, nx, ny, h


cdef inline double _area(const double[:, ::1] V) noexcept nogil:
    cdef Py_ssize_t n = V.shape[0], k, j
    cdef double s = 0.0
    if n < 3:
        return 0.0
    for k in range(n):
        j = k + 1 if k + 1 < n else 0
        s += V[k, 0] * V[j, 1] - V[j, 0] * V[k, 1]
    return 0.5 * s


def polygon_area(V):
    cdef const double[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64).reshape(-1, 2)
    return _area(v)


cdef object _clean(double* px, double* py, Py_ssize_t m):
    cdef Py_ssize_t i, k = 0
    for i in range(m):
        if k and fabs(px[i] - px[k - 1]) <= GEO_TOL and fabs(py[i] - py[k - 1]) <= GEO_TOL:
            continue
        px[k] = px[i]
        py[k] = py[i]
        k += 1
    while k > 1 and fabs(px[0] - px[k - 1]) <= GEO_TOL and fabs(py[0] - py[k - 1]) <= GEO_TOL:
        k -= 1
    if k < 3:
        return np.empty((0, 2))
    out = np.empty((k, 2))
    cdef double[:, ::1] o = out
    for i in range(k):
        o[i, 0] = px[i]
        o[i, 1] = py[i]
    if _area(o) < AREA_EPS:
        return np.empty((0, 2))
    return out


def clip_halfplane(V, double nx, double ny, double off, double tol=GEO_TOL):
    cdef const double[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t n = v.shape[0], k, j, m = 0
    if n == 0:
        return np.empty((0, 2))
    cdef double* s = <double*> malloc(n * sizeof(double))
    cdef double* ox = <double*> malloc(2 * n * sizeof(double))
    cdef double* oy = <double*> malloc(2 * n * sizeof(double))
    cdef double smax = -INFINITY, smin = INFINITY, t
    try:
        for k in range(n):
            s[k] = nx * v[k, 0] + ny * v[k, 1] - off
            if s[k] > smax:
                smax = s[k]
            if s[k] < smin:
                smin = s[k]
        if smax <= tol:
            return np.array(v, dtype=np.float64)
        if smin > tol:
            return np.empty((0, 2))
        for k in range(n):
            j = k + 1 if k + 1 < n else 0
            if s[k] <= tol:
                ox[m] = v[k, 0]
                oy[m] = v[k, 1]
                m += 1
            if (s[k] <= tol) != (s[j] <= tol):
                t = s[k] / (s[k] - s[j])
                ox[m] = v[k, 0] + t * (v[j, 0] - v[k, 0])
                oy[m] = v[k, 1] + t * (v[j, 1] - v[k, 1])
                m += 1
        return _clean(ox, oy, m)
    finally:
        free(s)
        free(ox)
        free(oy)


cdef double _area_ptr(const double* x, const double* y, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k, j
    cdef double a = 0.0
    for k in range(n):
        j = k + 1 if k + 1 < n else 0
        a += (x[k] - x[0]) * (y[j] - y[0]) - (x[j] - x[0]) * (y[k] - y[0])
    return 0.5 * a


cdef Py_ssize_t _clip_step(const double* ix, const double* iy, Py_ssize_t n, double nx,
                           double ny, double off, double tol, double* ox, double* oy,
                           double* s) noexcept nogil:
    """Same rule as ``clip_halfplane``; returns -1 when the constraint does not bind."""
    cdef Py_ssize_t k, j, m = 0, q = 0
    cdef double smax = -INFINITY, smin = INFINITY, t
    for k in range(n):
        s[k] = nx * ix[k] + ny * iy[k] - off
        if s[k] > smax:
            smax = s[k]
        if s[k] < smin:
            smin = s[k]
    if smax <= tol:
        return -1
    if smin > tol:
        return 0
    for k in range(n):
        j = k + 1 if k + 1 < n else 0
        if s[k] <= tol:
            ox[m] = ix[k]
            oy[m] = iy[k]
            m += 1
        if (s[k] <= tol) != (s[j] <= tol):
            t = s[k] / (s[k] - s[j])
            ox[m] = ix[k] + t * (ix[j] - ix[k])
            oy[m] = iy[k] + t * (iy[j] - iy[k])
            m += 1
    for k in range(m):
        if q and fabs(ox[k] - ox[q - 1]) <= GEO_TOL and fabs(oy[k] - oy[q - 1]) <= GEO_TOL:
            continue
        ox[q] = ox[k]
        oy[q] = oy[k]
        q += 1
    while q > 1 and fabs(ox[0] - ox[q - 1]) <= GEO_TOL and fabs(oy[0] - oy[q - 1]) <= GEO_TOL:
        q -= 1
    if q < 3 or _area_ptr(ox, oy, q) < AREA_EPS:
        return 0
    return q


def clip_many(V, normals, offsets, double tol=GEO_TOL):
    cdef const double[:, ::1] nrm = np.ascontiguousarray(normals, dtype=np.float64).reshape(-1, 2)
    cdef const double[::1] off = np.ascontiguousarray(offsets, dtype=np.float64).reshape(-1)
    cdef const double[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t n = v.shape[0], h = nrm.shape[0], cap, i, r
    if n == 0 or h == 0:
        return np.array(v, dtype=np.float64)
    cap = 2 * (n + h) + 4
    cdef double* buf = <double*> malloc(5 * cap * sizeof(double))
    cdef double* ax = buf
    cdef double* ay = buf + cap
    cdef double* bx = buf + 2 * cap
    cdef double* by = buf + 3 * cap
    cdef double* s = buf + 4 * cap
    cdef double* tp
    cdef double[:, ::1] o
    try:
        with nogil:
            for i in range(n):
                ax[i] = v[i, 0]
                ay[i] = v[i, 1]
            for i in range(h):
                r = _clip_step(ax, ay, n, nrm[i, 0], nrm[i, 1], off[i], tol, bx, by, s)
                if r == -1:
                    continue
                n = r
                if n == 0:
                    break
                tp = ax
                ax = bx
                bx = tp
                tp = ay
                ay = by
                by = tp
        out = np.empty((n, 2))
        o = out
        for i in range(n):
            o[i, 0] = ax[i]
            o[i, 1] = ay[i]
        return out
    finally:
        free(buf)


cdef bint _contains(const double[:, ::1] V, double x, double y, double tol) noexcept nogil:
    cdef Py_ssize_t n = V.shape[0], k, j
    cdef double ex, ey, L
    if n < 3:
        return False
    for k in range(n):
        j = k + 1 if k + 1 < n else 0
        ex = V[j, 0] - V[k, 0]
        ey = V[j, 1] - V[k, 1]
        L = hypot(ex, ey)
        if (ex * (y - V[k, 1]) - ey * (x - V[k, 0])) / L < -tol:
            return False
    return True


def contains(V, double x, double y, double tol=GEO_TOL):
    cdef const double[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64).reshape(-1, 2)
    return _contains(v, x, y, tol)


cdef inline double _seg_dist2(double ax, double ay, double bx, double by,
                              double x, double y, double* qx, double* qy) noexcept nogil:
    cdef double ex = bx - ax, ey = by - ay
    cdef double L2 = ex * ex + ey * ey
    cdef double t = 0.0
    if L2 != 0.0:
        t = ((x - ax) * ex + (y - ay) * ey) / L2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    qx[0] = ax + t * ex
    qy[0] = ay + t * ey
    return (x - qx[0]) * (x - qx[0]) + (y - qy[0]) * (y - qy[0])


cdef double _bdist(const double[:, ::1] V, double x, double y) noexcept nogil:
    cdef Py_ssize_t n = V.shape[0], k, j
    cdef double best = INFINITY, d2, qx, qy
    for k in range(n):
        j = k + 1 if k + 1 < n else 0
        d2 = _seg_dist2(V[k, 0], V[k, 1], V[j, 0], V[j, 1], x, y, &qx, &qy)
        if d2 < best:
            best = d2
    return sqrt(best)


def boundary_distance(V, double x, double y):
    cdef const double[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64).reshape(-1, 2)
    return _bdist(v, x, y)


cdef double _nearest(const double[:, ::1] V, double x, double y, double* zx, double* zy) noexcept nogil:
    cdef Py_ssize_t n = V.shape[0], k, j
    cdef double best = INFINITY, d2, qx, qy
    if _contains(V, x, y, 0.0):
        zx[0] = x
        zy[0] = y
        return 0.0
    zx[0] = x
    zy[0] = y
    for k in range(n):
        j = k + 1 if k + 1 < n else 0
        d2 = _seg_dist2(V[k, 0], V[k, 1], V[j, 0], V[j, 1], x, y, &qx, &qy)
        if d2 < best:
            best = d2
            zx[0] = qx
            zy[0] = qy
    return sqrt(best)


def nearest_point(V, double x, double y):
    cdef const double[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64).reshape(-1, 2)
    cdef double zx, zy, d
    d = _nearest(v, x, y, &zx, &zy)
    return zx, zy, d


cdef void _area_centroid(const double[:, ::1] V, double* cx, double* cy) noexcept nogil:
    cdef Py_ssize_t n = V.shape[0], k, j
    cdef double a = 0.0, sx = 0.0, sy = 0.0, ax, ay, bx, by, c
    cdef double x0 = V[0, 0], y0 = V[0, 1]
    for k in range(n):
        j = k + 1 if k + 1 < n else 0
        ax = V[k, 0] - x0
        ay = V[k, 1] - y0
        bx = V[j, 0] - x0
        by = V[j, 1] - y0
        c = ax * by - bx * ay
        a += c
        sx += (ax + bx) * c
        sy += (ay + by) * c
    cx[0] = x0 + sx / (3.0 * a)
    cy[0] = y0 + sy / (3.0 * a)


def area_centroid(V):
    cdef const double[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64).reshape(-1, 2)
    cdef double cx, cy
    _area_centroid(v, &cx, &cy)
    return cx, cy


cdef inline void _gammas(double D, double* g0, double* g1, double* g2) noexcept nogil:
    cdef double term = 1.0, s1 = 0.0, s2 = 0.0, e
    cdef int m = 0
    g0[0] = -expm1(-D)
    if D < 0.1:
        while True:
            s1 += term / (m + 2)
            s2 += term / (m + 3)
            m += 1
            term *= -D / m
            if fabs(term) < 1e-17:
                break
        g1[0] = s1 * D * D
        g2[0] = s2 * D * D * D
        return
    e = exp(-D)
    g1[0] = g0[0] - D * e
    g2[0] = 2.0 * g0[0] - D * e * (2.0 + D)


cdef inline void _density(double a, const Piece* p, double beta, double* out) noexcept nogil:
    cdef double ca = cos(a), sa = sin(a)
    cdef double ux = p.c0x * ca - p.c0y * sa
    cdef double uy = p.c0x * sa + p.c0y * ca
    cdef double rout = p.fh / (p.fnx * ux + p.fny * uy)
    cdef double rin = 0.0, D, g0, g1, g2, e, s
    if p.near:
        rin = p.nh / (p.nnx * ux + p.nny * uy)
    D = (rout - rin) / beta
    if D < 0.0:
        D = 0.0
    _gammas(D, &g0, &g1, &g2)
    e = beta * exp(-(rin - p.d0) / beta)
    s = e * (rin * rin * g0 + 2.0 * rin * beta * g1 + beta * beta * g2)
    out[0] = e * (rin * g0 + beta * g1)
    out[1] = s * ux
    out[2] = s * uy


cdef inline void _kronrod(double lo, double hi, const Piece* p, double beta,
                          double* k, double* g) noexcept nogil:
    cdef double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo)
    cdef double f[3]
    cdef int i, sgn, q
    for q in range(3):
        k[q] = 0.0
        g[q] = 0.0
    for i in range(4):
        for sgn in range(2):
            if XK[i] == 0.0 and sgn == 1:
                break
            if sgn == 0:
                _density(c - h * XK[i], p, beta, f)
            else:
                _density(c + h * XK[i], p, beta, f)
            for q in range(3):
                k[q] += WK[i] * f[q]
                g[q] += WG[i] * f[q]
    for q in range(3):
        k[q] *= h
        g[q] *= h


cdef void _adapt(double lo, double hi, const Piece* p, double beta, double cx, double cy,
                 double rate, int depth, double* acc, const double* kg, int* budget) noexcept nogil:
    cdef double k[3]
    cdef double g[3]
    cdef double err, mid
    cdef int q
    if kg != NULL:
        for q in range(3):
            k[q] = kg[q]
            g[q] = kg[3 + q]
    else:
        budget[0] -= 1
        _kronrod(lo, hi, p, beta, k, g)
    err = fabs((k[1] - g[1]) - cx * (k[0] - g[0])) + fabs((k[2] - g[2]) - cy * (k[0] - g[0]))
    if err <= rate * (hi - lo) or depth >= MAX_DEPTH or budget[0] <= 0:
        acc[0] += k[0]
        acc[1] += k[1]
        acc[2] += k[2]
        return
    mid = 0.5 * (lo + hi)
    _adapt(lo, mid, p, beta, cx, cy, rate, depth + 1, acc, NULL, budget)
    _adapt(mid, hi, p, beta, cx, cy, rate, depth + 1, acc, NULL, budget)


cdef void _sort_edges(Edge* e, int n) noexcept nogil:
    cdef int i, j
    cdef Edge t
    for i in range(1, n):
        t = e[i]
        j = i - 1
        while j >= 0 and e[j].a0 > t.a0:
            e[j + 1] = e[j]
            j -= 1
        e[j + 1] = t


cdef void _sort_doubles(double* a, int n) noexcept nogil:
    cdef int i, j
    cdef double t
    for i in range(1, n):
        t = a[i]
        j = i - 1
        while j >= 0 and a[j] > t:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = t


cdef int _pieces(const double[:, ::1] V, double px, double py, double beta,
                 Piece* out) noexcept nogil:
    """Fill ``out`` (capacity 4n + 2 + 2*MAX_GRADE) and return the number of pieces."""
    cdef Py_ssize_t n = V.shape[0], k, j
    cdef double scale = 1.0, tin, hmin = INFINITY
    cdef double ex, ey, L, nx, ny, h, lo, hi, zx, zy, d0, c0x, c0y, mid, xk, yk, xj, yj
    cdef int np_ = 0, nf = 0, nn = 0, nb = 0, i, fi, ni
    for k in range(n):
        if fabs(V[k, 0] - px) > scale:
            scale = fabs(V[k, 0] - px)
        if fabs(V[k, 1] - py) > scale:
            scale = fabs(V[k, 1] - py)
    tin = 1e-12 * scale
    cdef Edge* edges = <Edge*> malloc(n * sizeof(Edge))
    for k in range(n):
        j = k + 1 if k + 1 < n else 0
        ex = V[j, 0] - V[k, 0]
        ey = V[j, 1] - V[k, 1]
        L = hypot(ex, ey)
        edges[k].nx = ey / L
        edges[k].ny = -ex / L
        edges[k].h = edges[k].nx * (V[k, 0] - px) + edges[k].ny * (V[k, 1] - py)
        if edges[k].h < hmin:
            hmin = edges[k].h
    if hmin >= -tin:
        for k in range(n):
            h = edges[k].h
            if h <= tin:
                continue
            j = k + 1 if k + 1 < n else 0
            nx = edges[k].nx
            ny = edges[k].ny
            xk = V[k, 0] - px
            yk = V[k, 1] - py
            xj = V[j, 0] - px
            yj = V[j, 1] - py
            lo = atan2(nx * yk - ny * xk, nx * xk + ny * yk)
            hi = atan2(nx * yj - ny * xj, nx * xj + ny * yj)
            if hi > lo:
                out[np_].lo = lo
                out[np_].hi = hi
                out[np_].c0x = nx
                out[np_].c0y = ny
                out[np_].d0 = 0.0
                out[np_].fnx = nx
                out[np_].fny = ny
                out[np_].fh = h
                out[np_].near = 0
                out[np_].nnx = 0.0
                out[np_].nny = 0.0
                out[np_].nh = 0.0
                np_ += 1
        free(edges)
        return np_
    d0 = _nearest(V, px, py, &zx, &zy)
    c0x = (zx - px) / d0
    c0y = (zy - py) / d0
    cdef double* alpha = <double*> malloc(n * sizeof(double))
    cdef Edge* far = <Edge*> malloc(n * sizeof(Edge))
    cdef Edge* near = <Edge*> malloc(n * sizeof(Edge))
    cdef double* brk = <double*> malloc((4 * n + 1 + 2 * MAX_GRADE) * sizeof(double))
    cdef double g
    for k in range(n):
        xk = V[k, 0] - px
        yk = V[k, 1] - py
        alpha[k] = atan2(c0x * yk - c0y * xk, c0x * xk + c0y * yk)
    for k in range(n):
        j = k + 1 if k + 1 < n else 0
        h = edges[k].h
        if h > tin and alpha[j] > alpha[k]:
            far[nf].a0 = alpha[k]
            far[nf].a1 = alpha[j]
            far[nf].nx = edges[k].nx
            far[nf].ny = edges[k].ny
            far[nf].h = h
            nf += 1
        elif h < -tin and alpha[k] > alpha[j]:
            near[nn].a0 = alpha[j]
            near[nn].a1 = alpha[k]
            near[nn].nx = edges[k].nx
            near[nn].ny = edges[k].ny
            near[nn].h = h
            nn += 1
    if nf and nn:
        _sort_edges(far, nf)
        _sort_edges(near, nn)
        for i in range(nf):
            brk[nb] = far[i].a0
            brk[nb + 1] = far[i].a1
            nb += 2
        for i in range(nn):
            brk[nb] = near[i].a0
            brk[nb + 1] = near[i].a1
            nb += 2
        brk[nb] = 0.0
        nb += 1
        # pack breakpoints toward angle 0, where the weight peaks
        g = 0.25 * beta / d0
        while g < M_PI and nb < 4 * n + 1 + 2 * MAX_GRADE - 1:
            brk[nb] = g
            brk[nb + 1] = -g
            nb += 2
            g *= 4.0
        _sort_doubles(brk, nb)
        lo = far[0].a0 if far[0].a0 > near[0].a0 else near[0].a0
        hi = far[nf - 1].a1 if far[nf - 1].a1 < near[nn - 1].a1 else near[nn - 1].a1
        fi = 0
        ni = 0
        for i in range(nb - 1):
            if brk[i + 1] - brk[i] <= 1e-15 or brk[i] < lo - 1e-15 or brk[i + 1] > hi + 1e-15:
                continue
            mid = 0.5 * (brk[i] + brk[i + 1])
            while fi < nf - 1 and far[fi].a1 < mid:
                fi += 1
            while ni < nn - 1 and near[ni].a1 < mid:
                ni += 1
            out[np_].lo = brk[i]
            out[np_].hi = brk[i + 1]
            out[np_].c0x = c0x
            out[np_].c0y = c0y
            out[np_].d0 = d0
            out[np_].fnx = far[fi].nx
            out[np_].fny = far[fi].ny
            out[np_].fh = far[fi].h
            out[np_].near = 1
            out[np_].nnx = near[ni].nx
            out[np_].nny = near[ni].ny
            out[np_].nh = near[ni].h
            np_ += 1
    free(alpha)
    free(far)
    free(near)
    free(brk)
    free(edges)
    return np_


cdef int _wcentroid(const double[:, ::1] V, double px, double py, double beta, double tol,
                    double* cx, double* cy) noexcept nogil:
    cdef Py_ssize_t n = V.shape[0]
    cdef Piece* pcs = <Piece*> malloc((4 * n + 2 + 2 * MAX_GRADE) * sizeof(Piece))
    cdef int npcs = _pieces(V, px, py, beta, pcs), i, it, budget
    cdef double* first = <double*> malloc((6 * npcs + 6) * sizeof(double))
    cdef double acc[3]
    cdef double span = 0.0, est, ex, ey, rate, zx, zy
    for i in range(npcs):
        span += pcs[i].hi - pcs[i].lo
    acc[0] = 0.0
    acc[1] = 0.0
    acc[2] = 0.0
    for i in range(npcs):
        _kronrod(pcs[i].lo, pcs[i].hi, &pcs[i], beta, &first[6 * i], &first[6 * i + 3])
        acc[0] += first[6 * i]
        acc[1] += first[6 * i + 1]
        acc[2] += first[6 * i + 2]
    for it in range(3):
        if not (acc[0] > 1e-300) or not isfinite(acc[0]):
            break
        est = acc[0]
        ex = acc[1] / acc[0]
        ey = acc[2] / acc[0]
        rate = tol * acc[0] / span
        acc[0] = 0.0
        acc[1] = 0.0
        acc[2] = 0.0
        budget = BUDGET
        for i in range(npcs):
            _adapt(pcs[i].lo, pcs[i].hi, &pcs[i], beta, ex, ey, rate, 0, acc,
                   &first[6 * i] if it == 0 else NULL, &budget)
        if 0.5 * est <= acc[0] <= 2.0 * est:
            break
    free(pcs)
    free(first)
    if not (acc[0] > 1e-300) or not isfinite(acc[0]):
        _area_centroid(V, cx, cy)
        return 1
    cx[0] = px + acc[1] / acc[0]
    cy[0] = py + acc[2] / acc[0]
    if not _contains(V, cx[0], cy[0], 1e-12):
        _nearest(V, cx[0], cy[0], &zx, &zy)
        cx[0] = zx
        cy[0] = zy
    return 0


def weighted_centroid(V, double px, double py, double beta, double tol=1e-7):
    cdef const double[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64).reshape(-1, 2)
    cdef double cx, cy
    cdef int flag
    with nogil:
        flag = _wcentroid(v, px, py, beta, tol, &cx, &cy)
    return cx, cy, flag


cdef double _clearance(const double[:, ::1] V, double px, double py, double beta) noexcept nogil:
    cdef double cx, cy
    _wcentroid(V, px, py, beta, 1e-7, &cx, &cy)
    return _bdist(V, cx, cy)


def clearance(V, double px, double py, double beta):
    cdef const double[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64).reshape(-1, 2)
    return _clearance(v, px, py, beta)


cdef double INVPHI = 0.6180339887498949
cdef double PLATEAU_SLACK = 0.005


cdef inline double _obj(const double[:, ::1] V, double px, double py, double t,
                        double d_u, int mode) noexcept nogil:
    cdef double c = _clearance(V, px, py, exp(t))
    if mode == 0:
        return (c - d_u) * (c - d_u)
    return -c


cdef double _golden(const double[:, ::1] V, double px, double py, double d_u, int mode,
                    double a, double b, double tol, double* fbest) noexcept nogil:
    cdef double c = b - INVPHI * (b - a), d = a + INVPHI * (b - a)
    cdef double fc = _obj(V, px, py, c, d_u, mode), fd = _obj(V, px, py, d, d_u, mode)
    cdef double bt, bf
    if fc <= fd:
        bf = fc
        bt = c
    else:
        bf = fd
        bt = d
    while b - a > tol:
        if fc <= fd:
            b = d
            d = c
            fd = fc
            c = b - INVPHI * (b - a)
            fc = _obj(V, px, py, c, d_u, mode)
            if fc < bf:
                bf = fc
                bt = c
        else:
            a = c
            c = d
            fc = fd
            d = a + INVPHI * (b - a)
            fd = _obj(V, px, py, d, d_u, mode)
            if fd < bf:
                bf = fd
                bt = d
    fbest[0] = bf
    return bt


cdef double _first_crossing(const double[:, ::1] V, double px, double py, double target,
                            const double* ts, const double* cs, int n, double lo,
                            double log_tol) noexcept nogil:
    cdef int i = 0
    cdef double t, f
    while i < n - 1 and cs[i] < target:
        i += 1
    if i == 0:
        return lo
    t = _golden(V, px, py, target, 0, ts[i - 1], ts[i], log_tol, &f)
    if (cs[i] - target) * (cs[i] - target) < f:
        t = ts[i]
    return exp(t)


def beta_min(V, double px, double py, double d_u, double lo=1e-3, double hi=1e3,
             int n_scan=32, double log_tol=1e-3, double slack=PLATEAU_SLACK):
    cdef const double[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64).reshape(-1, 2)
    cdef double tl = log(lo), th = log(hi)
    cdef double step = (th - tl) / (n_scan - 1)
    # one spare slot for the refined peak
    cdef double* ts = <double*> malloc((n_scan + 1) * sizeof(double))
    cdef double* cs = <double*> malloc((n_scan + 1) * sizeof(double))
    cdef int i, m = 0, best
    cdef double t, f, b, c, top, tp
    cdef bint feasible = False
    try:
        with nogil:
            for i in range(n_scan):
                ts[i] = tl + i * step
                cs[i] = _clearance(v, px, py, exp(ts[i]))
                m = i + 1
                if cs[i] >= d_u:
                    break
            if cs[m - 1] >= d_u:
                feasible = True
                b = _first_crossing(v, px, py, d_u, ts, cs, m, lo, log_tol)
            else:
                best = 0
                for i in range(n_scan):
                    if cs[i] > cs[best]:
                        best = i
                tp = _golden(v, px, py, d_u, 1,
                             ts[best - 1 if best > 0 else 0],
                             ts[best + 1 if best < n_scan - 1 else n_scan - 1], log_tol, &f)
                if -f > cs[best]:
                    # the peak lies between samples: splice it in after the last
                    # sample to its left so a crossing always exists
                    top = -f
                    m = 0
                    while m < n_scan and ts[m] < tp:
                        m += 1
                    ts[m] = tp
                    cs[m] = top
                    m += 1
                else:
                    top = cs[best]
                    m = n_scan
                b = _first_crossing(v, px, py, top - slack, ts, cs, m, lo, log_tol)
            c = _clearance(v, px, py, b)
        return b, c, bool(feasible)
    finally:
        free(ts)
        free(cs)
