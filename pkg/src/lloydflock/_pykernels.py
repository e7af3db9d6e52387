"""Pure-Python implementations of the numerical hot paths.

Mirrors ``_ckernels.pyx`` operation for operation so the two backends agree to
rounding error. All polygons are ``(n, 2)`` float arrays in CCW order.
"""
from __future__ import annotations

import math

import numpy as np

GEO_TOL = 1e-9
AREA_EPS = 1e-12

# Gauss(3)-Kronrod(7) pair on [-1, 1]
_XK = (0.9604912687080202834235071, 0.7745966692414833770358531,
       0.4342437493468025580020715, 0.0)
_WK = (0.1046562260264672651938239, 0.2684880898683334407285722,
       0.4013974147759622229050518, 0.4509165386584741423451497)
_WG = (0.0, 5.0 / 9.0, 0.0, 8.0 / 9.0)

_MAX_DEPTH = 48
_MAX_GRADE = 24
# Kronrod evaluations per refinement pass; a guard, not normally reached
_BUDGET = 20000


def polygon_area(V):
    n = len(V)
    if n < 3:
        return 0.0
    s = 0.0
    for k in range(n):
        x0, y0 = V[k]
        x1, y1 = V[(k + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def clip_halfplane(V, nx, ny, off, tol=GEO_TOL):
    """Sutherland-Hodgman clip of one convex polygon by ``n.q <= off``."""
    n = len(V)
    if n == 0:
        return np.empty((0, 2))
    s = [nx * V[k][0] + ny * V[k][1] - off for k in range(n)]
    if max(s) <= tol:
        return np.array(V, dtype=float)
    if min(s) > tol:
        return np.empty((0, 2))
    out = []
    for k in range(n):
        j = (k + 1) % n
        sk, sj = s[k], s[j]
        if sk <= tol:
            out.append((V[k][0], V[k][1]))
        if (sk <= tol) != (sj <= tol):
            t = sk / (sk - sj)
            out.append((V[k][0] + t * (V[j][0] - V[k][0]),
                        V[k][1] + t * (V[j][1] - V[k][1])))
    return _clean(out)


def _clean(pts):
    m = []
    for p in pts:
        if m and abs(p[0] - m[-1][0]) <= GEO_TOL and abs(p[1] - m[-1][1]) <= GEO_TOL:
            continue
        m.append(p)
    while len(m) > 1 and abs(m[0][0] - m[-1][0]) <= GEO_TOL and abs(m[0][1] - m[-1][1]) <= GEO_TOL:
        m.pop()
    if len(m) < 3:
        return np.empty((0, 2))
    out = np.array(m, dtype=float)
    if polygon_area(out) < AREA_EPS:
        return np.empty((0, 2))
    return out


def clip_many(V, normals, offsets, tol=GEO_TOL):
    out = np.asarray(V, dtype=float)
    for (nx, ny), off in zip(normals, offsets):
        if len(out) == 0:
            break
        out = clip_halfplane(out, nx, ny, off, tol)
    return out


def contains(V, x, y, tol=GEO_TOL):
    n = len(V)
    if n < 3:
        return False
    for k in range(n):
        ax, ay = V[k]
        bx, by = V[(k + 1) % n]
        ex, ey = bx - ax, by - ay
        L = math.hypot(ex, ey)
        # signed distance to the left of edge a->b (inside for CCW)
        if (ex * (y - ay) - ey * (x - ax)) / L < -tol:
            return False
    return True


def _seg_dist2(ax, ay, bx, by, x, y):
    ex, ey = bx - ax, by - ay
    L2 = ex * ex + ey * ey
    t = 0.0 if L2 == 0.0 else ((x - ax) * ex + (y - ay) * ey) / L2
    t = min(1.0, max(0.0, t))
    qx, qy = ax + t * ex, ay + t * ey
    return (x - qx) ** 2 + (y - qy) ** 2, qx, qy


def boundary_distance(V, x, y):
    n = len(V)
    best = math.inf
    for k in range(n):
        d2, _, _ = _seg_dist2(V[k][0], V[k][1], V[(k + 1) % n][0], V[(k + 1) % n][1], x, y)
        best = min(best, d2)
    return math.sqrt(best)


def nearest_point(V, x, y):
    """Closest point of the closed polygon to (x, y); returns (qx, qy, dist)."""
    if contains(V, x, y, 0.0):
        return x, y, 0.0
    n = len(V)
    best = (math.inf, x, y)
    for k in range(n):
        d2, qx, qy = _seg_dist2(V[k][0], V[k][1], V[(k + 1) % n][0], V[(k + 1) % n][1], x, y)
        if d2 < best[0]:
            best = (d2, qx, qy)
    return best[1], best[2], math.sqrt(best[0])


def area_centroid(V):
    n = len(V)
    a = cx = cy = 0.0
    x0, y0 = V[0]
    for k in range(n):
        ax, ay = V[k][0] - x0, V[k][1] - y0
        bx, by = V[(k + 1) % n][0] - x0, V[(k + 1) % n][1] - y0
        c = ax * by - bx * ay
        a += c
        cx += (ax + bx) * c
        cy += (ay + by) * c
    return x0 + cx / (3.0 * a), y0 + cy / (3.0 * a)


# lower incomplete gamma integrals  g_n(D) = int_0^D r^n e^-r dr,  n = 0, 1, 2
def _gammas(D):
    g0 = -math.expm1(-D)
    if D < 0.1:
        s1 = s2 = 0.0
        term = 1.0
        m = 0
        while True:
            s1 += term / (m + 2)
            s2 += term / (m + 3)
            m += 1
            term *= -D / m
            if abs(term) < 1e-17:
                break
        return g0, s1 * D * D, s2 * D * D * D
    e = math.exp(-D)
    return g0, g0 - D * e, 2.0 * g0 - D * e * (2.0 + D)


def _density(a, c0x, c0y, fnx, fny, fh, near, nnx, nny, nh, d0, beta):
    ca, sa = math.cos(a), math.sin(a)
    ux = c0x * ca - c0y * sa
    uy = c0x * sa + c0y * ca
    rout = fh / (fnx * ux + fny * uy)
    rin = nh / (nnx * ux + nny * uy) if near else 0.0
    D = (rout - rin) / beta
    if D < 0.0:
        D = 0.0
    g0, g1, g2 = _gammas(D)
    e = beta * math.exp(-(rin - d0) / beta)
    m = e * (rin * g0 + beta * g1)
    s = e * (rin * rin * g0 + 2.0 * rin * beta * g1 + beta * beta * g2)
    return m, s * ux, s * uy


def _kronrod(lo, hi, args):
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    k0 = k1 = k2 = 0.0
    g0 = g1 = g2 = 0.0
    for i in range(4):
        xs = (c,) if _XK[i] == 0.0 else (c - h * _XK[i], c + h * _XK[i])
        for x in xs:
            f = _density(x, *args)
            k0 += _WK[i] * f[0]
            k1 += _WK[i] * f[1]
            k2 += _WK[i] * f[2]
            if _WG[i]:
                g0 += _WG[i] * f[0]
                g1 += _WG[i] * f[1]
                g2 += _WG[i] * f[2]
    return (k0 * h, k1 * h, k2 * h), (g0 * h, g1 * h, g2 * h)


def _adapt(lo, hi, args, cx, cy, tol_rate, depth, budget, kg=None):
    if kg is None:
        budget[0] -= 1
        kg = _kronrod(lo, hi, args)
    k, g = kg
    dm, dx, dy = k[0] - g[0], k[1] - g[1], k[2] - g[2]
    err = abs(dx - cx * dm) + abs(dy - cy * dm)
    if err <= tol_rate * (hi - lo) or depth >= _MAX_DEPTH or budget[0] <= 0:
        return k
    mid = 0.5 * (lo + hi)
    a = _adapt(lo, mid, args, cx, cy, tol_rate, depth + 1, budget)
    b = _adapt(mid, hi, args, cx, cy, tol_rate, depth + 1, budget)
    return a[0] + b[0], a[1] + b[1], a[2] + b[2]


def _grading(beta, d0):
    """Breakpoints packed geometrically toward angle 0, where the weight peaks."""
    out = []
    g = 0.25 * beta / d0
    while g < math.pi and len(out) < 2 * _MAX_GRADE:
        out += [g, -g]
        g *= 4.0
    return out


def _intervals(V, px, py, beta):
    """Angular pieces over which the radial extent is a single near/far edge pair.

    Returns (c0x, c0y, d0, pieces) with pieces as tuples
    (lo, hi, fnx, fny, fh, near, nnx, nny, nh) in angles measured from c0.
    """
    n = len(V)
    X = [V[k][0] - px for k in range(n)]
    Y = [V[k][1] - py for k in range(n)]
    edges = []
    scale = max(max(abs(v) for v in X), max(abs(v) for v in Y), 1.0)
    tin = 1e-12 * scale
    hmin = math.inf
    for k in range(n):
        j = (k + 1) % n
        ex, ey = X[j] - X[k], Y[j] - Y[k]
        L = math.hypot(ex, ey)
        nx, ny = ey / L, -ex / L
        h = nx * X[k] + ny * Y[k]
        edges.append((k, j, nx, ny, h))
        hmin = min(hmin, h)
    pieces = []
    if hmin >= -tin:
        # evaluation point inside: one piece per edge, frame = edge normal
        for k, j, nx, ny, h in edges:
            if h <= tin:
                continue
            lo = math.atan2(nx * Y[k] - ny * X[k], nx * X[k] + ny * Y[k])
            hi = math.atan2(nx * Y[j] - ny * X[j], nx * X[j] + ny * Y[j])
            if hi > lo:
                pieces.append((nx, ny, 0.0, [(lo, hi, nx, ny, h, False, 0.0, 0.0, 0.0)]))
        return pieces
    zx, zy, d0 = nearest_point(V, px, py)
    c0x, c0y = (zx - px) / d0, (zy - py) / d0
    alpha = [math.atan2(c0x * Y[k] - c0y * X[k], c0x * X[k] + c0y * Y[k]) for k in range(n)]
    far, near = [], []
    for k, j, nx, ny, h in edges:
        if h > tin and alpha[j] > alpha[k]:
            far.append((alpha[k], alpha[j], nx, ny, h))
        elif h < -tin and alpha[k] > alpha[j]:
            near.append((alpha[j], alpha[k], nx, ny, h))
    if not far or not near:
        return [(c0x, c0y, d0, [])]
    far.sort()
    near.sort()
    brk = sorted(set([e[0] for e in far] + [e[1] for e in far]
                     + [e[0] for e in near] + [e[1] for e in near] + [0.0]
                     + _grading(beta, d0)))
    lo_all = max(far[0][0], near[0][0])
    hi_all = min(far[-1][1], near[-1][1])
    out = []
    fi = ni = 0
    for lo, hi in zip(brk[:-1], brk[1:]):
        if hi - lo <= 1e-15 or lo < lo_all - 1e-15 or hi > hi_all + 1e-15:
            continue
        mid = 0.5 * (lo + hi)
        while fi < len(far) - 1 and far[fi][1] < mid:
            fi += 1
        while ni < len(near) - 1 and near[ni][1] < mid:
            ni += 1
        f, g = far[fi], near[ni]
        out.append((lo, hi, f[2], f[3], f[4], True, g[2], g[3], g[4]))
    return [(c0x, c0y, d0, out)]


def weighted_centroid(V, px, py, beta, tol=1e-7):
    """Centroid of ``exp(-|q-p|/beta)`` over a convex polygon.

    Returns ``(cx, cy, flag)``; flag is 1 when the weighted mass underflowed and
    the plain area centroid was returned instead.
    """
    groups = _intervals(V, px, py, beta)
    jobs = []
    for c0x, c0y, d0, pieces in groups:
        for lo, hi, fnx, fny, fh, near, nnx, nny, nh in pieces:
            jobs.append((lo, hi, (c0x, c0y, fnx, fny, fh, near, nnx, nny, nh, d0, beta)))
    span = sum(hi - lo for lo, hi, _ in jobs)
    first = [_kronrod(lo, hi, args) for lo, hi, args in jobs]
    M = sum(kg[0][0] for kg in first)
    Mx = sum(kg[0][1] for kg in first)
    My = sum(kg[0][2] for kg in first)
    for it in range(3):
        if not (M > 1e-300) or not math.isfinite(M):
            break
        est = M
        cx, cy = Mx / M, My / M
        rate = tol * M / span
        M = Mx = My = 0.0
        budget = [_BUDGET]
        for (lo, hi, args), kg in zip(jobs, first):
            k = _adapt(lo, hi, args, cx, cy, rate, 0, budget, kg if it == 0 else None)
            M += k[0]
            Mx += k[1]
            My += k[2]
        if 0.5 * est <= M <= 2.0 * est:
            break
    if not (M > 1e-300) or not math.isfinite(M):
        ax, ay = area_centroid(V)
        return ax, ay, 1
    cx, cy = px + Mx / M, py + My / M
    if not contains(V, cx, cy, 1e-12):
        cx, cy, _ = nearest_point(V, cx, cy)
    return cx, cy, 0


def clearance(V, px, py, beta):
    cx, cy, _ = weighted_centroid(V, px, py, beta)
    return boundary_distance(V, cx, cy)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
PLATEAU_SLACK = 0.005


def _golden(fn, a, b, tol):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    best = (fc, c) if fc <= fd else (fd, d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
            if fc < best[0]:
                best = (fc, c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
            if fd < best[0]:
                best = (fd, d)
    return best


def _first_crossing(V, px, py, target, ts, cs, lo, log_tol):
    """Refine the first scan interval where clearance reaches ``target``."""
    i = next(k for k, c in enumerate(cs) if c >= target)
    if i == 0:
        return lo
    f, t = _golden(lambda t: (clearance(V, px, py, math.exp(t)) - target) ** 2,
                   ts[i - 1], ts[i], log_tol)
    # the scan point itself may be closer than the interior optimum
    if (cs[i] - target) ** 2 < f:
        t = ts[i]
    return math.exp(t)


def beta_min(V, px, py, d_u, lo=1e-3, hi=1e3, n_scan=32, log_tol=1e-3, slack=PLATEAU_SLACK):
    """Smallest spreading factor whose centroid keeps ``d_u`` clearance.

    When no value reaches ``d_u``, the clearance is maximised instead and the
    smallest value within ``slack`` of that maximum is returned. Returns
    ``(beta, clearance, feasible)``.
    """
    tl, th = math.log(lo), math.log(hi)
    step = (th - tl) / (n_scan - 1)
    ts, cs = [], []
    for i in range(n_scan):
        t = tl + i * step
        c = clearance(V, px, py, math.exp(t))
        ts.append(t)
        cs.append(c)
        if c >= d_u:
            break
    if cs[-1] >= d_u:
        b = _first_crossing(V, px, py, d_u, ts, cs, lo, log_tol)
        return b, clearance(V, px, py, b), True
    i = int(np.argmax(cs))
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, n_scan - 1)]
    f, tp = _golden(lambda t: -clearance(V, px, py, math.exp(t)), a, b, log_tol)
    if -f > cs[i]:
        # the peak lies between samples: splice it in after the last sample to
        # its left so a crossing always exists
        m = sum(1 for t in ts if t < tp)
        ts, cs = ts[:m] + [tp], cs[:m] + [-f]
    best = max(cs)
    # clearance is nearly flat around its maximum; prefer the greediest such beta
    b = _first_crossing(V, px, py, best - slack, ts, cs, lo, log_tol)
    return b, clearance(V, px, py, b), False
