import numpy as np
import pytest
from scipy.spatial import ConvexHull

from lloydflock import _backend
from lloydflock.geometry import ConvexRegion

BACKENDS = [_backend._pykernels]
try:
    from lloydflock import _ckernels
    BACKENDS.append(_ckernels)
except ImportError:  # extension not built
    pass


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def kern(request):
    return request.param


def random_polygon(rng, scale=None, center=None, npts=None):
    """Convex hull of random points: an oracle-independent convex polygon."""
    scale = rng.uniform(0.5, 4.0) if scale is None else scale
    center = rng.uniform(-3, 3, 2) if center is None else np.asarray(center, float)
    npts = int(rng.integers(4, 14)) if npts is None else npts
    while True:
        pts = center + scale * rng.uniform(-1, 1, (npts, 2)) * rng.uniform(0.3, 1.0, 2)
        try:
            hull = ConvexHull(pts)
        except Exception:
            continue
        if hull.volume > 1e-3:
            return ConvexRegion(pts[hull.vertices])


def grid_mask(region, xs, ys):
    """Membership of the grid points in the polygon via its edge half-planes."""
    X, Y = np.meshgrid(xs, ys)
    inside = np.ones(X.shape, bool)
    for hp in region.halfplanes():
        inside &= hp.normal[0] * X + hp.normal[1] * Y <= hp.offset
    return X, Y, inside


def grid_weighted_centroid(region, pbar, beta, n=2000):
    """Midpoint-rule centroid of exp(-|q - pbar|/beta) on an n x n grid."""
    v = region.vertices
    lo, hi = v.min(axis=0), v.max(axis=0)
    xs = lo[0] + (np.arange(n) + 0.5) * (hi[0] - lo[0]) / n
    ys = lo[1] + (np.arange(n) + 0.5) * (hi[1] - lo[1]) / n
    X, Y, inside = grid_mask(region, xs, ys)
    # subtract the minimum distance so the exponent never underflows
    d = np.hypot(X - pbar[0], Y - pbar[1])
    w = np.where(inside, np.exp(-(d - d[inside].min()) / beta), 0.0)
    return np.array([(w * X).sum() / w.sum(), (w * Y).sum() / w.sum()])
