"""Convex-region kernel: half-plane clipping, disc polygons, containment, clearance.

Points are plain ``numpy`` arrays of shape ``(2,)``; anything array-like with two
finite coordinates is accepted on input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._backend import kernels as _k

GEO_TOL = 1e-9
AREA_EPS = 1e-12


class GeometryError(ValueError):
    pass


def as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(2)
    if not (math.isfinite(a[0]) and math.isfinite(a[1])):
        raise GeometryError(f"non-finite point {p!r}")
    return a


@dataclass(frozen=True)
class HalfPlane:
    """The closed set ``{q : normal . q <= offset}``."""

    normal: tuple[float, float]
    offset: float

    def __post_init__(self):
        nx, ny = (float(v) for v in self.normal)
        if abs(math.hypot(nx, ny) - 1.0) > 1e-9:
            raise GeometryError(f"half-plane normal must be unit length, got {self.normal}")
        object.__setattr__(self, "normal", (nx, ny))
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def through(cls, direction, point) -> "HalfPlane":
        """Half-plane bounded by the line through ``point`` facing ``direction``."""
        d = as_point(direction)
        n = np.linalg.norm(d)
        if n <= GEO_TOL:
            raise GeometryError("zero direction")
        u = d / n
        return cls((u[0], u[1]), float(u @ as_point(point)))

    def signed_distance(self, p) -> float:
        q = as_point(p)
        return self.normal[0] * q[0] + self.normal[1] * q[1] - self.offset

    def contains(self, p, tol: float = GEO_TOL) -> bool:
        return self.signed_distance(p) <= tol


class ConvexRegion:
    """Convex polygon with CCW vertices. An empty vertex list is the empty set."""

    __slots__ = ("_v",)

    def __init__(self, vertices: Iterable = (), *, check: bool = True):
        v = np.array(list(vertices) if not isinstance(vertices, np.ndarray) else vertices,
                     dtype=float)
        v = v.reshape(-1, 2) if v.size else np.empty((0, 2))
        if check:
            v = _normalize(v)
        v.setflags(write=False)
        self._v = v

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "ConvexRegion":
        r = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=float).reshape(-1, 2)
        arr.setflags(write=False)
        r._v = arr
        return r

    @classmethod
    def box(cls, xmin, ymin, xmax, ymax) -> "ConvexRegion":
        return cls([(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)])

    @property
    def vertices(self) -> np.ndarray:
        return self._v

    @property
    def is_empty(self) -> bool:
        return len(self._v) == 0

    def __len__(self):
        return len(self._v)

    def __repr__(self):
        if self.is_empty:
            return "ConvexRegion(<empty>)"
        return f"ConvexRegion({len(self._v)} vertices, area={self.area:.6g})"

    @property
    def area(self) -> float:
        return 0.0 if self.is_empty else float(_k.polygon_area(self._v))

    def area_centroid(self) -> np.ndarray:
        if self.is_empty:
            raise GeometryError("centroid of empty region")
        return np.array(_k.area_centroid(self._v))

    def halfplanes(self) -> list[HalfPlane]:
        """Edge constraints; their intersection is this region."""
        out = []
        v = self._v
        for k in range(len(v)):
            a, b = v[k], v[(k + 1) % len(v)]
            e = b - a
            n = np.array([e[1], -e[0]]) / math.hypot(e[0], e[1])
            out.append(HalfPlane((n[0], n[1]), float(n @ a)))
        return out

    def clip(self, hp: HalfPlane) -> "ConvexRegion":
        return halfplane_clip(self, hp)

    def intersect(self, other: "ConvexRegion") -> "ConvexRegion":
        if self.is_empty or other.is_empty:
            return ConvexRegion()
        v = other._v
        e = np.roll(v, -1, axis=0) - v
        n = np.column_stack([e[:, 1], -e[:, 0]]) / np.hypot(e[:, 0], e[:, 1])[:, None]
        off = np.einsum("ij,ij->i", n, v)
        return ConvexRegion._trusted(_k.clip_many(self._v, np.ascontiguousarray(n), off))

    def contains(self, p, tol: float = GEO_TOL) -> bool:
        return contains(self, p, tol)

    def same_as(self, other: "ConvexRegion", tol: float = GEO_TOL) -> bool:
        """Vertex-set equality up to cyclic rotation and ``tol``."""
        a, b = self._v, other._v
        if len(a) != len(b):
            return False
        if len(a) == 0:
            return True
        d = np.hypot(*(b - a[0]).T)
        for s in np.flatnonzero(d <= tol):
            if np.all(np.abs(np.roll(b, -s, axis=0) - a) <= tol):
                return True
        return False


def _normalize(v: np.ndarray) -> np.ndarray:
    if len(v) == 0:
        return v
    if not np.all(np.isfinite(v)):
        raise GeometryError("non-finite vertex")
    keep = [v[0]]
    for p in v[1:]:
        if np.max(np.abs(p - keep[-1])) > GEO_TOL:
            keep.append(p)
    while len(keep) > 1 and np.max(np.abs(keep[0] - keep[-1])) <= GEO_TOL:
        keep.pop()
    v = np.array(keep)
    if len(v) < 3:
        return np.empty((0, 2))
    a = _k.polygon_area(v)
    if a < 0:
        v = v[::-1].copy()
        a = -a
    if a < AREA_EPS:
        return np.empty((0, 2))
    e = np.roll(v, -1, axis=0) - v
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    if np.any(cross < -1e-9):
        raise GeometryError("vertices do not form a convex polygon")
    return np.ascontiguousarray(v)


def halfplane_clip(region: ConvexRegion, hp: HalfPlane) -> ConvexRegion:
    if region.is_empty:
        return region
    return ConvexRegion._trusted(_k.clip_halfplane(region.vertices, hp.normal[0], hp.normal[1],
                                                   hp.offset))


def clip_all(region: ConvexRegion, hps: Sequence[HalfPlane]) -> ConvexRegion:
    if region.is_empty or not hps:
        return region
    normals = np.array([h.normal for h in hps], dtype=float)
    offsets = np.array([h.offset for h in hps], dtype=float)
    return ConvexRegion._trusted(_k.clip_many(region.vertices, normals, offsets))


def disc_polygon(center, radius: float, sides: int = 64, phase: float = 0.0) -> ConvexRegion:
    """Regular ``sides``-gon inscribed in the disc; one vertex at angle ``phase``.

    Inscribed means every vertex is on the circle, so the polygon is a subset of
    the disc.
    """
    if not radius > 0:
        raise GeometryError(f"radius must be positive, got {radius}")
    if int(sides) != sides or sides < 3:
        raise GeometryError(f"need an integer number of sides >= 3, got {sides}")
    c = as_point(center)
    th = phase + 2.0 * np.pi * np.arange(int(sides)) / int(sides)
    v = np.column_stack([c[0] + radius * np.cos(th), c[1] + radius * np.sin(th)])
    return ConvexRegion._trusted(v)


def clip_to_disc(region: ConvexRegion, center, radius: float, sides: int = 64,
                 phase: float = 0.0) -> ConvexRegion:
    """``region.intersect(disc_polygon(center, radius, sides, phase))`` without
    building the polygon: the edge normals of a regular polygon are known."""
    if region.is_empty:
        return region
    c = as_point(center)
    th = phase + (np.arange(int(sides)) + 0.5) * (2.0 * np.pi / int(sides))
    normals = np.column_stack([np.cos(th), np.sin(th)])
    offsets = normals @ c + radius * math.cos(math.pi / int(sides))
    return ConvexRegion._trusted(_k.clip_many(region.vertices, normals, offsets))


def contains(region: ConvexRegion, p, tol: float = GEO_TOL) -> bool:
    if region.is_empty:
        return False
    q = as_point(p)
    return bool(_k.contains(region.vertices, q[0], q[1], tol))


def boundary_distance(region: ConvexRegion, p) -> float:
    """Distance from an interior point to the region boundary."""
    q = as_point(p)
    if not contains(region, q):
        raise GeometryError(f"point {tuple(q)} is outside the region")
    return float(_k.boundary_distance(region.vertices, q[0], q[1]))


def nearest_point(region: ConvexRegion, p) -> np.ndarray:
    if region.is_empty:
        raise GeometryError("nearest point of empty region")
    q = as_point(p)
    zx, zy, _ = _k.nearest_point(region.vertices, q[0], q[1])
    return np.array([zx, zy])
