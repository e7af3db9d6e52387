"""Per-robot cells: weighted Voronoi half-planes, safety reshaping, proximity discs.

Every robot builds its cells from its own snapshot of sensed neighbours and
obstacles. ``build_cell_A`` yields the safe cell (CWVD half-planes reshaped for
body radii, cut to the sensing disc); ``build_cell_F`` further intersects it
with one disc of radius Gamma per proximity-constrained neighbour.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Hashable, Sequence


from .geometry import (GEO_TOL, ConvexRegion, GeometryError, HalfPlane, as_point, clip_all,
                       clip_to_disc, contains, disc_polygon)

ROBOT = "robot"
OBSTACLE = "obstacle"


class CollisionStateError(RuntimeError):
    """A sensed entity is already within the combined body radius."""

    def __init__(self, entity: "SensedEntity", distance: float, delta: float):
        super().__init__(f"{entity.kind} {entity.ident!r} at distance {distance:.4f} <= {delta:.4f}")
        self.entity = entity
        self.distance = distance
        self.delta = delta


class InfeasibleProximityError(RuntimeError):
    """The proximity discs leave no room for the robot (empty F cell)."""


@dataclass(frozen=True)
class CellParams:
    epsilon_p: float = 1.0
    epsilon_o: float = 1.0
    sensing_radius_rs: float = 5.0
    delta_self: float = 0.2
    # disc approximations coarser than this break the conservativeness margins
    disc_sides: int = 64

    def __post_init__(self):
        for name in ("epsilon_p", "epsilon_o"):
            e = getattr(self, name)
            if not 1.0 <= e <= 2.0:
                raise ValueError(f"{name} must lie in [1, 2], got {e}")
        if not self.sensing_radius_rs > 0:
            raise ValueError("sensing_radius_rs must be positive")
        if not self.delta_self > 0:
            raise ValueError("delta_self must be positive")
        if int(self.disc_sides) != self.disc_sides or self.disc_sides < 8:
            raise ValueError(f"disc_sides must be an integer >= 8, got {self.disc_sides}")

    @property
    def sensing_range(self) -> float:
        """Full sensing radius R_s (the cell itself is limited to R_s / 2)."""
        return 2.0 * self.sensing_radius_rs


@dataclass(frozen=True)
class SensedEntity:
    position: Any
    radius: float
    kind: str = ROBOT
    proximity_constrained: bool = False
    gamma: float | None = None
    ident: Hashable = None

    def __post_init__(self):
        object.__setattr__(self, "position", as_point(self.position))
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        if self.kind not in (ROBOT, OBSTACLE):
            raise ValueError(f"unknown entity kind {self.kind!r}")
        if self.proximity_constrained and (self.gamma is None or not self.gamma > 0):
            raise ValueError("proximity-constrained entity needs a positive gamma")


def cwvd_halfplane(p_i, p_j, epsilon: float) -> HalfPlane:
    """``{q : u.(q - p_i) <= |p_j - p_i| / epsilon}`` with ``u`` pointing at ``p_j``.

    epsilon = 2 is the ordinary Voronoi bisector; epsilon = 1 puts the boundary
    through ``p_j`` itself.
    """
    a, b = as_point(p_i), as_point(p_j)
    dx, dy = float(b[0] - a[0]), float(b[1] - a[1])
    dist = math.hypot(dx, dy)
    if dist <= GEO_TOL:
        raise GeometryError("coincident points have no separating direction")
    ux, uy = dx / dist, dy / dist
    return HalfPlane((ux, uy), ux * float(a[0]) + uy * float(a[1]) + dist / epsilon)


def safety_halfplane(p_i, other: SensedEntity, delta_self: float, epsilon: float) -> HalfPlane:
    """Weighted Voronoi half-plane, or the bisector to a shifted virtual point when close.

    Within twice the combined radius the neighbour is replaced by
    ``p_j + (2*Delta - d) * (p_i - p_j)/d`` and the plain bisector to that point
    is used, which keeps the cell at least Delta away from ``p_j``.
    """
    a = as_point(p_i)
    b = other.position
    delta = delta_self + other.radius
    diff = a - b
    dist = math.hypot(diff[0], diff[1])
    if dist <= delta:
        raise CollisionStateError(other, dist, delta)
    if dist / 2.0 > delta:
        return cwvd_halfplane(a, b, epsilon)
    virtual = b + 2.0 * (delta - dist / 2.0) * diff / dist
    return cwvd_halfplane(a, virtual, 2.0)


def sensing_disc(p_i, params: CellParams) -> ConvexRegion:
    return disc_polygon(p_i, params.sensing_radius_rs, params.disc_sides)


def build_cell_A(p_i, sensed: Sequence[SensedEntity], params: CellParams) -> ConvexRegion:
    p = as_point(p_i)
    hps = []
    for e in sensed:
        eps = params.epsilon_p if e.kind == ROBOT else params.epsilon_o
        hps.append(safety_halfplane(p, e, params.delta_self, eps))
    cell = clip_all(sensing_disc(p, params), hps)
    # p_i satisfies every constraint strictly, so this can only fail on a bug
    assert contains(cell, p, 1e-7), "safe cell lost its own robot"
    return cell


def proximity_disc(p_i, p_j, gamma: float, sides: int) -> ConvexRegion:
    """Inscribed Gamma-disc around ``p_j`` with a vertex aimed at ``p_i``.

    Aiming a vertex at the robot keeps ``p_i`` inside the polygon whenever it is
    inside the true disc.
    """
    a, b = as_point(p_i), as_point(p_j)
    d = a - b
    phase = math.atan2(d[1], d[0]) if math.hypot(d[0], d[1]) > GEO_TOL else 0.0
    return disc_polygon(b, gamma, sides, phase)


def build_cell_F(cell_A: ConvexRegion, p_i, sensed: Sequence[SensedEntity],
                 params: CellParams) -> ConvexRegion:
    p = as_point(p_i)
    cell = cell_A
    for e in sensed:
        if not e.proximity_constrained:
            continue
        d = p - e.position
        phase = math.atan2(d[1], d[0]) if math.hypot(d[0], d[1]) > GEO_TOL else 0.0
        cell = clip_to_disc(cell, e.position, e.gamma, params.disc_sides, phase)
        if cell.is_empty:
            raise InfeasibleProximityError(
                f"proximity disc of {e.ident!r} (gamma={e.gamma}) leaves an empty cell")
    return cell
