"""Laplacian importance weight, its centroid over a cell, and the adaptive rules.

The weight is ``phi(q) = exp(-|q - pbar| / beta)``. A small ``beta`` makes the
robot greedy (the centroid hugs ``pbar``); a large ``beta`` makes it cautious
(the centroid tends to the area centroid).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._backend import kernels as _k
from .geometry import ConvexRegion, GeometryError, as_point

BETA_RANGE = (1e-3, 1e3)


@dataclass(frozen=True)
class AdaptationParams:
    beta_D: float = 0.15
    k_beta: float = 1.0
    k_e: float = 1.0
    d1: float = 1.0
    d2: float = 1.0
    d3: float = 1.0
    d4: float = 1.0
    eps_rot: float = 0.05
    turn_sign: str = "right"

    def __post_init__(self):
        for name in ("beta_D", "k_beta", "k_e", "d1", "d2", "d3", "d4", "eps_rot"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.turn_sign not in ("left", "right"):
            raise ValueError(f"turn_sign must be 'left' or 'right', got {self.turn_sign!r}")


@dataclass(frozen=True)
class AdaptiveState:
    beta: float
    pbar: np.ndarray
    rotation_active: bool = False

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        p = as_point(self.pbar)
        p.setflags(write=False)
        object.__setattr__(self, "pbar", p)

    @classmethod
    def initial(cls, goal, params: AdaptationParams) -> "AdaptiveState":
        return cls(params.beta_D, goal, False)


def phi(q, pbar, beta: float) -> float:
    if not beta > 0:
        raise ValueError("beta must be positive")
    d = as_point(q) - as_point(pbar)
    return math.exp(-math.hypot(d[0], d[1]) / beta)


def weighted_centroid(region: ConvexRegion, pbar, beta: float, full_output: bool = False):
    """Centroid of ``region`` under ``phi(., pbar, beta)``.

    With ``full_output`` returns ``(point, underflow)`` where ``underflow`` marks
    the fallback to the unweighted area centroid.
    """
    if region.is_empty:
        raise GeometryError("weighted centroid of an empty region")
    if not beta > 0:
        raise ValueError("beta must be positive")
    p = as_point(pbar)
    cx, cy, flag = _k.weighted_centroid(region.vertices, p[0], p[1], float(beta))
    c = np.array([cx, cy])
    return (c, bool(flag)) if full_output else c


def centroid_clearance(region: ConvexRegion, pbar, beta: float) -> float:
    """Distance from the weighted centroid to the region boundary."""
    p = as_point(pbar)
    return float(_k.clearance(region.vertices, p[0], p[1], float(beta)))


class BetaMinResult(NamedTuple):
    beta: float
    clearance: float
    feasible: bool


def beta_min(region_F: ConvexRegion, pbar, d_u: float, search_range=BETA_RANGE,
             full_output: bool = False):
    """Smallest spreading factor whose centroid keeps ``d_u`` from the boundary.

    Scans 32 log-spaced values upward and refines the first crossing by
    golden-section search. When no value reaches ``d_u`` the clearance itself is
    maximised instead and ``feasible`` is False.
    """
    if region_F.is_empty:
        raise GeometryError("beta_min on an empty region")
    if d_u < 0:
        raise ValueError("d_u must be non-negative")
    lo, hi = (float(v) for v in search_range)
    if not 0 < lo < hi:
        raise ValueError(f"bad search range {search_range}")
    p = as_point(pbar)
    res = BetaMinResult(*_k.beta_min(region_F.vertices, p[0], p[1], float(d_u), lo, hi))
    return res if full_output else res.beta


def update_beta(state: AdaptiveState, cell_A: ConvexRegion, cell_S_centroid, p_i,
                params: AdaptationParams, beta_floor: float, dt: float, c_A=None) -> float:
    """One Euler step of the spreading-factor dynamics, clamped to ``beta_floor``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if c_A is None:
        c_A = weighted_centroid(cell_A, state.pbar, state.beta)
    c_A, c_S, p = as_point(c_A), as_point(cell_S_centroid), as_point(p_i)
    stuck = (np.linalg.norm(c_A - p) < params.d1
             and np.linalg.norm(c_A - c_S) > params.d2)
    if stuck:
        rate = -params.k_beta * state.beta
    else:
        rate = -params.k_beta * (state.beta - params.beta_D)
    return max(state.beta + rate * dt, beta_floor)


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotated_goal(p_i, goal, params: AdaptationParams) -> np.ndarray:
    """Goal bearing turned by just under a right angle about the robot."""
    sign = -1.0 if params.turn_sign == "right" else 1.0
    p = as_point(p_i)
    return p + rotation(sign * (math.pi / 2 - params.eps_rot)) @ (as_point(goal) - p)


def update_pbar(state: AdaptiveState, cell_A: ConvexRegion, c_A, c_S, c_A_with_goal, p_i,
                goal_e, params: AdaptationParams, dt: float):
    """One Euler step of the attractor dynamics. Returns ``(pbar', rotation_active')``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    c_A, c_S, p, e = as_point(c_A), as_point(c_S), as_point(p_i), as_point(goal_e)
    if state.rotation_active and c_A_with_goal is not None:
        if np.linalg.norm(p - as_point(c_A_with_goal)) > np.linalg.norm(p - c_A):
            return e.copy(), False
    rotate = (np.linalg.norm(c_A - p) < params.d3
              and np.linalg.norm(c_A - c_S) > params.d4)
    target = rotated_goal(p, e, params) if rotate else e
    pbar = state.pbar - params.k_e * (state.pbar - target) * dt
    return pbar, bool(rotate)


def coverage_cost(region: ConvexRegion, p_i, pbar, beta: float, levels: int = 5) -> float:
    """Diagnostic ``integral |q - p_i|^2 phi(q) dq`` over the region.

    Fan triangles are split ``4**levels`` times and integrated with the
    three-edge-midpoint rule, which is exact for quadratics on each piece.
    """
    if region.is_empty:
        return 0.0
    v = region.vertices
    c = v.mean(axis=0)
    tris = np.stack([np.broadcast_to(c, v.shape), v, np.roll(v, -1, axis=0)], axis=1)
    for _ in range(levels):
        a, b, d = tris[:, 0], tris[:, 1], tris[:, 2]
        ab, bd, da = (a + b) / 2, (b + d) / 2, (d + a) / 2
        tris = np.concatenate([np.stack(t, axis=1) for t in
                               ((a, ab, da), (ab, b, bd), (da, bd, d), (ab, bd, da))])
    a, b, d = tris[:, 0], tris[:, 1], tris[:, 2]
    area = 0.5 * np.abs((b[:, 0] - a[:, 0]) * (d[:, 1] - a[:, 1])
                        - (b[:, 1] - a[:, 1]) * (d[:, 0] - a[:, 0]))
    p, pb = as_point(p_i), as_point(pbar)
    total = np.zeros(len(tris))
    for m in ((a + b) / 2, (b + d) / 2, (d + a) / 2):
        f = np.sum((m - p) ** 2, axis=1) * np.exp(-np.linalg.norm(m - pb, axis=1) / beta)
        total += f / 3.0
    return float(np.sum(total * area))

