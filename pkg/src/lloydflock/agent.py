"""One robot's decision step and its tracking model.

``decide`` turns a snapshot of measurements into a velocity command:
gate and re-project, build the safe cell A and the flocking cell F, adapt the
attractor and the spreading factor, then steer toward the weighted centroid of F.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Hashable, NamedTuple, Sequence

import numpy as np

from .cells import (OBSTACLE, ROBOT, CellParams, SensedEntity, build_cell_A, build_cell_F,
                    sensing_disc)
from .geometry import ConvexRegion, as_point, boundary_distance, contains
from .weighting import (AdaptationParams, AdaptiveState, beta_min,
                        update_beta, update_pbar, weighted_centroid)

REPROJECT_ETA = 1e-3


@dataclass(frozen=True)
class AgentConfig:
    delta: float = 0.2
    goal: Any = (0.0, 0.0)
    k_p: float = 1.0
    v_max: float = 1.5
    control_period: float = 0.1
    d_u_track: float = 0.0
    k_sigma: float = 3.0
    lambda_gate: float = 15.0
    cell_params: CellParams = field(default_factory=CellParams)
    adapt_params: AdaptationParams = field(default_factory=AdaptationParams)
    # total margin override; None derives it from the measurements every step
    d_u_fixed: float | None = None
    # slew limit in m/s^2; None tracks commands exactly
    a_max: float | None = 2.0

    def __post_init__(self):
        object.__setattr__(self, "goal", as_point(self.goal))
        for name in ("delta", "k_p", "v_max", "control_period", "k_sigma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.d_u_track < 0:
            raise ValueError("d_u_track must be non-negative")
        if self.d_u_fixed is not None and self.d_u_fixed < 0:
            raise ValueError("d_u_fixed must be non-negative")
        if self.a_max is not None and not self.a_max > 0:
            raise ValueError("a_max must be positive or None")
        if self.cell_params.delta_self != self.delta:
            object.__setattr__(self, "cell_params",
                               replace(self.cell_params, delta_self=self.delta))


@dataclass(frozen=True)
class Measurement:
    target_id: Hashable
    position: Any
    lambda_max: float = 0.0
    kind: str = ROBOT
    radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", as_point(self.position))
        if self.lambda_max < 0:
            raise ValueError("lambda_max must be non-negative")
        if self.kind not in (ROBOT, OBSTACLE):
            raise ValueError(f"unknown kind {self.kind!r}")


def margin_d_u(lambda_max, k_sigma, delta_i, delta_j, d_u_track, proximity_only=False) -> float:
    """Centroid-to-boundary margin for one measurement: ellipse radius, bodies, tracking."""
    m = k_sigma * math.sqrt(lambda_max)
    if not proximity_only:
        m += delta_i + delta_j
    return m + d_u_track


def step_margin(measurements: Sequence[Measurement], cfg: AgentConfig) -> float:
    if cfg.d_u_fixed is not None:
        return cfg.d_u_fixed
    worst = 0.0
    for m in measurements:
        worst = max(worst, margin_d_u(m.lambda_max, cfg.k_sigma, cfg.delta, m.radius, 0.0))
    return worst + cfg.d_u_track


def gate_and_reproject(measurements: Sequence[Measurement], p_i, proximity_map: dict,
                       lambda_gate: float, eta: float = REPROJECT_ETA) -> list[Measurement]:
    p = as_point(p_i)
    out = []
    for m in measurements:
        if m.lambda_max > lambda_gate:
            continue
        gamma = proximity_map.get(m.target_id) if m.kind == ROBOT else None
        if gamma is not None:
            d = m.position - p
            dist = math.hypot(d[0], d[1])
            if dist > gamma:
                m = replace(m, position=p + (gamma - eta) * d / dist)
        out.append(m)
    return out


class Decision(NamedTuple):
    velocity_cmd: np.ndarray
    state: AdaptiveState
    cell_F: ConvexRegion
    diagnostics: dict


def _to_entities(measurements, proximity_map):
    ents = []
    for m in measurements:
        gamma = proximity_map.get(m.target_id) if m.kind == ROBOT else None
        ents.append(SensedEntity(m.position, m.radius, m.kind, gamma is not None, gamma,
                                 m.target_id))
    return ents


def decide(p_i, state: AdaptiveState, measurements: Sequence[Measurement], cfg: AgentConfig,
           proximity: dict | None = None) -> Decision:
    """Full control step. ``proximity`` maps neighbour ids to their maximum distance."""
    p = as_point(p_i)
    prox = proximity or {}
    dt = cfg.control_period
    ap = cfg.adapt_params
    kept = gate_and_reproject(measurements, p, prox, cfg.lambda_gate)
    ents = _to_entities(kept, prox)
    cell_A = build_cell_A(p, ents, cfg.cell_params)
    cell_F = build_cell_F(cell_A, p, ents, cfg.cell_params)

    c_A = weighted_centroid(cell_A, state.pbar, state.beta)
    c_S = weighted_centroid(sensing_disc(p, cfg.cell_params), state.pbar, state.beta)
    c_A_goal = (weighted_centroid(cell_A, cfg.goal, state.beta)
                if state.rotation_active else None)
    pbar, rotating = update_pbar(state, cell_A, c_A, c_S, c_A_goal, p, cfg.goal, ap, dt)

    # the floor is evaluated at the new attractor, which is where c_F is taken
    d_u = step_margin(kept, cfg)
    floor = beta_min(cell_F, pbar, d_u, full_output=True)
    beta = update_beta(state, cell_A, c_S, p, ap, floor.beta, dt, c_A=c_A)
    c_F, underflow = weighted_centroid(cell_F, pbar, beta, full_output=True)
    clear = boundary_distance(cell_F, c_F)
    if floor.feasible and clear < d_u - 0.01 and beta != floor.beta:
        beta = floor.beta
        c_F, underflow = weighted_centroid(cell_F, pbar, beta, full_output=True)
        clear = boundary_distance(cell_F, c_F)

    assert contains(cell_F, p, 1e-7) and contains(cell_F, c_F, 1e-6), "segment left cell F"
    cmd = cfg.k_p * (c_F - p)
    speed = math.hypot(cmd[0], cmd[1])
    if speed > cfg.v_max:
        cmd *= cfg.v_max / speed
    new_state = AdaptiveState(beta, pbar, rotating)
    diag = {
        "c_A": c_A, "c_S": c_S, "c_A_goal": c_A_goal, "c_F": c_F,
        "clearance": clear, "d_u": d_u, "beta_floor": floor.beta,
        "margin_feasible": floor.feasible, "rotating": rotating,
        "underflow": underflow, "dropped": len(measurements) - len(kept),
    }
    return Decision(cmd, new_state, cell_F, diag)


@dataclass(frozen=True)
class KinematicState:
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        object.__setattr__(self, "position", as_point(self.position))
        object.__setattr__(self, "velocity", as_point(self.velocity))


class DisturbanceBoundError(ValueError):
    pass


def track(state: KinematicState, cmd, dt: float, disturbance=None, d_u_track: float | None = None,
          a_max: float | None = None) -> KinematicState:
    """Slew-limited velocity tracking plus an additive velocity disturbance.

    The disturbance must satisfy ``|disturbance| * dt <= d_u_track``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    c = as_point(cmd)
    v = state.velocity
    if a_max is not None:
        dv = c - v
        n = math.hypot(dv[0], dv[1])
        lim = a_max * dt
        v = v + (dv * (lim / n) if n > lim else dv)
    else:
        v = c
    p = state.position + v * dt
    if disturbance is not None:
        w = as_point(disturbance)
        if d_u_track is not None and math.hypot(w[0], w[1]) * dt > d_u_track + 1e-12:
            raise DisturbanceBoundError(
                f"disturbance displacement {math.hypot(w[0], w[1]) * dt:.4g} exceeds {d_u_track}")
        p = p + w * dt
    return KinematicState(p, v)
