"""Deterministic multi-robot world: asynchronous control, noisy sensing, invariant checks.

Time advances in integer ticks of ``base_tick`` seconds. Each robot fires its
controller every ``control_period`` with a random phase offset; between firings
it tracks the last command. All randomness comes from one generator seeded by
the scenario seed and is consumed in a fixed order, so a (scenario, seed) pair
always yields the same trace.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .agent import AgentConfig, Measurement, decide
from .cells import OBSTACLE, ROBOT, CellParams, CollisionStateError, InfeasibleProximityError
from .geometry import as_point
from .weighting import AdaptationParams, AdaptiveState

log = logging.getLogger(__name__)

SAFETY = "collision"
OBSTACLE_HIT = "obstacle"
PROXIMITY = "proximity"


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Obstacle:
    center: Any
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.radius > 0:
            raise ScenarioError("obstacle radius must be positive")


@dataclass(frozen=True)
class NoiseModel:
    """Bounded radial measurement error.

    ``lambda_mode`` "saturated" reports ``(bound / k_sigma)**2`` so the margin
    formula is tight at the worst case; "random" reports a value drawn
    uniformly in ``[0, bound]`` and squared the same way.
    """

    bound: float = 0.0
    lambda_mode: str = "saturated"
    obstacle_bound: float = 0.0

    def __post_init__(self):
        if self.bound < 0 or self.obstacle_bound < 0:
            raise ScenarioError("noise bounds must be non-negative")
        if self.lambda_mode not in ("saturated", "random"):
            raise ScenarioError(f"unknown lambda_mode {self.lambda_mode!r}")


@dataclass(frozen=True)
class AgentSpec:
    start: Any
    config: AgentConfig

    def __post_init__(self):
        object.__setattr__(self, "start", as_point(self.start))


@dataclass(frozen=True)
class Scenario:
    agents: tuple
    obstacles: tuple = ()
    adjacency: Any = None
    gamma_matrix: Any = None
    noise: NoiseModel = field(default_factory=NoiseModel)
    duration_max: float = 120.0
    goal_tolerance: float = 0.5
    seed: int = 0
    base_tick: float = 0.01
    # "center": obstacles are sensed as full discs; "closest_point": as the
    # nearest surface point with a small body radius
    obstacle_mode: str = "center"
    closest_point_radius: float = 0.05
    # inject a tracking disturbance of up to each robot's d_u_track per period
    disturbance: bool = False
    name: str = ""

    def __post_init__(self):
        n = len(self.agents)
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        adj = np.zeros((n, n), bool) if self.adjacency is None else np.asarray(self.adjacency, bool)
        gam = np.zeros((n, n)) if self.gamma_matrix is None else np.asarray(self.gamma_matrix, float)
        adj.setflags(write=False)
        gam.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "gamma_matrix", gam)

    @property
    def n(self) -> int:
        return len(self.agents)

    def validate(self):
        n = self.n
        if n == 0:
            raise ScenarioError("scenario has no agents")
        adj, gam = self.adjacency, self.gamma_matrix
        if adj.shape != (n, n) or gam.shape != (n, n):
            raise ScenarioError(f"adjacency and gamma_matrix must be {n}x{n}")
        if not np.array_equal(adj, adj.T) or adj.diagonal().any():
            raise ScenarioError("adjacency must be symmetric with a zero diagonal")
        if not np.allclose(gam[adj], gam.T[adj]):
            raise ScenarioError("gamma_matrix must be symmetric on adjacent pairs")
        if not self.base_tick > 0 or not self.duration_max > 0 or not self.goal_tolerance > 0:
            raise ScenarioError("base_tick, duration_max and goal_tolerance must be positive")
        if self.obstacle_mode not in ("center", "closest_point"):
            raise ScenarioError(f"unknown obstacle_mode {self.obstacle_mode!r}")
        for a in self.agents:
            ticks = a.config.control_period / self.base_tick
            if abs(ticks - round(ticks)) > 1e-9 or round(ticks) < 1:
                raise ScenarioError("control_period must be a whole number of base ticks")
        starts = np.array([a.start for a in self.agents])
        deltas = np.array([a.config.delta for a in self.agents])
        for i in range(n):
            for j in range(i + 1, n):
                d = np.linalg.norm(starts[i] - starts[j])
                pair = deltas[i] + deltas[j]
                if d < 2 * pair:
                    raise ScenarioError(f"agents {i} and {j} start closer than twice their radii")
                if adj[i, j]:
                    if not gam[i, j] > 2 * pair:
                        raise ScenarioError(f"gamma[{i},{j}] must exceed twice the radii sum")
                    if d > gam[i, j]:
                        raise ScenarioError(f"agents {i} and {j} start beyond gamma")
            for k, o in enumerate(self.obstacles):
                if np.linalg.norm(starts[i] - o.center) < 2 * (deltas[i] + o.radius):
                    raise ScenarioError(f"agent {i} starts too close to obstacle {k}")

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class Violation:
    kind: str
    i: int
    j: int
    t_start: float
    t_end: float
    min_distance: float


@dataclass
class TraceReport:
    times: np.ndarray
    positions: np.ndarray
    velocity_cmd: np.ndarray
    beta: np.ndarray
    clearance: np.ndarray
    goal_times: list
    events: list
    violations: list
    seed: int
    name: str = ""

    @property
    def n_agents(self) -> int:
        return self.positions.shape[1]

    @property
    def all_arrived(self) -> bool:
        return all(t is not None for t in self.goal_times)

    @property
    def success(self) -> bool:
        return self.all_arrived and not self.violations

    @property
    def completion_time(self) -> float | None:
        return max(self.goal_times) if self.all_arrived else None


def _sense(i, pos, scenario: Scenario, rng, cfg: AgentConfig, ranges):
    """Measurements available to robot ``i``; draws happen in index order."""
    p = pos[i]
    noise = scenario.noise
    out = []
    lam_sat = (noise.bound / cfg.k_sigma) ** 2
    for j in range(scenario.n):
        if j == i or np.linalg.norm(pos[j] - p) > ranges[i]:
            continue
        q = pos[j]
        lam = 0.0
        if noise.bound > 0:
            r = rng.uniform(0.0, noise.bound)
            a = rng.uniform(0.0, 2 * math.pi)
            q = q + r * np.array([math.cos(a), math.sin(a)])
            if noise.lambda_mode == "saturated":
                lam = lam_sat
            else:
                lam = (rng.uniform(0.0, noise.bound) / cfg.k_sigma) ** 2
        out.append(Measurement(j, q, lam, ROBOT, scenario.agents[j].config.delta))
    for k, o in enumerate(scenario.obstacles):
        d = p - o.center
        dist = math.hypot(d[0], d[1])
        if dist - o.radius > ranges[i]:
            continue
        if scenario.obstacle_mode == "center":
            q, rad = o.center, o.radius
        else:
            q = o.center + d * (o.radius / dist) if dist > 0 else o.center
            rad = scenario.closest_point_radius
        lam = 0.0
        if noise.obstacle_bound > 0:
            r = rng.uniform(0.0, noise.obstacle_bound)
            a = rng.uniform(0.0, 2 * math.pi)
            q = q + r * np.array([math.cos(a), math.sin(a)])
            lam = (noise.obstacle_bound / cfg.k_sigma) ** 2
        out.append(Measurement(("obstacle", k), q, lam, OBSTACLE, rad))
    return out


def _track_all(pos, vel, cmds, dt, slew, disturbance):
    """Vectorised ``agent.track`` for every robot at once, same arithmetic."""
    dv = cmds - vel
    norm = np.hypot(dv[:, 0], dv[:, 1])
    scale = np.ones(len(pos))
    fast = norm > slew
    scale[fast] = slew[fast] / norm[fast]
    vel = np.where(np.isinf(slew)[:, None], cmds, vel + dv * scale[:, None])
    pos = pos + vel * dt
    if disturbance is not None:
        pos = pos + disturbance * dt
    return pos, vel


def run(scenario: Scenario, seed: int | None = None) -> TraceReport:
    """Simulate until every robot is within tolerance of its goal or time runs out."""
    scenario.validate()
    seed = scenario.seed if seed is None else int(seed)
    rng = np.random.default_rng(seed)
    n = scenario.n
    tick = scenario.base_tick
    cfgs = [a.config for a in scenario.agents]
    periods = [int(round(c.control_period / tick)) for c in cfgs]
    phases = [int(rng.integers(0, p)) for p in periods]
    ranges = [c.cell_params.sensing_range for c in cfgs]
    prox = [{j: float(scenario.gamma_matrix[i, j]) for j in range(n) if scenario.adjacency[i, j]}
            for i in range(n)]
    pos = np.array([a.start for a in scenario.agents], dtype=float)
    vel = np.zeros((n, 2))
    slew = np.array([math.inf if c.a_max is None else c.a_max * tick for c in cfgs])
    adapt = [AdaptiveState.initial(c.goal, c.adapt_params) for c in cfgs]
    cmds = np.zeros((n, 2))
    dist_w = np.zeros((n, 2))
    beta = np.array([s.beta for s in adapt])
    clear = np.full(n, np.nan)
    goal_times: list = [None] * n
    events = []
    goals = np.array([c.goal for c in cfgs])
    n_ticks = int(math.ceil(scenario.duration_max / tick - 1e-9))

    times, P, C, B, CL = [], [], [], [], []
    for k in range(n_ticks + 1):
        t = k * tick
        arrived = np.linalg.norm(pos - goals, axis=1) <= scenario.goal_tolerance
        for i in np.flatnonzero(arrived):
            if goal_times[i] is None:
                goal_times[i] = t
        if k == n_ticks or all(g is not None for g in goal_times):
            times.append(t); P.append(pos); C.append(np.zeros((n, 2))); B.append(beta.copy())
            CL.append(clear.copy())
            break
        for i in range(n):
            if k % periods[i] != phases[i]:
                continue
            meas = _sense(i, pos, scenario, rng, cfgs[i], ranges)
            try:
                dec = decide(pos[i], adapt[i], meas, cfgs[i], prox[i])
            except (CollisionStateError, InfeasibleProximityError) as exc:
                cmds[i] = 0.0
                events.append({"t": t, "agent": i, "type": "sensed_collision"
                               if isinstance(exc, CollisionStateError) else "infeasible_proximity",
                               "detail": str(exc)})
                log.debug("t=%.2f agent %d: %s", t, i, exc)
            else:
                cmds[i] = dec.velocity_cmd
                adapt[i] = dec.state
                beta[i] = dec.state.beta
                clear[i] = dec.diagnostics["clearance"]
            if scenario.disturbance and cfgs[i].d_u_track > 0:
                mag = rng.uniform(0.0, cfgs[i].d_u_track / cfgs[i].control_period)
                a = rng.uniform(0.0, 2 * math.pi)
                dist_w[i] = mag * np.array([math.cos(a), math.sin(a)])
        times.append(t); P.append(pos); C.append(cmds.copy()); B.append(beta.copy())
        CL.append(clear.copy())
        pos, vel = _track_all(pos, vel, cmds, tick, slew, dist_w if scenario.disturbance else None)

    trace = TraceReport(np.array(times), np.array(P), np.array(C), np.array(B), np.array(CL),
                        goal_times, events, [], seed, scenario.name)
    trace.violations = check_safety(trace, scenario) + check_proximity(trace, scenario)
    return trace


def _intervals(mask, dist, times):
    """Contiguous runs of True in ``mask`` as (start, end, min distance)."""
    if not mask.any():
        return []
    m = np.concatenate([[False], mask, [False]]).astype(np.int8)
    edges = np.flatnonzero(np.diff(m))
    out = []
    for s, e in zip(edges[::2], edges[1::2]):
        out.append((float(times[s]), float(times[e - 1]), float(dist[s:e].min())))
    return out


def check_safety(trace: TraceReport, scenario: Scenario) -> list[Violation]:
    """Every tick where two robots, or a robot and an obstacle, overlap."""
    P, times = trace.positions, trace.times
    deltas = np.array([a.config.delta for a in scenario.agents])
    out = []
    n = P.shape[1]
    for i in range(n):
        for j in range(i + 1, n):
            d = np.linalg.norm(P[:, i] - P[:, j], axis=1)
            for s, e, m in _intervals(d < deltas[i] + deltas[j], d, times):
                out.append(Violation(SAFETY, i, j, s, e, m))
        for k, o in enumerate(scenario.obstacles):
            d = np.linalg.norm(P[:, i] - o.center, axis=1)
            for s, e, m in _intervals(d < deltas[i] + o.radius, d, times):
                out.append(Violation(OBSTACLE_HIT, i, k, s, e, m))
    return out


def check_proximity(trace: TraceReport, scenario: Scenario) -> list[Violation]:
    """Every tick where an adjacent pair is farther apart than its Gamma."""
    P, times = trace.positions, trace.times
    out = []
    for i, j in zip(*np.nonzero(np.triu(scenario.adjacency, 1))):
        d = np.linalg.norm(P[:, i] - P[:, j], axis=1)
        for s, e, _ in _intervals(d > scenario.gamma_matrix[i, j], d, times):
            out.append(Violation(PROXIMITY, int(i), int(j), s, e,
                                 float(d[np.searchsorted(times, s):np.searchsorted(times, e) + 1].max())))
    return out


def metrics(traces: Sequence[TraceReport]) -> dict:
    """Batch summary; times and speeds average over successful runs only."""
    ok = [t for t in traces if t.success]
    speeds, top = [], 0.0
    for tr in ok:
        v = np.linalg.norm(np.diff(tr.positions, axis=0), axis=2) / np.diff(tr.times)[:, None]
        for i, g in enumerate(tr.goal_times):
            upto = np.searchsorted(tr.times, g)
            if upto > 0:
                speeds.append(v[:upto, i].mean())
                top = max(top, float(v[:upto, i].max()))
    min_pair = math.inf
    for tr in traces:
        P = tr.positions
        for i in range(P.shape[1]):
            for j in range(i + 1, P.shape[1]):
                min_pair = min(min_pair, float(np.linalg.norm(P[:, i] - P[:, j], axis=1).min()))
    return {
        "runs": len(traces),
        "successes": len(ok),
        "success_rate": len(ok) / len(traces) if traces else float("nan"),
        "avg_time": float(np.mean([t.completion_time for t in ok])) if ok else None,
        "avg_speed": float(np.mean(speeds)) if speeds else None,
        "max_speed": top if ok else None,
        "min_pair_distance": min_pair if math.isfinite(min_pair) else None,
    }


def generate_forest(seed, region, obstacle_count: int, delta_o: float, min_clearance: float,
                    avoid: Sequence = (), avoid_clearance: float | None = None,
                    max_tries: int = 200000) -> list[Obstacle]:
    """Rejection-sample circular obstacles inside ``region = (xmin, ymin, xmax, ymax)``.

    Centres keep ``min_clearance`` from each other and ``avoid_clearance``
    (default ``min_clearance``) from every point in ``avoid``.
    """
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = region
    keep_out = min_clearance if avoid_clearance is None else avoid_clearance
    avoid = np.array([as_point(a) for a in avoid]).reshape(-1, 2)
    centers = np.empty((0, 2))
    tries = 0
    while len(centers) < obstacle_count:
        tries += 1
        if tries > max_tries:
            raise ScenarioError(f"placed only {len(centers)} of {obstacle_count} obstacles")
        c = rng.uniform((xmin, ymin), (xmax, ymax))
        if len(centers) and np.min(np.hypot(*(centers - c).T)) < min_clearance:
            continue
        if len(avoid) and np.min(np.hypot(*(avoid - c).T)) < keep_out:
            continue
        centers = np.vstack([centers, c])
    return [Obstacle(c, delta_o) for c in centers]


def grid_adjacency(rows: int, cols: int | None = None) -> np.ndarray:
    """4-neighbour adjacency of robots laid out row-major on a grid."""
    cols = rows if cols is None else cols
    n = rows * cols
    adj = np.zeros((n, n), bool)
    for r in range(rows):
        for c in range(cols):
            k = r * cols + c
            if c + 1 < cols:
                adj[k, k + 1] = adj[k + 1, k] = True
            if r + 1 < rows:
                adj[k, k + cols] = adj[k + cols, k] = True
    return adj


def grid_shape(n: int) -> tuple[int, int]:
    """Most square ``rows x cols`` factorisation of ``n``."""
    rows = int(math.isqrt(n))
    while n % rows:
        rows -= 1
    return rows, n // rows


def formation_scenario(n: int, *, spacing: float, travel: float, delta: float, delta_o: float,
                       gamma: float, obstacle_count: int, seed: int, d_u: float | None,
                       noise: float = 0.0, epsilon: float = 1.0, rs: float = 5.0,
                       adapt: AdaptationParams | None = None, d_u_track: float = 0.0,
                       disturbance: bool = False, arena=(40.0, 30.0), obstacle_gap: float = 2.0,
                       duration_max: float = 150.0, goal_tolerance: float = 0.5,
                       goal_layout: str = "translate", goal_spacing: float | None = None,
                       obstacle_spacing: float | None = None, a_max: float | None = None,
                       name: str = "") -> Scenario:
    """Grid formation crossing an obstacle field, every robot translating by ``travel``.

    The formation starts centred on the arena's left side and the goals are the
    start grid shifted along +x (``goal_layout="mirror"`` reverses the row order,
    ``"swap_outer"`` swaps only the first and last rows, and
    ``goal_spacing`` rescales the goal grid). Obstacles are scattered over the whole arena,
    keeping ``obstacle_gap`` from every start and goal. Robots track their commands
    exactly unless ``a_max`` is given; a slew limit adds tracking error that the
    margin has to cover through ``d_u_track``.
    """
    rows, cols = grid_shape(n)
    w, h = arena
    x0 = 0.5 * (w - travel) - 0.5 * (cols - 1) * spacing
    y0 = 0.5 * h - 0.5 * (rows - 1) * spacing
    starts = [np.array([x0 + c * spacing, y0 + r * spacing]) for r in range(rows) for c in range(cols)]
    gs = spacing if goal_spacing is None else goal_spacing
    gx0 = x0 + travel + 0.5 * (cols - 1) * (spacing - gs)
    gy0 = 0.5 * h - 0.5 * (rows - 1) * gs
    if goal_layout == "translate":
        slots = [(r, c) for r in range(rows) for c in range(cols)]
    elif goal_layout == "mirror":
        # rows swap top to bottom, so the formation has to pass through itself
        slots = [(rows - 1 - r, c) for r in range(rows) for c in range(cols)]
    elif goal_layout == "swap_outer":
        # only the first and last rows trade places, inner rows translate
        flip = {0: rows - 1, rows - 1: 0}
        slots = [(flip.get(r, r), c) for r in range(rows) for c in range(cols)]
    else:
        raise ScenarioError(f"unknown goal_layout {goal_layout!r}")
    goals = [np.array([gx0 + c * gs, gy0 + r * gs]) for r, c in slots]
    cp = CellParams(epsilon, epsilon, rs, delta)
    ap = adapt or AdaptationParams()
    agents = [AgentSpec(s, AgentConfig(delta=delta, goal=g, cell_params=cp, adapt_params=ap,
                                       d_u_fixed=d_u, d_u_track=d_u_track, a_max=a_max))
              for s, g in zip(starts, goals)]
    obstacles = generate_forest(seed, (0.0, 0.0, w, h), obstacle_count, delta_o,
                                min_clearance=(2 * (delta + delta_o) + 1.0
                                               if obstacle_spacing is None else obstacle_spacing),
                                avoid=starts + goals, avoid_clearance=obstacle_gap)
    adj = grid_adjacency(rows, cols)
    return Scenario(tuple(agents), tuple(obstacles), adj, np.where(adj, gamma, 0.0),
                    NoiseModel(noise), duration_max, goal_tolerance, seed,
                    disturbance=disturbance, name=name or f"formation-n{n}")


def margin_scenario(n: int, seed: int, d_u: float = 1.0, noise: float = 0.8,
                    obstacle_count: int = 60) -> Scenario:
    """Grid formation crossing a 40 x 30 m forest with its outer rows swapped, noisy sensing.

    Defaults follow the published protocol: robot radius 0.2 m, obstacle
    radius 0.15 m, cell radius 5 m, Gamma 10 m and epsilon 1.
    """
    return formation_scenario(n, spacing=4.0, travel=20.0, delta=0.2, delta_o=0.15, gamma=10.0,
                              obstacle_count=obstacle_count, seed=seed, d_u=d_u, noise=noise,
                              goal_layout="swap_outer", duration_max=90.0,
                              name=f"margin-n{n}-du{d_u:g}")


def epsilon_scenario(seed: int, epsilon: float, n: int = 4, obstacle_count: int = 40) -> Scenario:
    """Noise-free formation crossing a long forest, used to compare epsilon values.

    Tracking disturbances of up to 5 cm per period are injected and covered by
    ``d_u_track``. Obstacles keep 3.5 m between centres so that every gap is
    wide enough for the fixed 0.8 m margin under either epsilon.
    """
    ap = AdaptationParams(beta_D=0.5, d1=0.5, d2=1.0, d3=0.5, d4=1.0)
    return formation_scenario(n, spacing=3.0, travel=42.0, delta=0.25, delta_o=0.3, gamma=8.0,
                              obstacle_count=obstacle_count, seed=seed, d_u=0.8, epsilon=epsilon,
                              rs=4.5, adapt=ap, d_u_track=0.05, disturbance=True,
                              arena=(56.0, 30.0), obstacle_spacing=3.5,
                              name=f"epsilon-n{n}-eps{epsilon:g}")
