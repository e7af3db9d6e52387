import math
import time

import numpy as np
import pytest

from lloydflock.agent import AgentConfig
from lloydflock.simulator import (OBSTACLE_HIT, PROXIMITY, SAFETY, AgentSpec, NoiseModel,
                                  Obstacle, Scenario, ScenarioError, TraceReport, _sense,
                                  check_proximity, check_safety, epsilon_scenario,
                                  formation_scenario, generate_forest, grid_adjacency, grid_shape,
                                  margin_scenario, metrics, run)


def _two(d=5.0, adjacent=False, gamma=10.0):
    agents = (AgentSpec((0, 0), AgentConfig(goal=(0, 0))),
              AgentSpec((d, 0), AgentConfig(goal=(d, 0))))
    adj = np.array([[0, 1], [1, 0]], bool) if adjacent else None
    gam = np.where(adj, gamma, 0.0) if adjacent else None
    return Scenario(agents, adjacency=adj, gamma_matrix=gam)


def _trace(positions, dt=0.01, ok=True):
    P = np.asarray(positions, float)
    T, n = P.shape[:2]
    return TraceReport(np.arange(T) * dt, P, np.zeros((T, n, 2)), np.ones((T, n)),
                       np.ones((T, n)), [0.0 if ok else None] * n, [], [], 0)


def test_single_agent_free_space():
    sc = Scenario((AgentSpec((0, 0), AgentConfig(goal=(40, 0), d_u_fixed=0.5)),),
                  duration_max=60.0)
    tr = run(sc)
    assert tr.success
    assert tr.completion_time == pytest.approx(40 / 1.5, rel=0.2)


def test_n9_grid_succeeds():
    tr = run(margin_scenario(9, 1))
    assert tr.success, tr.violations


def test_run_is_deterministic():
    sc = margin_scenario(4, 3)
    a, b = run(sc), run(sc)
    for f in ("times", "positions", "velocity_cmd", "beta", "clearance"):
        assert np.array_equal(getattr(a, f), getattr(b, f), equal_nan=True)
    assert a.goal_times == b.goal_times and a.events == b.events


def test_seed_changes_trace():
    sc = margin_scenario(4, 3)
    assert not np.array_equal(run(sc, 3).positions, run(sc, 4).positions)


def test_timestamps_strictly_increase_and_arrival_sticks():
    tr = run(margin_scenario(4, 2))
    assert np.all(np.diff(tr.times) > 0)
    assert tr.all_arrived and tr.completion_time == max(tr.goal_times)


def test_stationary_pair_no_violations():
    tr = _trace(np.tile([[0, 0], [5, 0]], (50, 1, 1)))
    assert check_safety(tr, _two()) == []


def test_forced_crossing_interval():
    # agent 1 sweeps through agent 0 at 1 m/s; |x| < 0.4 during t in (1.6, 2.4)
    t = np.arange(401) * 0.01
    P = np.zeros((len(t), 2, 2))
    P[:, 1, 0] = t - 2.0
    P[:, 1, 1] = 0.0
    vs = check_safety(_trace(P), _two())
    assert len(vs) == 1
    v = vs[0]
    assert (v.kind, v.i, v.j) == (SAFETY, 0, 1)
    inside = t[np.abs(t - 2.0) < 0.4]
    assert (v.t_start, v.t_end) == (inside[0], inside[-1])
    assert v.min_distance == pytest.approx(0.0, abs=1e-12)


def test_obstacle_hit_flagged():
    sc = Scenario((AgentSpec((0, 0), AgentConfig(goal=(0, 0))),), (Obstacle((1, 0), 0.3),))
    P = np.zeros((10, 1, 2))
    P[5:, 0, 0] = 0.6
    vs = check_safety(_trace(P), sc)
    assert [(v.kind, v.t_start) for v in vs] == [(OBSTACLE_HIT, 0.05)]


def test_proximity_checker():
    far = _trace(np.tile([[0, 0], [15, 0]], (5, 1, 1)))
    assert check_proximity(far, _two(5.0)) == []
    stretched = _trace(np.tile([[0, 0], [10.5, 0]], (5, 1, 1)))
    vs = check_proximity(stretched, _two(5.0, adjacent=True))
    assert len(vs) == 1 and vs[0].kind == PROXIMITY
    assert vs[0].min_distance == pytest.approx(10.5)


def test_metrics_success_rate():
    clean = [_trace(np.tile([[0, 0], [5, 0]], (3, 1, 1))) for _ in range(10)]
    assert metrics(clean)["success_rate"] == 1.0
    bad = []
    for k in range(10):
        tr = _trace(np.tile([[0, 0], [5, 0]], (3, 1, 1)))
        if k % 2:
            tr.violations = ["x"]
        bad.append(tr)
    m = metrics(bad)
    assert m["success_rate"] == 0.5 and m["successes"] == 5
    assert m["min_pair_distance"] == pytest.approx(5.0)


def test_generate_forest():
    assert generate_forest(0, (0, 0, 10, 10), 0, 0.15, 1.0) == []
    t = time.perf_counter()
    obs = generate_forest(1, (0, 0, 40, 30), 60, 0.15, 1.7)
    assert time.perf_counter() - t < 1.0
    c = np.array([o.center for o in obs])
    d = np.hypot(*(c[:, None] - c[None]).transpose(2, 0, 1))
    assert d[np.triu_indices(60, 1)].min() >= 1.7
    with pytest.raises(ScenarioError):
        generate_forest(1, (0, 0, 2, 2), 50, 0.15, 1.0, max_tries=2000)


def test_grid_helpers():
    adj = grid_adjacency(3)
    assert adj.sum() == 2 * 12 and np.array_equal(adj, adj.T)
    assert grid_shape(16) == (4, 4) and grid_shape(6) == (2, 3)


def test_sensing_error_bounded():
    sc = margin_scenario(9, 1)
    rng = np.random.default_rng(0)
    pos = np.array([a.start for a in sc.agents])
    cfg = sc.agents[0].config
    for _ in range(200):
        for m in _sense(4, pos, sc, rng, cfg, [10.0] * 9):
            if m.kind == "robot":
                assert np.linalg.norm(m.position - pos[m.target_id]) <= 0.8
                assert m.lambda_max == pytest.approx((0.8 / 3) ** 2)


@pytest.mark.parametrize("bad", ["asym", "gamma", "close", "period"])
def test_scenario_validation(bad):
    cfg = AgentConfig(goal=(0, 0))
    agents = (AgentSpec((0, 0), cfg), AgentSpec((3, 0), cfg))
    adj = np.array([[0, 1], [1, 0]], bool)
    gam = np.where(adj, 10.0, 0.0)
    kw = {}
    if bad == "asym":
        adj = np.array([[0, 1], [0, 0]], bool)
    elif bad == "gamma":
        gam = np.where(adj, 0.5, 0.0)
    elif bad == "close":
        agents = (AgentSpec((0, 0), cfg), AgentSpec((0.5, 0), cfg))
    else:
        agents = (AgentSpec((0, 0), AgentConfig(goal=(0, 0), control_period=0.015)), agents[1])
    with pytest.raises(ScenarioError):
        run(Scenario(agents, (), adj, gam, **kw))


def test_family_builders():
    m = margin_scenario(16, 2, d_u=0.0)
    m.validate()
    assert m.n == 16 and m.noise.bound == 0.8
    assert all(a.config.d_u_fixed == 0.0 for a in m.agents)
    e = epsilon_scenario(2, 1.052)
    e.validate()
    assert e.disturbance and e.agents[0].config.cell_params.epsilon_p == 1.052
    with pytest.raises(ScenarioError):
        formation_scenario(4, spacing=3, travel=10, delta=0.2, delta_o=0.1, gamma=8,
                           obstacle_count=0, seed=0, d_u=1, goal_layout="spiral")


def test_noise_model_validation():
    with pytest.raises(ScenarioError):
        NoiseModel(-1)
    with pytest.raises(ScenarioError):
        NoiseModel(0.1, lambda_mode="gauss")


def test_closest_point_obstacles_run():
    sc = Scenario((AgentSpec((0, 0), AgentConfig(goal=(8, 0), d_u_fixed=0.3)),),
                  (Obstacle((4, 0.3), 0.5),), duration_max=30.0, obstacle_mode="closest_point")
    tr = run(sc)
    assert tr.success and not math.isnan(tr.clearance[-1, 0])
