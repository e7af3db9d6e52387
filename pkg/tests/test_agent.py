import math

import numpy as np
import pytest

from lloydflock.agent import (AgentConfig, DisturbanceBoundError, KinematicState, Measurement,
                              decide, gate_and_reproject, margin_d_u, step_margin, track)
from lloydflock.cells import OBSTACLE, CellParams
from lloydflock.geometry import boundary_distance, contains
from lloydflock.simulator import _track_all
from lloydflock.weighting import AdaptationParams, AdaptiveState


def test_margin_examples():
    assert margin_d_u(0.04, 2, 0.2, 0.2, 0) == pytest.approx(0.8)
    assert margin_d_u(0, 3, 0, 0, 0.3) == pytest.approx(0.3)
    assert margin_d_u((0.8 / 3) ** 2, 3, 0.2, 0.15, 0) == pytest.approx(1.15)


def test_step_margin_uses_worst_measurement_and_override():
    cfg = AgentConfig(delta=0.2, d_u_track=0.1)
    ms = [Measurement(1, (3, 0), 0.01, radius=0.2), Measurement(2, (0, 3), 0.04, radius=0.2)]
    assert step_margin(ms, cfg) == pytest.approx(3 * 0.2 + 0.4 + 0.1)
    assert step_margin(ms, AgentConfig(d_u_fixed=1.0)) == 1.0


def test_gate_and_reproject():
    p = np.zeros(2)
    ms = [Measurement("a", (3, 0), lambda_max=20), Measurement("b", (12.5, 0)),
          Measurement("c", (0, 12.5))]
    out = gate_and_reproject(ms, p, {"b": 10.0}, 15.0)
    assert [m.target_id for m in out] == ["b", "c"]
    assert np.linalg.norm(out[0].position) == pytest.approx(9.999)
    assert np.array_equal(out[1].position, (0, 12.5))


def test_measurement_validation():
    with pytest.raises(ValueError):
        Measurement(1, (0, 0), -1)
    with pytest.raises(ValueError):
        Measurement(1, (0, 0), kind="tree")


def _cfg(**kw):
    base = dict(delta=0.2, goal=(40, 0), d_u_fixed=0.5)
    base.update(kw)
    return AgentConfig(**base)


def test_decide_free_space_full_speed_toward_goal():
    cfg = _cfg()
    st = AdaptiveState(0.15, cfg.goal)
    d = decide((0, 0), st, [], cfg)
    assert np.linalg.norm(d.velocity_cmd) == pytest.approx(cfg.v_max)
    assert d.velocity_cmd[0] > 0 and abs(d.velocity_cmd[1]) < 1e-6


def test_decide_fixed_point():
    cfg = _cfg(goal=(0, 0))
    d = decide((0, 0), AdaptiveState(0.15, (0, 0)), [], cfg)
    assert np.allclose(d.velocity_cmd, 0, atol=1e-9)


def test_decide_epsilon_one_is_faster_head_on():
    speeds = {}
    for eps in (1.0, 2.0):
        cfg = _cfg(v_max=50.0, cell_params=CellParams(eps, eps, 5.0, 0.2))
        st = AdaptiveState(0.15, cfg.goal)
        d = decide((0, 0), st, [Measurement(1, (4, 0), radius=0.2)], cfg)
        speeds[eps] = d.velocity_cmd[0]
    assert speeds[1.0] > speeds[2.0] > 0


def test_decide_margin_and_containment():
    rng = np.random.default_rng(8)
    cfg = _cfg(d_u_fixed=0.6, goal=(10, 3))
    for _ in range(60):
        ms = []
        for k in range(rng.integers(0, 6)):
            q = rng.uniform(-5, 5, 2)
            if np.linalg.norm(q) > 1.0:
                ms.append(Measurement(k, q, radius=0.2,
                                      kind=OBSTACLE if k % 2 else "robot"))
        st = AdaptiveState(float(np.exp(rng.uniform(-3, 1))), rng.uniform(-10, 10, 2))
        d = decide((0, 0), st, ms, cfg)
        c_F = d.diagnostics["c_F"]
        assert contains(d.cell_F, (0, 0), 1e-7) and contains(d.cell_F, c_F, 1e-6)
        if d.diagnostics["margin_feasible"]:
            assert boundary_distance(d.cell_F, c_F) >= 0.6 - 0.02
        assert np.linalg.norm(d.velocity_cmd) <= cfg.v_max + 1e-12


def test_config_syncs_delta_into_cells():
    cfg = AgentConfig(delta=0.3)
    assert cfg.cell_params.delta_self == 0.3
    with pytest.raises(ValueError):
        AgentConfig(a_max=0)


def test_track_examples():
    s = track(KinematicState((0, 0)), (1, 0), 0.1)
    assert np.allclose(s.position, (0.1, 0))
    track(KinematicState((0, 0)), (1, 0), 0.1, disturbance=(0.5, 0), d_u_track=0.05)
    with pytest.raises(DisturbanceBoundError):
        track(KinematicState((0, 0)), (1, 0), 0.1, disturbance=(0.6, 0), d_u_track=0.05)


def test_track_slew_limit():
    s = track(KinematicState((0, 0)), (1, 0), 0.1, a_max=2.0)
    assert np.allclose(s.velocity, (0.2, 0))


def test_track_deviation_bounded():
    rng = np.random.default_rng(0)
    s = KinematicState((0, 0))
    for _ in range(1000):
        cmd = rng.uniform(-1, 1, 2)
        a = rng.uniform(0, 2 * math.pi)
        w = rng.uniform(0, 0.5) * np.array([math.cos(a), math.sin(a)])
        nxt = track(s, cmd, 0.1, w, 0.05)
        assert np.linalg.norm(nxt.position - (s.position + cmd * 0.1)) <= 0.05 + 1e-12
        s = nxt


@pytest.mark.parametrize("a_max", [None, 2.0])
def test_vectorised_tracking_matches_track(a_max):
    rng = np.random.default_rng(1)
    n, dt = 5, 0.01
    pos, vel = rng.uniform(-5, 5, (n, 2)), rng.uniform(-1, 1, (n, 2))
    slew = np.full(n, math.inf if a_max is None else a_max * dt)
    for _ in range(50):
        cmds = rng.uniform(-2, 2, (n, 2))
        w = rng.uniform(-0.3, 0.3, (n, 2))
        ref = [track(KinematicState(pos[i], vel[i]), cmds[i], dt, w[i], a_max=a_max)
               for i in range(n)]
        pos, vel = _track_all(pos, vel, cmds, dt, slew, w)
        for i in range(n):
            assert np.array_equal(pos[i], ref[i].position)
            assert np.array_equal(vel[i], ref[i].velocity)


def test_adaptation_params_reach_decide():
    ap = AdaptationParams(beta_D=0.5)
    cfg = _cfg(adapt_params=ap)
    d = decide((0, 0), AdaptiveState.initial(cfg.goal, ap), [], cfg)
    assert d.state.beta >= 0.5 * 0.9
