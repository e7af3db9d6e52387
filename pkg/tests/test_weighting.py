import math

import numpy as np
import pytest

from conftest import grid_weighted_centroid, random_polygon
from lloydflock.geometry import ConvexRegion, boundary_distance, contains, disc_polygon
from lloydflock.weighting import (AdaptationParams, AdaptiveState, beta_min, centroid_clearance,
                                  coverage_cost, phi, rotated_goal, update_beta, update_pbar,
                                  weighted_centroid)

UNIT = ConvexRegion([(0, 0), (1, 0), (1, 1), (0, 1)])


def test_phi_examples():
    assert phi((1, 1), (1, 1), 0.3) == 1.0
    assert phi((0, 2), (0, 0), 2) == pytest.approx(math.exp(-1))
    assert phi((3, 0), (0, 0), 0.15) == pytest.approx(math.exp(-20), rel=1e-12)
    with pytest.raises(ValueError):
        phi((0, 0), (0, 0), 0)


@pytest.mark.parametrize("beta", [1e-3, 0.05, 1.0, 50.0])
def test_centroid_symmetric(beta):
    assert np.allclose(weighted_centroid(UNIT, (0.5, 0.5), beta), (0.5, 0.5), atol=1e-9)


def test_centroid_uniform_limit():
    assert np.allclose(weighted_centroid(UNIT, (3, -2), 1e6), (0.5, 0.5), atol=1e-4)


def test_centroid_grid_oracle_outside_pbar():
    c = weighted_centroid(UNIT, (2, 0.5), 0.5)
    g = grid_weighted_centroid(UNIT, (2, 0.5), 0.5, n=4000)
    assert np.linalg.norm(c - g) <= 1e-3
    assert c[0] == pytest.approx(0.6538, abs=1e-3)


def test_centroid_underflow_falls_back():
    c, flag = weighted_centroid(UNIT, (400, 0), 1e-3, full_output=True)
    assert contains(UNIT, c)
    assert isinstance(flag, bool)


def test_centroid_inside_region():
    rng = np.random.default_rng(4)
    for _ in range(200):
        r = random_polygon(rng)
        pb = rng.uniform(-8, 8, 2)
        beta = float(np.exp(rng.uniform(-6, 5)))
        assert contains(r, weighted_centroid(r, pb, beta), 1e-6)


def test_monotone_localisation():
    r = ConvexRegion([(0, 0), (3, 0), (2, 2), (0, 1.5)])
    pb = np.array([2.6, 0.2])
    betas = np.logspace(1, -2.5, 60)
    dist = [np.linalg.norm(weighted_centroid(r, pb, b) - pb) for b in betas]
    assert all(b <= a + 1e-6 for a, b in zip(dist, dist[1:]))


def test_beta_min_disc_any_beta():
    disc = disc_polygon((0, 0), 2.0, 64)
    for d_u in (0.3, 1.5, 2.5):
        res = beta_min(disc, (0, 0), d_u, full_output=True)
        assert res.beta == pytest.approx(1e-3)
        assert res.clearance == pytest.approx(2.0, abs=0.01)


def test_beta_min_feasible_matches_dense_grid():
    pb, d_u = (0.99, 0.5), 0.3
    res = beta_min(UNIT, pb, d_u, full_output=True)
    assert res.feasible
    assert boundary_distance(UNIT, weighted_centroid(UNIT, pb, res.beta)) == pytest.approx(d_u,
                                                                                         abs=0.01)
    grid = np.logspace(-3, 3, 1000)
    clear = np.array([centroid_clearance(UNIT, pb, b) for b in grid])
    oracle = grid[np.argmax(clear >= d_u)]
    assert res.beta == pytest.approx(oracle, rel=0.05)


def test_beta_min_infeasible_returns_max_clearance():
    res = beta_min(UNIT, (0.5, 0.5), 0.6, full_output=True)
    assert not res.feasible
    assert res.clearance == pytest.approx(0.5, abs=0.01)


def test_beta_min_validates():
    with pytest.raises(ValueError):
        beta_min(UNIT, (0.5, 0.5), -1)
    with pytest.raises(ValueError):
        beta_min(UNIT, (0.5, 0.5), 0.1, search_range=(1, 0.5))


def _branch_inputs(stuck):
    # c_A close to p_i and far from c_S selects the "stuck" branch
    p = np.zeros(2)
    c_A = np.array([0.1, 0.0])
    c_S = np.array([3.0, 0.0]) if stuck else np.array([0.2, 0.0])
    return p, c_A, c_S


def test_update_beta_examples():
    ap = AdaptationParams(beta_D=0.15, k_beta=1.0)
    st = AdaptiveState(1.0, (5, 0))
    p, c_A, c_S = _branch_inputs(True)
    assert update_beta(st, UNIT, c_S, p, ap, 0.0, 0.1, c_A=c_A) == pytest.approx(0.9)
    p, c_A, c_S = _branch_inputs(False)
    assert update_beta(st, UNIT, c_S, p, ap, 0.0, 0.1, c_A=c_A) == pytest.approx(0.915)
    p, c_A, c_S = _branch_inputs(True)
    assert update_beta(st, UNIT, c_S, p, ap, 2.0, 0.1, c_A=c_A) == 2.0


def test_update_beta_converges_geometrically():
    ap = AdaptationParams(beta_D=0.15, k_beta=1.0)
    p, c_A, c_S = _branch_inputs(False)
    b = 2.0
    for k in range(1, 40):
        b = update_beta(AdaptiveState(b, (5, 0)), UNIT, c_S, p, ap, 0.0, 0.1, c_A=c_A)
        assert b - 0.15 == pytest.approx((2.0 - 0.15) * 0.9 ** k, rel=1e-9)


def test_update_pbar_free_step():
    ap = AdaptationParams()
    st = AdaptiveState(0.15, (0, 0))
    p, c_A, c_S = _branch_inputs(False)
    pb, rot = update_pbar(st, UNIT, c_A, c_S, None, p, (10, 0), ap, 0.1)
    assert np.allclose(pb, (1, 0)) and not rot


def test_update_pbar_rotation_right_hand():
    ap = AdaptationParams(eps_rot=1e-9)
    assert np.allclose(rotated_goal((0, 0), (10, 0), ap), (0, -10), atol=1e-7)
    st = AdaptiveState(0.15, (0, 0))
    p, c_A, c_S = _branch_inputs(True)
    pb, rot = update_pbar(st, UNIT, c_A, c_S, None, p, (10, 0), ap, 0.1)
    assert rot and np.allclose(pb, (0, -1), atol=1e-7)
    left = AdaptationParams(eps_rot=1e-9, turn_sign="left")
    assert np.allclose(rotated_goal((1, 1), (11, 1), left), (1, 11), atol=1e-7)


def test_update_pbar_reset():
    ap = AdaptationParams()
    st = AdaptiveState(0.15, (4, -4), rotation_active=True)
    p = np.zeros(2)
    c_A = np.array([0.1, 0])
    c_goal = np.array([0.5, 0])
    pb, rot = update_pbar(st, UNIT, c_A, (3, 0), c_goal, p, (10, 0), ap, 0.1)
    assert np.array_equal(pb, (10, 0)) and not rot


def test_params_validation():
    with pytest.raises(ValueError):
        AdaptationParams(turn_sign="up")
    with pytest.raises(ValueError):
        AdaptationParams(k_beta=0)
    with pytest.raises(ValueError):
        AdaptiveState(0, (0, 0))


def test_coverage_cost_uniform_square():
    # beta -> inf: integral of |q - c|^2 over the unit square about its centre is 1/6
    assert coverage_cost(UNIT, (0.5, 0.5), (0.5, 0.5), 1e9) == pytest.approx(1 / 6, rel=1e-9)
