import math

import numpy as np
import pytest

from conftest import make_constraints, make_sim_config
from sightline.connectivity import (
    ConstraintParams,
    alpha_potential,
    build_connectivity_state,
    connectivity_velocity,
    fiedler_gain,
    fiedler_pair,
    fix_eigenvector_sign,
    gamma_potential,
    laplacian_from_weights,
    pair_terms,
)
from sightline.geometry import FlipConfig, approx_visible_region, flipped_convex_hull, ring_scan
from sightline.losdist import LosEvaluation, LosParams, los_distance
from sightline.world import WorldModel, build_region, raycast_lidar, remove_neighbor_points


def open_space_region(lidar_range=30.0, r_flip=150.0):
    scan = ring_scan(lidar_range, np.deg2rad(1.0), 720)
    cfg = FlipConfig(r_flip=r_flip)
    hull = flipped_convex_hull(scan, cfg)
    return approx_visible_region(hull, cfg)


# ------------------------------------------------------------- alpha / gamma

def test_alpha_examples():
    p = make_constraints(d_com_max=10.0, d_com_ramp=2.0)
    assert alpha_potential(0.0, p) == (1.0, 0.0)
    assert alpha_potential(10.0, p) == (0.0, 0.0)
    assert alpha_potential(9.0, p)[0] == pytest.approx(0.5)
    assert alpha_potential(12.0, p) == (0.0, 0.0)


def test_gamma_examples():
    p = make_constraints(d_coll_min=0.5, d_coll_ramp=1.0)
    assert gamma_potential(0.5, p) == (0.0, 0.0)
    assert gamma_potential(0.2, p) == (0.0, 0.0)
    assert gamma_potential(1.0, p)[0] == pytest.approx(0.5)
    assert gamma_potential(10.0, p) == (1.0, 0.0)


def test_alpha_gamma_smoothness():
    p = make_constraints()
    h = 1e-7
    for d in np.linspace(0.01, p.d_com_max + 1.0, 400):
        for fn in (alpha_potential, gamma_potential):
            v0, dv = fn(d, p)
            fd = (fn(d + h, p)[0] - fn(d - h, p)[0]) / (2 * h)
            assert dv == pytest.approx(fd, abs=1e-5)
    assert alpha_potential(p.d_com_max - p.d_com_ramp / 2, p)[1] < 0
    assert gamma_potential(p.d_coll_min + p.d_coll_ramp / 2, p)[1] > 0


def test_constraint_band_ordering_enforced():
    with pytest.raises(ValueError):
        ConstraintParams(d_com_max=2.0, d_coll_min=1.0, los=LosParams())


# ------------------------------------------------------------- fiedler pair

def _oracle_fiedler(lap):
    w, v = np.linalg.eigh(lap)
    return float(w[1]), fix_eigenvector_sign(v[:, 1])


def test_fiedler_path_and_complete_graph():
    path = np.array([[1.0, -1, 0], [-1, 2, -1], [0, -1, 1]])
    lam2, v2 = fiedler_pair(path)
    o_lam, o_v = _oracle_fiedler(path)
    assert lam2 == pytest.approx(1.0, abs=1e-12)
    assert lam2 == pytest.approx(o_lam, abs=1e-12)
    assert np.allclose(v2, o_v, atol=1e-9)

    complete = 3 * np.eye(3) - np.ones((3, 3))
    lam2, _ = fiedler_pair(complete)
    assert lam2 == pytest.approx(3.0, abs=1e-12)


def test_fiedler_disconnected_is_exact_zero():
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = 1.3
    w[2, 3] = w[3, 2] = 0.7
    lam2, v2 = fiedler_pair(laplacian_from_weights(w))
    assert lam2 == 0.0
    assert abs(v2 @ np.ones(4)) < 1e-9
    assert np.linalg.norm(v2) == pytest.approx(1.0)


def test_fiedler_rejects_asymmetric():
    bad = np.array([[1.0, -1], [-0.5, 1.0]])
    with pytest.raises(ValueError):
        fiedler_pair(bad)


def test_fiedler_matches_oracle_on_random_graphs(rng):
    for _ in range(100):
        n = int(rng.integers(2, 13))
        w = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                if rng.uniform() < 0.6:
                    w[i, j] = w[j, i] = rng.uniform(0.1, 2.0)
        lap = laplacian_from_weights(w)
        lam2, v2 = fiedler_pair(lap)
        o_lam, o_v = _oracle_fiedler(lap)
        assert abs(lam2 - (0.0 if o_lam < 1e-12 else o_lam)) < 1e-9
        evals = np.linalg.eigh(lap)[0]
        gap = evals[2] - evals[1] if n > 2 else math.inf
        if lam2 > 0 and gap > 1e-6:  # eigenvector well-defined
            assert np.allclose(v2, o_v, atol=1e-9)
        assert abs(v2 @ np.ones(n)) < 1e-9


def test_lambda2_monotone_under_edge_addition(rng):
    for _ in range(100):
        n = int(rng.integers(3, 9))
        w = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                if rng.uniform() < 0.5:
                    w[i, j] = w[j, i] = rng.uniform(0.1, 1.0)
        lam_before, _ = fiedler_pair(laplacian_from_weights(w))
        zero_pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if w[i, j] == 0]
        if not zero_pairs:
            continue
        i, j = zero_pairs[int(rng.integers(len(zero_pairs)))]
        w[i, j] = w[j, i] = rng.uniform(0.1, 1.0)
        lam_after, _ = fiedler_pair(laplacian_from_weights(w))
        assert lam_after >= lam_before - 1e-9


def test_bipartition_zeroing_disconnects(rng):
    n = 6
    w = rng.uniform(0.5, 1.5, (n, n))
    w = (w + w.T) / 2
    np.fill_diagonal(w, 0.0)
    cut = [0, 1, 2]
    for i in cut:
        for j in range(n):
            if j not in cut:
                w[i, j] = w[j, i] = 0.0
    lam2, _ = fiedler_pair(laplacian_from_weights(w))
    assert lam2 <= 1e-9


# ------------------------------------------------------------- build state

def test_two_robots_plateau_weight_is_k_beta():
    p = make_constraints()
    region = open_space_region()
    positions = [np.array([0.0, 0.0]), np.array([5.0, 0.0])]
    state = build_connectivity_state(positions, [region, region], p)
    assert state.weights[0, 1] == pytest.approx(p.los.k_beta)
    a, b, g = state.factors[(0, 1)]
    assert (a, g) == (1.0, 1.0)
    assert b == pytest.approx(p.los.k_beta)
    assert state.lambda2 == pytest.approx(2 * p.los.k_beta, abs=1e-9)


def test_wall_between_robots_kills_edge():
    cfg = make_sim_config(beam_count=720)
    world = WorldModel(
        obstacles=[np.array([[-0.4, -6.0], [0.4, -6.0], [0.4, 6.0], [-0.4, 6.0]])],
        bounds=[-20, -20, 20, 20],
        targets=np.zeros((0, 2)),
    )
    positions = [np.array([-3.0, 0.0]), np.array([3.0, 0.0])]
    regions = []
    for i, q in enumerate(positions):
        raw = raycast_lidar(world, q, cfg)
        culled = remove_neighbor_points(raw, [positions[1 - i] - q], cfg.neighbor_cull_radius)
        _, region = build_region(culled, cfg, robot_id=i)
        regions.append(region)
    state = build_connectivity_state(positions, regions, cfg.constraints)
    assert not los_distance(regions[0], positions[1] - positions[0]).inside
    assert state.weights[0, 1] == 0.0
    assert state.factors[(0, 1)][1] == 0.0
    assert state.lambda2 == 0.0


def test_three_robot_line_matches_scalar_reference():
    p = make_constraints()
    region = open_space_region()
    positions = [np.array([0.0, 0.0]), np.array([13.0, 0.0]), np.array([26.0, 0.0])]
    state = build_connectivity_state(positions, [region] * 3, p)
    for i in range(3):
        for j in range(i + 1, 3):
            d = float(np.linalg.norm(positions[i] - positions[j]))
            if d > p.d_com_max:
                assert state.weights[i, j] == 0.0
                continue
            alpha = alpha_potential(d, p)[0]
            gamma = gamma_potential(d, p)[0]
            dji = los_distance(region, positions[i] - positions[j])
            dij = los_distance(region, positions[j] - positions[i])
            from sightline.losdist import beta_potential, effective_distance

            beta = beta_potential(
                min(effective_distance(dji), effective_distance(dij)), p.los
            )[0]
            assert state.weights[i, j] == pytest.approx(alpha * beta * gamma, abs=1e-12)
    assert state.weights[0, 2] == 0.0  # beyond communication range


def test_weights_symmetric(rng):
    p = make_constraints()
    region = open_space_region()
    positions = [rng.uniform(-6, 6, 2) for _ in range(4)]
    state = build_connectivity_state(positions, [region] * 4, p)
    assert np.array_equal(state.weights, state.weights.T)
    lap = state.laplacian
    assert np.allclose(lap.sum(axis=1), 0.0, atol=1e-12)


def test_mismatched_region_count_errors():
    p = make_constraints()
    with pytest.raises(ValueError):
        build_connectivity_state([np.zeros(2), np.ones(2)], [open_space_region()], p)


# ------------------------------------------------------------- velocities

def test_connectivity_velocity_zero_on_plateaus():
    p = make_constraints()
    region = open_space_region()
    positions = [np.array([0.0, 0.0]), np.array([5.0, 0.0])]
    state = build_connectivity_state(positions, [region, region], p)
    for i in (0, 1):
        assert np.allclose(connectivity_velocity(i, state, p), 0.0)


def test_two_robot_fade_band_attraction():
    p = make_constraints(d_com_max=10.0, d_com_ramp=2.0)
    region = open_space_region()
    positions = [np.array([0.0, 0.0]), np.array([9.0, 0.0])]  # inside the fade band
    state = build_connectivity_state(positions, [region, region], p)
    u0 = connectivity_velocity(0, state, p)
    u1 = connectivity_velocity(1, state, p)
    assert u0[0] > 0  # robot 0 pulled toward robot 1
    assert u1[0] < 0
    assert np.allclose(u0, -u1, atol=1e-12)
    # hand expansion for R=2: (v2_i - v2_j)^2 = 2 for the normalized pair
    gain, _ = fiedler_gain(state.lambda2, p)
    expected = gain * state.grads[(0, 1)] * 2.0
    assert np.allclose(u0, expected, atol=1e-12)


def test_velocity_scales_with_fiedler_gain():
    p = make_constraints(d_com_max=10.0, d_com_ramp=2.0, lambda2_min=0.05)
    region = open_space_region()
    positions = [np.array([0.0, 0.0]), np.array([9.0, 0.0])]
    state = build_connectivity_state(positions, [region, region], p)
    u = connectivity_velocity(0, state, p)
    lam2 = state.lambda2
    for fake_lam in (lam2 + 0.5, lam2 + 2.0):
        import dataclasses

        faked = dataclasses.replace(state, lambda2=fake_lam)
        u_fake = connectivity_velocity(0, faked, p)
        ratio = (lam2 - p.lambda2_min) ** 2 / (fake_lam - p.lambda2_min) ** 2
        assert np.allclose(u_fake, u * ratio, rtol=1e-12)


def test_gain_saturation_clamped():
    p = make_constraints(lambda2_min=0.05, lambda2_eps=1e-3)
    gain, sat = fiedler_gain(0.05 + 1e-4, p)
    assert sat and gain == pytest.approx(1e6)
    gain, sat = fiedler_gain(0.0, p)
    assert sat and gain == pytest.approx(1e6)
    gain, sat = fiedler_gain(1.0, p)
    assert not sat
    assert gain == pytest.approx(1.0 / (1.0 - 0.05) ** 2)


# ------------------------------------------------------------- gradients

def test_pair_gradient_product_rule_matches_fd(rng):
    """Frozen-region finite differences against the analytic product rule.

    The far-side evaluation is pinned (its region is frozen, per the stated
    differentiation convention) and kept off the pair minimum so the LoS term
    differentiates through the near side only. Radial reshaping is disabled:
    the chase term deliberately bends the field away from the true gradient.
    """
    p = make_constraints()
    # region boundary at ~13 m puts the LoS ramp inside the communication
    # fade band, so the alpha and beta derivatives are both exercised
    region = open_space_region(lidar_range=13.0)
    q_j = np.zeros(2)
    far = LosEvaluation(distance=25.0, argmin_edge=0, gradient=np.array([1.0, 0.0]), inside=True)

    def weight_of(q):
        ev_ji = los_distance(region, q - q_j)
        return pair_terms(q, q_j, ev_ji, far, p, reshape_beta=False)[3]

    checked = 0
    attempts = 0
    while checked < 60:
        attempts += 1
        assert attempts < 5000, "could not find enough test configurations"
        q = rng.uniform(-1, 1, 2)
        q = q / np.linalg.norm(q) * rng.uniform(11.95, 12.75)
        ev_ji = los_distance(region, q - q_j)
        d_pair = ev_ji.distance
        # keep clear of the beta kinks and alpha/gamma corners
        if not (0.2 < d_pair < 1.1):
            continue
        grad = pair_terms(q, q_j, ev_ji, far, p, reshape_beta=False)[4]
        h = 1e-6
        fd = np.array(
            [
                (weight_of(q + [h, 0]) - weight_of(q - [h, 0])) / (2 * h),
                (weight_of(q + [0, h]) - weight_of(q - [0, h])) / (2 * h),
            ]
        )
        if np.linalg.norm(fd) < 1e-9:
            continue
        assert np.linalg.norm(grad - fd) / np.linalg.norm(fd) < 1e-4
        checked += 1


def test_action_reaction_of_distance_factors():
    """The alpha/gamma (pure inter-distance) gradient contributions on the
    two robots are equal and opposite."""
    p = make_constraints(d_com_max=10.0, d_com_ramp=2.0)
    region = open_space_region()
    # communication fade band: alpha' != 0, beta on plateau, gamma plateau
    positions = [np.array([0.0, 0.0]), np.array([9.0, 0.0])]
    state = build_connectivity_state(positions, [region, region], p)
    assert np.allclose(state.grads[(0, 1)], -state.grads[(1, 0)], atol=1e-12)
    # collision band: gamma' != 0 (beta plateau in open space)
    positions = [np.array([0.0, 0.0]), np.array([0.7, 0.0])]
    state = build_connectivity_state(positions, [region, region], p)
    assert state.factors[(0, 1)][2] < 1.0
    assert np.allclose(state.grads[(0, 1)], -state.grads[(1, 0)], atol=1e-12)
