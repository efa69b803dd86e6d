"""Shared scene builders for the test suite."""

import math

import numpy as np
import pytest

from sightline.connectivity import ConstraintParams
from sightline.geometry import FlipConfig, approx_visible_region, augment_scan, flipped_convex_hull
from sightline.losdist import LosParams
from sightline.world import SimConfig, WorldModel, raycast_lidar


def make_constraints(**kw) -> ConstraintParams:
    base = dict(d_com_max=15.0, d_coll_min=0.3, los=LosParams(0.1, 1.2, 1.0), lambda2_min=0.05)
    base.update(kw)
    return ConstraintParams(**base)


def make_sim_config(**kw) -> SimConfig:
    base = dict(
        constraints=make_constraints(),
        flip=FlipConfig(r_flip=150.0),
        beam_count=360,
        lidar_range=30.0,
    )
    base.update(kw)
    return SimConfig(**base)


def random_convex_obstacle(rng, center, radius) -> np.ndarray:
    """Convex blob: hull of a small point cloud around center."""
    n = rng.integers(4, 9)
    ang = np.sort(rng.uniform(0, 2 * math.pi, n))
    r = rng.uniform(0.4 * radius, radius, n)
    return np.column_stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)])


def random_world(rng, n_obstacles=8, half_w=18.0, half_h=12.0, keepout=2.0) -> WorldModel:
    """Cluttered rectangle with a clear disc of `keepout` around the origin."""
    obstacles = []
    tries = 0
    while len(obstacles) < n_obstacles and tries < 500:
        tries += 1
        c = rng.uniform([-half_w + 2, -half_h + 2], [half_w - 2, half_h - 2])
        radius = rng.uniform(0.6, 1.6)
        if np.linalg.norm(c) < keepout + radius + 0.5:
            continue
        obstacles.append(random_convex_obstacle(rng, c, radius))
    return WorldModel(
        obstacles=obstacles,
        bounds=[-half_w, -half_h, half_w, half_h],
        targets=np.zeros((0, 2)),
    )


def scan_from_world(world, pose, cfg: SimConfig):
    return raycast_lidar(world, pose, cfg)


def build_scene(rng, flip_cfg: FlipConfig, n_obstacles=8, beam_count=360):
    """Random cluttered world -> scan at the origin -> hull + region."""
    cfg = make_sim_config(beam_count=beam_count, flip=flip_cfg)
    world = random_world(rng, n_obstacles=n_obstacles)
    scan = raycast_lidar(world, np.zeros(2), cfg)
    aug = augment_scan(scan, cfg.gap_threshold)
    hull = flipped_convex_hull(aug, flip_cfg)
    region = approx_visible_region(hull, flip_cfg)
    return world, scan, hull, region


def sample_region_points(region, rng, n):
    """Uniform samples inside a star-convex (around the origin) polygon via
    its triangle fan."""
    v = region.vertices
    w = np.roll(v, -1, axis=0)
    areas = 0.5 * np.abs(v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0])
    probs = areas / areas.sum()
    ks = rng.choice(len(v), size=n, p=probs)
    u = rng.uniform(0, 1, n)
    t = rng.uniform(0, 1, n)
    flip = u + t > 1.0
    u[flip] = 1.0 - u[flip]
    t[flip] = 1.0 - t[flip]
    return u[:, None] * v[ks] + t[:, None] * w[ks]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
