#!/usr/bin/env python3
"""Regenerate the checked-in scenario files. Deterministic; run from the repo
root: python3 scenarios/make_worlds.py"""

import json
import math
from pathlib import Path

import numpy as np

OUT = Path(__file__).parent

SIM_DEFAULTS = {
    "dt": 0.1,
    "u_max": 1.0,
    "beam_count": 720,
    "lidar_range": 30.0,
    "neighbor_cull_radius": 0.5,
    "strategy": "topo-opt",
    "metric": "d_los_approx",
    "r_flip": 150.0,
    "lse_alpha": 10.0,
    "delta_theta_deg": 1.0,
    "d_com_max": 15.0,
    "d_coll_min": 0.3,
    "d_los_min": 0.1,
    "d_los_max": 1.2,
    "k_beta": 1.0,
    "lambda2_min": 0.05,
    "lambda2_eps": 0.001,
    "capture_radius": 0.3,
}

UNITS = {
    "length": "meters",
    "time": "seconds",
    "angle": "degrees in *_deg fields",
    "speed": "meters/second",
}


def convex_blob(rng, center, radius):
    n = int(rng.integers(4, 8))
    while True:
        ang = np.sort(rng.uniform(0, 2 * math.pi, n))
        gaps = np.diff(ang, append=ang[0] + 2 * math.pi)
        if gaps.min() > 0.3:  # no sliver wedges
            break
    r = rng.uniform(0.5 * radius, radius, n)
    pts = np.column_stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)])
    return np.round(pts, 3)


def scatter_obstacles(rng, count, x_range, y_range, min_gap, keep_clear):
    """Random blobs with pairwise center gaps and keep-clear discs."""
    placed = []
    tries = 0
    while len(placed) < count and tries < 4000:
        tries += 1
        c = np.array([rng.uniform(*x_range), rng.uniform(*y_range)])
        radius = float(rng.uniform(0.6, 1.3))
        if any(np.linalg.norm(c - p) < r + radius + min_gap for p, r in placed):
            continue
        if any(np.linalg.norm(c - k) < radius + clear for k, clear in keep_clear):
            continue
        placed.append((c, radius))
    return [convex_blob(rng, c, r) for c, r in placed]


def write(name, data):
    path = OUT / f"{name}.json"
    path.write_text(json.dumps(data, indent=2) + "\n")
    print(f"wrote {path}")


def open_two():
    return {
        "schema": "sightline.scenario/1",
        "name": "open-two",
        "units": UNITS,
        "world": {
            "bounds": [-25, -20, 25, 20],
            "obstacles": [],
            "targets": [[12.0, 0.0], [12.0, 4.0]],
        },
        "robots": [
            {"id": 0, "start": [-10.0, 0.0], "role": "tasked", "target": 0},
            {"id": 1, "start": [-10.0, 4.0], "role": "tasked", "target": 1},
        ],
        "sim": dict(SIM_DEFAULTS, beam_count=360),
        "max_ticks": 600,
        "seeds": [0],
    }


def cluttered():
    rng = np.random.default_rng(20240917)
    starts = [[-18.0, -4.5], [-18.0, -1.5], [-18.0, 1.5], [-18.0, 4.5]]
    keep_clear = [(np.array(s), 2.5) for s in starts]
    obstacles = scatter_obstacles(
        rng, 14, (-12.0, 18.0), (-11.5, 11.5), 3.2, keep_clear
    )
    return {
        "schema": "sightline.scenario/1",
        "name": "cluttered",
        "units": UNITS,
        "world": {
            "bounds": [-22, -15, 22, 15],
            "obstacles": [o.tolist() for o in obstacles],
            "targets": [[14.0, -4.0], [14.0, 0.0], [14.0, 4.0], [10.0, 8.0]],
        },
        "robots": [
            {"id": i, "start": starts[i], "role": "tasked", "target": i}
            for i in range(4)
        ],
        "sim": dict(SIM_DEFAULTS),
        "max_ticks": 1500,
        "seeds": [0, 1, 2, 3, 4],
        "randomize_targets": True,
    }


def teleop():
    rng = np.random.default_rng(7151)
    starts = [[-8.0, 0.0], [-8.0, 3.0], [-8.0, -3.0]]
    keep_clear = [(np.array(s), 2.5) for s in starts]
    obstacles = scatter_obstacles(rng, 6, (-4.0, 10.0), (-8.0, 8.0), 3.5, keep_clear)
    return {
        "schema": "sightline.scenario/1",
        "name": "teleop",
        "units": UNITS,
        "world": {
            "bounds": [-16, -12, 16, 12],
            "obstacles": [o.tolist() for o in obstacles],
            "targets": [],
        },
        "robots": [
            {"id": 0, "start": starts[0], "role": "tasked", "leader": True},
            {"id": 1, "start": starts[1], "role": "free"},
            {"id": 2, "start": starts[2], "role": "free"},
        ],
        "sim": dict(SIM_DEFAULTS, beam_count=360, d_com_max=12.0),
        "max_ticks": 100000,
        "seeds": [0],
    }


if __name__ == "__main__":
    write("open-two", open_two())
    write("cluttered", cluttered())
    write("teleop", teleop())
