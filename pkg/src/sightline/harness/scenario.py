"""Scenario files: a self-describing JSON schema with explicit units, loaded
into world + robots + config, validated hard at load time (including that the
tick-0 connectivity graph is actually connected)."""

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List

import numpy as np

from ..connectivity import ConstraintParams, build_connectivity_state
from ..geometry import FlipConfig
from ..losdist import LosParams
from ..world import (
    RobotState,
    SimConfig,
    WorldModel,
    WorldState,
    build_region,
    raycast_lidar,
    remove_neighbor_points,
)

SCENARIO_SCHEMA = "sightline.scenario/1"

UNITS = {
    "length": "meters",
    "time": "seconds",
    "angle": "degrees in *_deg fields, radians internally",
    "speed": "meters/second",
}


class ScenarioError(ValueError):
    """Scenario file rejected; message carries the offending JSON path."""


@dataclass
class Scenario:
    name: str
    world: WorldModel
    robot_specs: List[dict]
    sim: SimConfig
    max_ticks: int
    seeds: List[int]
    randomize_targets: bool = False

    def make_robots(self) -> List[RobotState]:
        robots = []
        for spec in self.robot_specs:
            robot = RobotState(
                id=spec["id"],
                position=np.array(spec["start"], dtype=np.float64),
                target=spec.get("target"),
                role=spec.get("role", "tasked"),
                leader=spec.get("leader", False),
            )
            # role presets are overridable per robot
            if "k_c" in spec:
                robot.k_c = float(spec["k_c"])
            if "k_n" in spec:
                robot.k_n = float(spec["k_n"])
            robots.append(robot)
        return robots

    def make_state(self) -> WorldState:
        world = WorldModel(
            obstacles=[o.copy() for o in self.world.obstacles],
            bounds=self.world.bounds.copy(),
            targets=self.world.targets.copy(),
        )
        return WorldState(world=world, robots=self.make_robots())

    def with_sim(self, sim: SimConfig) -> "Scenario":
        return replace(self, sim=sim)


def _require(cond: bool, path: str, message: str):
    if not cond:
        raise ScenarioError(f"{path}: {message}")


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _check_simple_polygon(poly: np.ndarray, path: str):
    n = poly.shape[0]
    _require(n >= 3, path, "polygon needs at least 3 vertices")
    for i in range(n):
        a1, a2 = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = poly[j], poly[(j + 1) % n]
            _require(
                not _segments_intersect(a1, a2, b1, b2),
                path,
                f"polygon self-intersects (edges {i} and {j})",
            )


def build_sim_config(sim: dict, path: str = "sim") -> SimConfig:
    known = {
        "dt", "u_max", "beam_count", "lidar_range", "neighbor_cull_radius",
        "strategy", "metric", "r_flip", "lse_alpha", "delta_theta_deg",
        "gap_threshold_deg", "d_com_max", "d_com_ramp", "d_coll_min",
        "d_coll_ramp", "d_los_min", "d_los_max", "k_beta", "lambda2_min",
        "lambda2_eps", "capture_radius", "topo_dwell_ticks", "reshape_beta",
    }
    unknown = set(sim) - known
    _require(not unknown, path, f"unknown keys {sorted(unknown)}")
    try:
        los = LosParams(
            d_los_min=sim.get("d_los_min", 0.1),
            d_los_max=sim.get("d_los_max", 1.2),
            k_beta=sim.get("k_beta", 1.0),
        )
        constraints = ConstraintParams(
            d_com_max=sim.get("d_com_max", 15.0),
            d_coll_min=sim.get("d_coll_min", 0.3),
            d_com_ramp=sim.get("d_com_ramp"),
            d_coll_ramp=sim.get("d_coll_ramp"),
            los=los,
            lambda2_min=sim.get("lambda2_min", 0.05),
            lambda2_eps=sim.get("lambda2_eps", 1e-3),
        )
        flip = FlipConfig(
            r_flip=sim.get("r_flip", 150.0),
            lse_alpha=sim.get("lse_alpha", 10.0),
            delta_theta=math.radians(sim.get("delta_theta_deg", 1.0)),
        )
        gap = sim.get("gap_threshold_deg")
        return SimConfig(
            constraints=constraints,
            flip=flip,
            dt=sim.get("dt", 0.1),
            u_max=sim.get("u_max", 1.0),
            beam_count=sim.get("beam_count", 720),
            lidar_range=sim.get("lidar_range", 30.0),
            neighbor_cull_radius=sim.get("neighbor_cull_radius", 0.5),
            strategy=sim.get("strategy", "topo-opt"),
            metric=sim.get("metric", "d_los_approx"),
            gap_threshold=math.radians(gap) if gap is not None else None,
            capture_radius=sim.get("capture_radius", 0.3),
            topo_dwell_ticks=sim.get("topo_dwell_ticks", 0),
            reshape_beta=sim.get("reshape_beta", True),
        )
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def tick_zero_lambda2(scenario: "Scenario") -> float:
    """Fiedler eigenvalue of the full weight matrix at the start poses."""
    state = scenario.make_state()
    cfg = scenario.sim
    positions = state.positions
    regions = []
    for i in range(len(positions)):
        raw = raycast_lidar(state.world, positions[i], cfg)
        neighbors = [positions[j] - positions[i] for j in range(len(positions)) if j != i]
        culled = remove_neighbor_points(raw, neighbors, cfg.neighbor_cull_radius)
        _, region = build_region(culled, cfg, robot_id=i)
        regions.append(region)
    conn = build_connectivity_state(positions, regions, cfg.constraints)
    return conn.lambda2


def scenario_from_dict(data: dict, name_fallback: str = "scenario") -> Scenario:
    _require(isinstance(data, dict), "$", "top level must be an object")
    _require(
        data.get("schema") == SCENARIO_SCHEMA,
        "schema",
        f"expected {SCENARIO_SCHEMA!r}, got {data.get('schema')!r}",
    )
    world_d = data.get("world")
    _require(isinstance(world_d, dict), "world", "missing world object")
    bounds = np.asarray(world_d.get("bounds", []), dtype=np.float64)
    _require(bounds.shape == (4,), "world.bounds", "need [xmin, ymin, xmax, ymax]")
    _require(
        bounds[0] < bounds[2] and bounds[1] < bounds[3],
        "world.bounds",
        "min must be below max",
    )
    obstacles = [np.asarray(o, dtype=np.float64) for o in world_d.get("obstacles", [])]
    for idx, poly in enumerate(obstacles):
        _require(
            poly.ndim == 2 and poly.shape[1] == 2,
            f"world.obstacles[{idx}]",
            "need a list of [x, y] vertices",
        )
        _check_simple_polygon(poly, f"world.obstacles[{idx}]")
    targets = np.asarray(world_d.get("targets", []), dtype=np.float64).reshape(-1, 2)
    world = WorldModel(obstacles=obstacles, bounds=bounds, targets=targets)

    sim = build_sim_config(data.get("sim", {}))

    for m, tgt in enumerate(targets):
        _require(world.in_bounds(tgt), f"world.targets[{m}]", "target outside bounds")
        _require(
            world.in_free_space(tgt), f"world.targets[{m}]", "target inside an obstacle"
        )

    robots = data.get("robots")
    _require(isinstance(robots, list) and robots, "robots", "need at least one robot")
    seen_ids = set()
    leaders = 0
    for k, spec in enumerate(robots):
        path = f"robots[{k}]"
        _require(isinstance(spec, dict), path, "robot must be an object")
        _require("id" in spec and "start" in spec, path, "need id and start")
        _require(spec["id"] not in seen_ids, path, "duplicate robot id")
        seen_ids.add(spec["id"])
        start = np.asarray(spec["start"], dtype=np.float64)
        _require(start.shape == (2,), f"{path}.start", "need [x, y]")
        _require(world.in_bounds(start), f"{path}.start", "start outside bounds")
        _require(
            world.clearance(start) >= sim.constraints.d_coll_min,
            f"{path}.start",
            "start closer than d_coll_min to an obstacle",
        )
        role = spec.get("role", "tasked")
        _require(role in ("tasked", "free"), f"{path}.role", "role must be tasked|free")
        tgt = spec.get("target")
        if tgt is not None:
            _require(
                isinstance(tgt, int) and 0 <= tgt < len(targets),
                f"{path}.target",
                "target index out of range",
            )
        leaders += bool(spec.get("leader", False))
    _require(leaders <= 1, "robots", "at most one leader")
    for a in range(len(robots)):
        for b in range(a + 1, len(robots)):
            d = float(
                np.linalg.norm(
                    np.asarray(robots[a]["start"], dtype=np.float64)
                    - np.asarray(robots[b]["start"], dtype=np.float64)
                )
            )
            _require(
                d >= sim.constraints.d_coll_min,
                f"robots[{b}].start",
                f"starts closer than d_coll_min to robot {robots[a]['id']}",
            )

    scenario = Scenario(
        name=data.get("name", name_fallback),
        world=world,
        robot_specs=robots,
        sim=sim,
        max_ticks=int(data.get("max_ticks", 1000)),
        seeds=list(data.get("seeds", [0])),
        randomize_targets=bool(data.get("randomize_targets", False)),
    )
    if len(robots) >= 2:
        lam2 = tick_zero_lambda2(scenario)
        _require(
            lam2 > 0.0,
            "robots",
            f"initial graph disconnected (tick-0 lambda2 = {lam2!r})",
        )
    return scenario


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"
        ) from exc
    return scenario_from_dict(data, name_fallback=path.stem)
