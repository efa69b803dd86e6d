"""Simulated world: polygon obstacles, LiDAR ray-casting, robot kinematics
and the per-tick control loop wiring scans -> regions -> weights -> topology
-> velocities -> motion.

Robots are omnidirectional points without heading, so local frames differ
from the global frame by translation only.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import _kernels
from .connectivity import (
    BetaEval,
    ConnectivityState,
    ConstraintParams,
    build_connectivity_state,
    connectivity_velocity,
    fiedler_gain,
    gamma_potential,
    pair_terms,
)
from .geometry import (
    FlipConfig,
    FlippedHull,
    Scan,
    VisibleRegionPolygon,
    approx_visible_region,
    augment_scan,
    d_hull_logsumexp,
    flipped_convex_hull,
    hull_face_distances,
    ring_scan,
)
from .losdist import LosEvaluation, los_distance
from .topology import apply_topology_mask, plan_topology

STRATEGIES = ("fixed-topology", "laplacian", "topo-opt")
METRICS = ("d_hull", "d_hull_cos", "d_los_approx")


@dataclass
class WorldModel:
    """Static environment: simple polygon obstacles, bounding rectangle and
    the target points to visit."""

    obstacles: List[np.ndarray]
    bounds: np.ndarray  # (xmin, ymin, xmax, ymax)
    targets: np.ndarray  # (M, 2)

    def __post_init__(self):
        self.obstacles = [
            np.ascontiguousarray(np.asarray(o, dtype=np.float64).reshape(-1, 2))
            for o in self.obstacles
        ]
        self.bounds = np.asarray(self.bounds, dtype=np.float64).reshape(4)
        self.targets = np.asarray(self.targets, dtype=np.float64).reshape(-1, 2)
        self._segments = None

    def segments(self) -> np.ndarray:
        """All obstacle edges as (S, 4) rows (x1, y1, x2, y2)."""
        if self._segments is None:
            rows = []
            for poly in self.obstacles:
                nxt = np.roll(poly, -1, axis=0)
                rows.append(np.hstack([poly, nxt]))
            self._segments = (
                np.vstack(rows) if rows else np.zeros((0, 4), dtype=np.float64)
            )
        return self._segments

    def clearance(self, point) -> float:
        """Distance to the nearest obstacle; negative inside one."""
        p = np.asarray(point, dtype=np.float64)
        best = math.inf
        for poly in self.obstacles:
            d, _, _ = _kernels.polygon_distance(poly, float(p[0]), float(p[1]))
            if _kernels.polygon_contains(poly, float(p[0]), float(p[1])):
                d = -d
            best = min(best, d)
        return best

    def in_free_space(self, point) -> bool:
        return self.clearance(point) > 0.0

    def in_bounds(self, point) -> bool:
        p = np.asarray(point, dtype=np.float64)
        return bool(
            self.bounds[0] <= p[0] <= self.bounds[2]
            and self.bounds[1] <= p[1] <= self.bounds[3]
        )


@dataclass
class RobotState:
    id: int
    position: np.ndarray
    target: Optional[int] = None
    target_reached: bool = False
    role: str = "tasked"  # tasked | free
    k_c: float = 1.0
    k_n: float = 1.0
    leader: bool = False
    last_command: np.ndarray = field(default_factory=lambda: np.zeros(2))
    stall_ticks: int = 0
    escape_hold: int = 0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).reshape(2)
        if self.role == "free":
            self.k_n = 0.0


@dataclass
class SimConfig:
    constraints: ConstraintParams
    flip: FlipConfig
    dt: float = 0.1
    u_max: float = 1.0
    beam_count: int = 720
    lidar_range: float = 30.0
    neighbor_cull_radius: float = 0.5
    rng_seed: int = 0
    strategy: str = "topo-opt"
    metric: str = "d_los_approx"
    gap_threshold: Optional[float] = None
    capture_radius: float = 0.3
    topo_dwell_ticks: int = 0  # 0 = replan the tree every tick
    reshape_beta: bool = True

    def __post_init__(self):
        if self.dt <= 0 or self.u_max <= 0:
            raise ValueError("dt and u_max must be positive")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.gap_threshold is None:
            self.gap_threshold = 2.0 * (2.0 * math.pi / self.beam_count)


@dataclass
class WorldState:
    world: WorldModel
    robots: List[RobotState]
    tick_index: int = 0
    clock: float = 0.0
    fixed_tree: Optional[frozenset] = None
    current_tree: Optional[frozenset] = None
    tree_age: int = 0
    visited_ticks: Dict[int, int] = field(default_factory=dict)

    @property
    def positions(self) -> List[np.ndarray]:
        return [r.position for r in self.robots]


@dataclass
class TickRecord:
    tick: int
    lambda2: float  # controller-side (masked) value; NaN for a single robot
    lambda2_full: float  # unmasked weight matrix
    edge_count: int
    edges: List[Tuple[int, int, float, float, float, float, bool]]
    positions: np.ndarray  # (R, 2) pre-step, the poses scans were taken at
    u_c: np.ndarray
    u_n: np.ndarray
    u_cmd: np.ndarray  # fused + clamped command actually issued
    saturated: bool
    events: List[str]
    regions: Optional[List[np.ndarray]] = None  # local-frame polygons if kept


def raycast_lidar(world: WorldModel, pose, cfg: SimConfig) -> Scan:
    """360-degree scan from `pose`: evenly spaced bearings, nearest obstacle
    hit per beam, beams beyond lidar_range return nothing."""
    pose = np.asarray(pose, dtype=np.float64)
    if world.clearance(pose) <= 0.0:
        raise ValueError("LiDAR pose inside an obstacle")
    bearings = 2.0 * math.pi * np.arange(cfg.beam_count) / cfg.beam_count
    dirs = np.ascontiguousarray(np.column_stack([np.cos(bearings), np.sin(bearings)]))
    segs = world.segments()
    if segs.shape[0]:
        local = segs.copy()
        local[:, 0] -= pose[0]
        local[:, 1] -= pose[1]
        local[:, 2] -= pose[0]
        local[:, 3] -= pose[1]
    else:
        local = segs
    ranges = _kernels.raycast(local, dirs, cfg.lidar_range)
    hit = np.isfinite(ranges)
    pts = ranges[hit, None] * dirs[hit]
    return Scan.from_points(pts, cfg.lidar_range, cfg.beam_count)


def remove_neighbor_points(scan: Scan, neighbors, cull_radius: float) -> Scan:
    """Drop returns that hit neighboring robots (positions in sensor frame)."""
    if len(scan) == 0 or not len(neighbors):
        return scan
    pts = scan.points
    keep = np.ones(len(pts), dtype=bool)
    for nb in neighbors:
        nb = np.asarray(nb, dtype=np.float64)
        d2 = (pts[:, 0] - nb[0]) ** 2 + (pts[:, 1] - nb[1]) ** 2
        keep &= d2 > cull_radius * cull_radius
    if keep.all():
        return scan
    return Scan.from_points(pts[keep], scan.max_range, scan.beam_count)


def build_region(scan: Scan, cfg: SimConfig, robot_id: int = -1):
    """Augmented scan -> flipped hull -> interpolated polygon.

    An empty scan (open space everywhere) becomes a synthetic full ring at
    max range, which is exactly what augmentation would produce around any
    single return.
    """
    if len(scan) == 0:
        scan = ring_scan(cfg.lidar_range, cfg.gap_threshold, cfg.beam_count)
    aug = augment_scan(scan, cfg.gap_threshold)
    hull = flipped_convex_hull(aug, cfg.flip)
    region = approx_visible_region(hull, cfg.flip, robot_id=robot_id)
    return hull, region


def navigation_velocity(
    robot: RobotState, scan: Scan, target, cfg: SimConfig
) -> np.ndarray:
    """Reactive goal seeking: capped attraction to the target plus repulsion
    from the nearest scan return inside the collision band, with a tangential
    nudge when the obstacle sits straight on the goal line."""
    if robot.role != "tasked" or target is None or robot.target_reached:
        return np.zeros(2)
    p = cfg.constraints
    att = np.asarray(target, dtype=np.float64) - robot.position
    att_norm = float(np.linalg.norm(att))
    if att_norm == 0.0:
        return np.zeros(2)
    att_hat = att / att_norm
    u = cfg.u_max * (att if att_norm <= 1.0 else att_hat)
    if len(scan) > 0:
        ranges = scan.ranges
        k = int(np.argmin(ranges))
        d_obs = float(ranges[k])
        trigger = p.d_coll_min + p.d_coll_ramp
        if d_obs < trigger:
            s = min(1.0, (trigger - d_obs) / p.d_coll_ramp)
            obs_hat = scan.points[k] / d_obs
            u = u - cfg.u_max * s * obs_hat
            if float(obs_hat @ att_hat) > 0.95:
                # head-on blockage: steer around the side the goal leans to
                side = 1.0 if (obs_hat[0] * att[1] - obs_hat[1] * att[0]) >= 0.0 else -1.0
                u = u + cfg.u_max * s * side * np.array([-obs_hat[1], obs_hat[0]])
    norm = float(np.linalg.norm(u))
    if norm > cfg.u_max:
        u = u * (cfg.u_max / norm)
    return u


def fuse_and_clamp(robot: RobotState, u_c, u_n, cfg: SimConfig) -> np.ndarray:
    u = robot.k_c * np.asarray(u_c) + robot.k_n * np.asarray(u_n)
    norm = float(np.linalg.norm(u))
    if norm > cfg.u_max:
        u = u * (cfg.u_max / norm)
    return u


STALL_TRIGGER_TICKS = 15
ESCAPE_HOLD_TICKS = 60


def fuse_with_escape(robot: RobotState, u_c, u_n, cfg: SimConfig) -> np.ndarray:
    """Velocity fusion plus stall escape.

    A goal-seeking robot whose fused command nearly vanishes while its
    navigation term still pulls is trapped in a force equilibrium (typically
    a binding LoS constraint near an obstacle shadow). After a dwell it
    temporarily blends a fixed-handed tangential slide into the navigation
    direction, which walks it around the blocking constraint; the
    connectivity term stays active throughout.
    """
    u = fuse_and_clamp(robot, u_c, u_n, cfg)
    un_norm = float(np.linalg.norm(u_n))
    seeking = (
        robot.role == "tasked"
        and robot.target is not None
        and not robot.target_reached
        and robot.k_n > 0.0
        and un_norm > 0.3 * cfg.u_max
    )
    if not seeking:
        robot.stall_ticks = 0
        robot.escape_hold = 0
        return u
    if robot.escape_hold > 0:
        robot.escape_hold -= 1
        n_hat = np.asarray(u_n) / un_norm
        slide = np.array([-n_hat[1], n_hat[0]])  # counter-clockwise tangent
        u_escape = cfg.u_max * (0.4 * n_hat + slide)
        u_escape *= cfg.u_max / float(np.linalg.norm(u_escape))
        return fuse_and_clamp(robot, u_c, u_escape, cfg)
    if float(np.linalg.norm(u)) < 0.2 * cfg.u_max:
        robot.stall_ticks += 1
        if robot.stall_ticks >= STALL_TRIGGER_TICKS:
            robot.stall_ticks = 0
            robot.escape_hold = ESCAPE_HOLD_TICKS
    else:
        robot.stall_ticks = 0
    return u


def step(state: WorldState, commands: List[np.ndarray], cfg: SimConfig) -> List[str]:
    """Apply fused commands: displacement clamp, obstacle/robot clearance
    rejection (position held, not slid), target capture, clock advance."""
    p = cfg.constraints
    events: List[str] = []
    old = [r.position.copy() for r in state.robots]
    cand = []
    for r, u in zip(state.robots, commands):
        disp = np.asarray(u, dtype=np.float64) * cfg.dt
        dn = float(np.linalg.norm(disp))
        if dn > cfg.u_max * cfg.dt:
            disp = disp * (cfg.u_max * cfg.dt / dn)
        cand.append(r.position + disp)
    held = [False] * len(cand)
    for i, c in enumerate(cand):
        if state.world.clearance(c) < p.d_coll_min:
            held[i] = True
            events.append(f"reject tick={state.tick_index} robot={i} cause=obstacle")
    changed = True
    while changed:
        changed = False
        eff = [old[i] if held[i] else cand[i] for i in range(len(cand))]
        for i in range(len(cand)):
            for j in range(i + 1, len(cand)):
                if held[i] and held[j]:
                    continue
                if float(np.linalg.norm(eff[i] - eff[j])) < p.d_coll_min:
                    for k in (i, j):
                        if not held[k]:
                            held[k] = True
                            events.append(
                                f"reject tick={state.tick_index} robot={k} cause=contact"
                            )
                    changed = True
    for i, r in enumerate(state.robots):
        r.last_command = np.asarray(commands[i], dtype=np.float64)
        if not held[i]:
            r.position = cand[i]
        if r.target is not None and not r.target_reached:
            tgt = state.world.targets[r.target]
            if float(np.linalg.norm(r.position - tgt)) <= cfg.capture_radius:
                r.target_reached = True
                state.visited_ticks[r.target] = state.tick_index
                events.append(f"visited tick={state.tick_index} robot={i} target={r.target}")
    state.tick_index += 1
    state.clock += cfg.dt
    return events


def _baseline_beta_eval(hulls: List[FlippedHull], cfg: SimConfig) -> BetaEval:
    """d_hull-style metrics behind the same evaluation interface; gradients by
    central differences (1e-6)."""

    def metric(owner: int, q: np.ndarray) -> float:
        val = d_hull_logsumexp(hulls[owner], q, cfg.flip.lse_alpha)
        if cfg.metric == "d_hull_cos":
            d = hull_face_distances(hulls[owner], q)
            k = int(np.argmax(d))
            q_hat = q / float(np.linalg.norm(q))
            val *= abs(float(q_hat @ hulls[owner].face_normals[k]))
        return val

    def ev(owner: int, q_local: np.ndarray) -> LosEvaluation:
        q = np.asarray(q_local, dtype=np.float64)
        value = metric(owner, q)
        h = 1e-6
        gx = (metric(owner, q + [h, 0.0]) - metric(owner, q - [h, 0.0])) / (2 * h)
        gy = (metric(owner, q + [0.0, h]) - metric(owner, q - [0.0, h])) / (2 * h)
        return LosEvaluation(
            distance=value, argmin_edge=-1, gradient=np.array([gx, gy]), inside=value > 0.0
        )

    return ev


def tick(
    state: WorldState,
    cfg: SimConfig,
    leader_cmd: Optional[np.ndarray] = None,
    collect_regions: bool = False,
    audit: bool = False,
) -> TickRecord:
    """One full control cycle.

    scan -> cull neighbor hits -> augment -> hull -> region -> pairwise
    weights (one-hop) -> strategy-dependent masking -> Fiedler pair ->
    connectivity + navigation velocities -> fused step.
    """
    world = state.world
    robots = state.robots
    r_count = len(robots)
    p = cfg.constraints
    positions = [r.position.copy() for r in robots]

    raw_scans: List[Scan] = []
    hulls: List[FlippedHull] = []
    regions: List[VisibleRegionPolygon] = []
    for i, r in enumerate(robots):
        raw = raycast_lidar(world, positions[i], cfg)
        neighbors = [positions[j] - positions[i] for j in range(r_count) if j != i]
        culled = remove_neighbor_points(raw, neighbors, cfg.neighbor_cull_radius)
        hull, region = build_region(culled, cfg, robot_id=r.id)
        raw_scans.append(raw)
        hulls.append(hull)
        regions.append(region)

    beta_eval = None
    if cfg.metric != "d_los_approx":
        beta_eval = _baseline_beta_eval(hulls, cfg)
    conn = build_connectivity_state(
        positions, regions, p, beta_eval=beta_eval, reshape_beta=cfg.reshape_beta
    )

    events: List[str] = []
    tree = None
    if r_count >= 2 and cfg.strategy != "laplacian":
        if cfg.strategy == "fixed-topology":
            if state.fixed_tree is None:
                plan = plan_topology(conn, positions, p)
                state.fixed_tree = plan.tree_edges
                if not plan.spanning:
                    events.append(f"forest tick={state.tick_index}")
            tree = state.fixed_tree
        else:  # topo-opt
            if (
                state.current_tree is None
                or cfg.topo_dwell_ticks == 0
                or state.tree_age >= cfg.topo_dwell_ticks
            ):
                plan = plan_topology(conn, positions, p)
                if not plan.spanning:
                    events.append(f"forest tick={state.tick_index}")
                state.current_tree = plan.tree_edges
                state.tree_age = 0
            else:
                state.tree_age += 1
            tree = state.current_tree
        ctrl = apply_topology_mask(conn, tree, positions, p)
    else:
        ctrl = conn

    saturated = False
    u_c = np.zeros((r_count, 2))
    if r_count >= 2:
        _, saturated = fiedler_gain(ctrl.lambda2, p)
        if saturated:
            events.append(f"saturation tick={state.tick_index} lambda2={ctrl.lambda2!r}")
        for i in range(r_count):
            u_c[i] = connectivity_velocity(i, ctrl, p)

    u_n = np.zeros((r_count, 2))
    for i, r in enumerate(robots):
        if r.leader and leader_cmd is not None:
            u_n[i] = np.asarray(leader_cmd, dtype=np.float64)
        elif r.target is not None:
            u_n[i] = navigation_velocity(r, raw_scans[i], world.targets[r.target], cfg)

    commands = [fuse_with_escape(robots[i], u_c[i], u_n[i], cfg) for i in range(r_count)]

    if audit and r_count >= 2:
        audit_one_hop(positions, regions, hulls, ctrl, tree, u_c, cfg)

    edges = []
    edge_count = 0
    for i in range(r_count):
        for j in range(i + 1, r_count):
            alpha, beta, gamma = conn.factors[(i, j)]
            w = float(ctrl.weights[i, j])
            in_tree = tree is not None and (i, j) in tree
            if w > 0.0:
                edge_count += 1
            if alpha > 0.0 or gamma < 1.0 or w > 0.0:
                edges.append((i, j, alpha, beta, gamma, w, in_tree))

    tick_idx = state.tick_index
    step_events = step(state, commands, cfg)
    events.extend(step_events)

    return TickRecord(
        tick=tick_idx,
        lambda2=ctrl.lambda2,
        lambda2_full=conn.lambda2,
        edge_count=edge_count,
        edges=edges,
        positions=np.asarray(positions),
        u_c=u_c,
        u_n=u_n,
        u_cmd=np.asarray(commands),
        saturated=saturated,
        events=events,
        regions=[r.vertices for r in regions] if collect_regions else None,
    )


def audit_one_hop(
    positions,
    regions,
    hulls,
    ctrl: ConnectivityState,
    tree,
    u_c: np.ndarray,
    cfg: SimConfig,
) -> None:
    """Recompute every robot's connectivity velocity from exactly the data it
    is allowed to see - its own scan products, the poses/regions of robots
    within d_com_max, and the team-level Fiedler pair plus incident tree
    flags - and require bitwise equality with the pipeline's output."""
    p = cfg.constraints
    r_count = len(positions)
    beta_eval = None
    if cfg.metric != "d_los_approx":
        beta_eval = _baseline_beta_eval(hulls, cfg)
    for i in range(r_count):
        gain, _ = fiedler_gain(ctrl.lambda2, p)
        total = np.zeros(2)
        for j in range(r_count):
            if j == i:
                continue
            d = float(np.linalg.norm(positions[i] - positions[j]))
            if d > p.d_com_max:
                continue  # robot j is invisible to i this tick
            if beta_eval is not None:
                ev_ji = beta_eval(j, positions[i] - positions[j])
                ev_ij = beta_eval(i, positions[j] - positions[i])
            else:
                ev_ji = los_distance(regions[j], positions[i] - positions[j])
                ev_ij = los_distance(regions[i], positions[j] - positions[i])
            alpha, beta, gamma, weight, grad_i, _ = pair_terms(
                positions[i], positions[j], ev_ji, ev_ij, p, cfg.reshape_beta
            )
            pair = (i, j) if i < j else (j, i)
            if tree is not None:
                if pair in tree:
                    masked_w, masked_grad = weight, grad_i
                elif gamma < 1.0:
                    _, dgamma = gamma_potential(d, p)
                    masked_w = gamma
                    masked_grad = dgamma * (positions[i] - positions[j]) / d
                else:
                    masked_w, masked_grad = 0.0, np.zeros(2)
            else:
                masked_w, masked_grad = weight, grad_i
            if masked_w > 0.0 or gamma < 1.0:
                diff = ctrl.v2[i] - ctrl.v2[j]
                total += masked_grad * (diff * diff)
        recomputed = gain * total
        if not np.array_equal(recomputed, u_c[i]):
            raise AssertionError(
                f"one-hop audit mismatch for robot {i}: {recomputed} vs {u_c[i]}"
            )
