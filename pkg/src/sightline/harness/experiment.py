"""Batch experiment execution and metrics emission."""

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..world import SimConfig, TickRecord, WorldState, tick
from .scenario import Scenario

METRICS_SCHEMA = "sightline.metrics/1"
HISTOGRAM_SCHEMA = "sightline.edge-histogram/1"


@dataclass
class MetricsLog:
    name: str
    strategy: str
    metric: str
    seed: Optional[int]
    config: dict
    ticks: int = 0
    lambda2: List[float] = field(default_factory=list)
    lambda2_full: List[float] = field(default_factory=list)
    edge_counts: List[int] = field(default_factory=list)
    trajectories: List[np.ndarray] = field(default_factory=list)  # per tick (R, 2)
    command_norms: List[np.ndarray] = field(default_factory=list)  # per tick (R,)
    completion_ticks: Dict[int, int] = field(default_factory=dict)
    total_distance: Optional[np.ndarray] = None
    all_targets_reached: bool = False
    success: bool = False
    events: List[str] = field(default_factory=list)
    records: Optional[List[TickRecord]] = None

    def min_lambda2(self) -> float:
        return min(self.lambda2) if self.lambda2 else float("nan")

    def edge_histogram(self) -> Dict[int, int]:
        hist: Dict[int, int] = {}
        for c in self.edge_counts:
            hist[c] = hist.get(c, 0) + 1
        return hist

    def modal_edge_count(self) -> int:
        hist = self.edge_histogram()
        # most frequent count; ties resolve to the smaller count
        return min(sorted(hist), key=lambda c: (-hist[c], c))

    def summary(self) -> dict:
        return {
            "schema": METRICS_SCHEMA,
            "name": self.name,
            "strategy": self.strategy,
            "metric": self.metric,
            "seed": self.seed,
            "config": self.config,
            "ticks": self.ticks,
            "success": self.success,
            "all_targets_reached": self.all_targets_reached,
            "min_lambda2": _json_float(self.min_lambda2()),
            "completion_ticks": {str(k): v for k, v in sorted(self.completion_ticks.items())},
            "total_distance": []
            if self.total_distance is None
            else [float(x) for x in self.total_distance],
            "saturation_events": sum("saturation" in e for e in self.events),
            "rejection_events": sum("reject" in e for e in self.events),
        }


def _json_float(x: float):
    return None if (x is None or math.isnan(x)) else float(x)


def apply_overrides(
    sim: SimConfig,
    strategy: Optional[str] = None,
    metric: Optional[str] = None,
    r_flip: Optional[float] = None,
    delta_theta: Optional[float] = None,
    d_los_max: Optional[float] = None,
) -> SimConfig:
    flip = sim.flip
    if r_flip is not None or delta_theta is not None:
        flip = dataclasses.replace(
            flip,
            r_flip=r_flip if r_flip is not None else flip.r_flip,
            delta_theta=delta_theta if delta_theta is not None else flip.delta_theta,
        )
    constraints = sim.constraints
    if d_los_max is not None:
        los = dataclasses.replace(constraints.los, d_los_max=d_los_max)
        constraints = dataclasses.replace(constraints, los=los)
    return dataclasses.replace(
        sim,
        flip=flip,
        constraints=constraints,
        strategy=strategy if strategy is not None else sim.strategy,
        metric=metric if metric is not None else sim.metric,
    )


def randomized_targets(
    scenario: Scenario, seed: int, rng_margin: float = 0.5
) -> np.ndarray:
    """Per-seed target placement: free space, inside a compatibility disc so
    a com-range-limited chain can actually serve every goal, and mutually
    separated enough that capture zones cannot force collisions."""
    world = scenario.world
    sim = scenario.sim
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = world.bounds
    margin = 1.0
    count = sum(1 for s in scenario.robot_specs if s.get("target") is not None)
    clearance_min = sim.constraints.d_coll_min + sim.capture_radius + rng_margin
    separation = sim.constraints.d_coll_min + 2.0 * sim.capture_radius + 0.4
    # goal box small enough that even the full clique (no masking) can park on
    # every target with all pairs on the communication plateau
    spread = 0.5 * (sim.constraints.d_com_max - sim.constraints.d_com_ramp) / math.sqrt(2)
    for _ in range(10000):
        center = rng.uniform([xmin + margin, ymin + margin], [xmax - margin, ymax - margin])
        picked: List[np.ndarray] = []
        tries = 0
        while len(picked) < count and tries < 2000:
            tries += 1
            t = center + rng.uniform(-spread, spread, 2)
            if not world.in_bounds(t) or not (
                xmin + margin <= t[0] <= xmax - margin
                and ymin + margin <= t[1] <= ymax - margin
            ):
                continue
            if world.clearance(t) < clearance_min:
                continue
            if any(float(np.linalg.norm(t - p)) < separation for p in picked):
                continue
            picked.append(t)
        if len(picked) == count:
            return np.asarray(picked)
    raise RuntimeError("could not place randomized targets")


def run_experiment(
    scenario: Scenario,
    strategy: Optional[str] = None,
    metric: Optional[str] = None,
    r_flip: Optional[float] = None,
    delta_theta: Optional[float] = None,
    d_los_max: Optional[float] = None,
    seed: Optional[int] = None,
    max_ticks: Optional[int] = None,
    command_tape: Optional[Sequence[Tuple[float, float]]] = None,
    collect_records: bool = False,
    audit: bool = False,
) -> MetricsLog:
    """Run the tick loop to completion (all targets visited) or max_ticks.

    Deterministic per (scenario, seed): the seed only redraws targets when the
    scenario declares randomize_targets. A command tape pins the run length to
    the tape and drives the leader's navigation input.
    """
    cfg = apply_overrides(scenario.sim, strategy, metric, r_flip, delta_theta, d_los_max)
    state: WorldState = scenario.make_state()
    if seed is not None and scenario.randomize_targets:
        targets = randomized_targets(scenario, seed)
        state.world.targets = targets
    limit = max_ticks if max_ticks is not None else scenario.max_ticks
    if command_tape is not None:
        limit = min(limit, len(command_tape))
        for r in state.robots:
            if r.leader:
                r.k_n = 1.0  # teleop leaders follow commands like the live path

    log = MetricsLog(
        name=scenario.name,
        strategy=cfg.strategy,
        metric=cfg.metric,
        seed=seed,
        config=_config_echo(cfg),
        records=[] if collect_records else None,
    )
    prev_positions = np.asarray([r.position.copy() for r in state.robots])
    dist = np.zeros(len(state.robots))
    tasked = [r.target for r in state.robots if r.target is not None]

    for t in range(limit):
        leader_cmd = None
        if command_tape is not None:
            leader_cmd = np.asarray(command_tape[t], dtype=np.float64)
        rec = tick(state, cfg, leader_cmd=leader_cmd, audit=audit)
        log.ticks += 1
        log.lambda2.append(rec.lambda2)
        log.lambda2_full.append(rec.lambda2_full)
        log.edge_counts.append(rec.edge_count)
        log.trajectories.append(rec.positions)
        log.command_norms.append(np.linalg.norm(rec.u_cmd, axis=1))
        log.events.extend(rec.events)
        if log.records is not None:
            log.records.append(rec)
        new_positions = np.asarray([r.position for r in state.robots])
        dist += np.linalg.norm(new_positions - prev_positions, axis=1)
        prev_positions = new_positions
        if command_tape is None and tasked and all(
            r.target_reached for r in state.robots if r.target is not None
        ):
            break

    log.total_distance = dist
    log.completion_ticks = dict(state.visited_ticks)
    log.all_targets_reached = bool(tasked) and all(
        r.target_reached for r in state.robots if r.target is not None
    )
    lam_ok = True
    if len(state.robots) >= 2:
        lam_ok = bool(log.lambda2) and min(log.lambda2) > 0.0
    log.success = log.all_targets_reached and lam_ok
    return log


def _config_echo(cfg: SimConfig) -> dict:
    return {
        "strategy": cfg.strategy,
        "metric": cfg.metric,
        "dt": cfg.dt,
        "u_max": cfg.u_max,
        "beam_count": cfg.beam_count,
        "lidar_range": cfg.lidar_range,
        "r_flip": cfg.flip.r_flip,
        "delta_theta_deg": math.degrees(cfg.flip.delta_theta),
        "d_com_max": cfg.constraints.d_com_max,
        "d_coll_min": cfg.constraints.d_coll_min,
        "d_los_min": cfg.constraints.los.d_los_min,
        "d_los_max": cfg.constraints.los.d_los_max,
        "lambda2_min": cfg.constraints.lambda2_min,
    }


def emit_metrics(log: MetricsLog, out_dir, name: Optional[str] = None) -> List[Path]:
    """Write the per-tick CSV, the run summary and the edge-count histogram.

    Output is byte-stable for identical runs: floats are serialized with
    repr (shortest round-trip form).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = name if name is not None else log.name
    r_count = log.trajectories[0].shape[0] if log.trajectories else 0

    csv_path = out / f"{base}.csv"
    cols = ["tick", "lambda2", "edge_count"]
    for i in range(r_count):
        cols += [f"x{i}", f"y{i}", f"u{i}"]
    lines = [",".join(cols)]
    for t in range(log.ticks):
        row = [str(t), repr(log.lambda2[t]), str(log.edge_counts[t])]
        pos = log.trajectories[t]
        norms = log.command_norms[t]
        for i in range(r_count):
            row += [repr(float(pos[i, 0])), repr(float(pos[i, 1])), repr(float(norms[i]))]
        lines.append(",".join(row))
    csv_path.write_text("\n".join(lines) + "\n")

    summary_path = out / f"{base}.summary.json"
    summary_path.write_text(json.dumps(log.summary(), indent=2, sort_keys=True) + "\n")

    hist_path = out / f"{base}.hist.json"
    hist = {
        "schema": HISTOGRAM_SCHEMA,
        "name": base,
        "counts": {str(k): v for k, v in sorted(log.edge_histogram().items())},
        "ticks": log.ticks,
    }
    hist_path.write_text(json.dumps(hist, indent=2, sort_keys=True) + "\n")
    return [csv_path, summary_path, hist_path]


def run_matrix(
    scenario: Scenario,
    metrics: Sequence[str],
    topo_opt: Sequence[bool],
    r_flips: Sequence[float],
    seeds: Optional[Sequence[int]] = None,
    d_los_max: Optional[float] = None,
    out_dir=None,
) -> List[dict]:
    """Success matrix over metric x topology x flip radius x seed.

    Topo-Opt off means the plain Laplacian controller on the full weight
    matrix (the implicit-topology baseline). Seeds default to the scenario's
    batch seed list.
    """
    if seeds is None:
        seeds = scenario.seeds
    rows = []
    for metric in metrics:
        for use_topo in topo_opt:
            strategy = "topo-opt" if use_topo else "laplacian"
            for r_flip in r_flips:
                for seed in seeds:
                    log = run_experiment(
                        scenario,
                        strategy=strategy,
                        metric=metric,
                        r_flip=r_flip,
                        d_los_max=d_los_max,
                        seed=seed,
                    )
                    row = {
                        "metric": metric,
                        "topo_opt": use_topo,
                        "r_flip": r_flip,
                        "seed": seed,
                        "success": log.success,
                        "all_targets_reached": log.all_targets_reached,
                        "min_lambda2": _json_float(log.min_lambda2()),
                        "ticks": log.ticks,
                    }
                    rows.append(row)
                    if out_dir is not None:
                        tag = f"{scenario.name}_{metric}_{strategy}_r{int(r_flip)}_s{seed}"
                        emit_metrics(log, out_dir, name=tag)
    if out_dir is not None:
        path = Path(out_dir) / f"{scenario.name}_matrix.json"
        path.write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    return rows


def records_equal(a: TickRecord, b: TickRecord) -> bool:
    """Exact (bitwise) TickRecord equality."""
    return (
        a.tick == b.tick
        and _float_eq(a.lambda2, b.lambda2)
        and _float_eq(a.lambda2_full, b.lambda2_full)
        and a.edge_count == b.edge_count
        and a.edges == b.edges
        and np.array_equal(a.positions, b.positions)
        and np.array_equal(a.u_c, b.u_c)
        and np.array_equal(a.u_n, b.u_n)
        and np.array_equal(a.u_cmd, b.u_cmd)
        and a.saturated == b.saturated
        and a.events == b.events
    )


def _float_eq(x: float, y: float) -> bool:
    return (math.isnan(x) and math.isnan(y)) or x == y
