"""Live teleoperation service: the tick loop paced by wall clock, state frames
over a websocket, leader velocity and whitelisted parameter changes applied at
tick boundaries."""

import asyncio
import dataclasses
import json
import math
import time
from typing import List, Optional

import numpy as np
import websockets

from ..world import STRATEGIES, TickRecord, tick
from .scenario import Scenario

FRAME_INTERVAL = 1.0 / 30.0  # publication cap; the sim itself never skips ticks

TUNABLE_PARAMS = ("d_los_max", "strategy")


class SessionEngine:
    """Single simulation session. Commands and parameter changes queue up and
    apply atomically at the next tick boundary; the websocket layer stays a
    thin shell around advance()."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.cfg = scenario.sim
        self.state = scenario.make_state()
        leaders = [i for i, r in enumerate(self.state.robots) if r.leader]
        if len(leaders) != 1:
            raise ValueError("live session needs exactly one leader robot")
        self.leader_index = leaders[0]
        # teleop leader follows commands, not targets
        self.state.robots[self.leader_index].k_n = 1.0
        self.leader_cmd = np.zeros(2)
        self._queue: List[dict] = []

    def queue_command(self, vx: float, vy: float):
        self._queue.append({"kind": "cmd", "vx": float(vx), "vy": float(vy)})

    def queue_param(self, name: str, value):
        if name not in TUNABLE_PARAMS:
            raise ValueError(f"parameter {name!r} is not live-tunable")
        if name == "strategy":
            if value not in STRATEGIES:
                raise ValueError(f"unknown strategy {value!r}")
        else:
            value = float(value)
            if not value > self.cfg.constraints.los.d_los_min:
                raise ValueError("d_los_max must exceed d_los_min")
        self._queue.append({"kind": "param", "name": name, "value": value})

    def _apply_queued(self):
        for item in self._queue:
            if item["kind"] == "cmd":
                self.leader_cmd = np.array([item["vx"], item["vy"]])
            elif item["name"] == "strategy":
                self.cfg = dataclasses.replace(self.cfg, strategy=item["value"])
            else:
                los = dataclasses.replace(self.cfg.constraints.los, d_los_max=item["value"])
                constraints = dataclasses.replace(self.cfg.constraints, los=los)
                self.cfg = dataclasses.replace(self.cfg, constraints=constraints)
        self._queue.clear()

    def advance(self) -> TickRecord:
        self._apply_queued()
        return tick(self.state, self.cfg, leader_cmd=self.leader_cmd, collect_regions=True)

    def handle_message(self, raw: str) -> Optional[dict]:
        """Parse one client frame; returns an error frame dict or None."""
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError as exc:
            return {"type": "error", "message": f"invalid JSON: {exc.msg}"}
        if not isinstance(msg, dict):
            return {"type": "error", "message": "frame must be an object"}
        kind = msg.get("type")
        try:
            if kind == "cmd":
                self.queue_command(float(msg["vx"]), float(msg["vy"]))
                return None
            if kind == "param":
                self.queue_param(msg["name"], msg["value"])
                return None
        except (KeyError, TypeError, ValueError) as exc:
            return {"type": "error", "message": str(exc)}
        return {"type": "error", "message": f"unknown frame type {kind!r}"}

    def state_frame(self, rec: TickRecord) -> dict:
        robots = [
            {
                "id": r.id,
                "x": float(rec.positions[i, 0]),
                "y": float(rec.positions[i, 1]),
                "role": "leader" if r.leader else r.role,
            }
            for i, r in enumerate(self.state.robots)
        ]
        edges = [
            {"i": i, "j": j, "weight": w, "in_tree": in_tree}
            for (i, j, _a, _b, _g, w, in_tree) in rec.edges
            if w > 0.0
        ]
        regions = []
        if rec.regions is not None:
            for i, verts in enumerate(rec.regions):
                world_verts = verts + rec.positions[i]
                regions.append(
                    {"id": self.state.robots[i].id, "vertices": world_verts.tolist()}
                )
        lam = rec.lambda2
        return {
            "type": "state",
            "tick": rec.tick,
            "robots": robots,
            "edges": edges,
            "lambda2": None if math.isnan(lam) else lam,
            "regions": regions,
            "config": {
                "d_los_max": self.cfg.constraints.los.d_los_max,
                "strategy": self.cfg.strategy,
            },
            "events": rec.events,
            "obstacles": [o.tolist() for o in self.state.world.obstacles],
        }


async def serve(
    scenario: Scenario,
    host: str = "127.0.0.1",
    port: int = 8765,
    stop: Optional[asyncio.Event] = None,
    ready: Optional[asyncio.Event] = None,
    realtime: bool = True,
    max_ticks: Optional[int] = None,
):
    engine = SessionEngine(scenario)
    clients = set()

    async def handler(ws):
        clients.add(ws)
        try:
            async for raw in ws:
                resp = engine.handle_message(raw)
                if resp is not None:
                    await ws.send(json.dumps(resp))
        except websockets.ConnectionClosed:
            pass
        finally:
            clients.discard(ws)

    async with websockets.serve(handler, host, port):
        if ready is not None:
            ready.set()
        next_tick = time.monotonic()
        last_frame = -math.inf
        ticks_done = 0
        while (stop is None or not stop.is_set()) and (
            max_ticks is None or ticks_done < max_ticks
        ):
            rec = engine.advance()
            ticks_done += 1
            now = time.monotonic()
            if now - last_frame >= FRAME_INTERVAL or not realtime:
                data = json.dumps(engine.state_frame(rec))
                for ws in list(clients):
                    try:
                        await ws.send(data)
                    except websockets.ConnectionClosed:
                        clients.discard(ws)
                last_frame = now
            if realtime:
                next_tick += engine.cfg.dt
                delay = next_tick - time.monotonic()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    next_tick = time.monotonic()  # late: shift schedule, never skip
                    await asyncio.sleep(0)
            else:
                await asyncio.sleep(0)


def serve_session(scenario: Scenario, port: int, host: str = "127.0.0.1"):
    """Blocking entry point used by the CLI."""
    asyncio.run(serve(scenario, host=host, port=port))
