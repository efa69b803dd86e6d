import { describe, expect, it } from "vitest";
import { StateFrame } from "../src/protocol.js";
import { renderFrame } from "../src/view.js";

function fourRobotFrame(tick: number): StateFrame {
  const regions = [];
  for (let id = 0; id < 4; id += 1) {
    const vertices: [number, number][] = [];
    for (let k = 0; k < 720; k += 1) {
      const ang = (2 * Math.PI * k) / 720;
      const r = 25 + 3 * Math.sin(5 * ang + id);
      vertices.push([id * 3 + r * Math.cos(ang), r * Math.sin(ang)]);
    }
    regions.push({ id, vertices });
  }
  const obstacles: [number, number][][] = [];
  for (let k = 0; k < 14; k += 1) {
    obstacles.push([[k, k], [k + 1, k], [k + 1, k + 1], [k, k + 1]]);
  }
  return {
    type: "state",
    tick,
    robots: [0, 1, 2, 3].map((id) => ({ id, x: id * 3, y: Math.sin(tick / 10 + id), role: id ? "free" : "leader" })),
    edges: [
      { i: 0, j: 1, weight: 1, in_tree: true },
      { i: 1, j: 2, weight: 1, in_tree: true },
      { i: 2, j: 3, weight: 1, in_tree: true },
      { i: 0, j: 2, weight: 0.5, in_tree: false },
    ],
    lambda2: 0.8,
    regions,
    obstacles,
  };
}

describe("render throughput", () => {
  it("builds 4-robot frames at 20+ fps", () => {
    const history = Array.from({ length: 240 }, (_, k) => 0.5 + 0.3 * Math.sin(k / 10));
    const frames = Array.from({ length: 60 }, (_, t) => fourRobotFrame(t));
    // warmup
    renderFrame(frames[0], { scale: 15, cx: 0, cy: 0 }, 1100, 700, history);
    const t0 = performance.now();
    let ops = 0;
    for (const f of frames) {
      ops += renderFrame(f, { scale: 15, cx: 0, cy: 0 }, 1100, 700, history).length;
    }
    const perFrameMs = (performance.now() - t0) / frames.length;
    expect(ops).toBeGreaterThan(0);
    expect(perFrameMs).toBeLessThan(1000 / 20);
  });
});
