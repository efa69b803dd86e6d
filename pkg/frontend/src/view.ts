// Frame rendering as a deterministic display list. The canvas adapter in
// main.ts replays the ops; tests snapshot them directly, which keeps the
// golden-frame check independent of any real 2D context.

import { StateFrame } from "./protocol.js";

export interface Camera {
  scale: number; // pixels per meter
  cx: number; // world point at the canvas center
  cy: number;
}

export type DrawOp =
  | { op: "clear"; color: string }
  | { op: "poly"; pts: [number, number][]; stroke: string; width: number; fill?: string; dash?: number[] }
  | { op: "line"; x1: number; y1: number; x2: number; y2: number; stroke: string; width: number; dash?: number[] }
  | { op: "circle"; x: number; y: number; r: number; fill: string; stroke?: string }
  | { op: "text"; x: number; y: number; text: string; fill: string; size: number };

export const STYLE = {
  background: "#10141a",
  obstacle: "#3a4150",
  region: "#2b6a4a",
  treeEdge: "#3ddc84", // selected connections
  extraEdge: "#4aa3ff", // redundant connections
  robot: "#3ddc84",
  leader: "#ffd23f",
  text: "#e8e8e8",
  banner: "#ff5a5a",
  spark: "#3ddc84",
};

export const MAX_REGION_VERTICES = 256;

/** Rendering-only decimation: keep every k-th vertex so outlines stay below
 * MAX_REGION_VERTICES points. */
export function decimate(vertices: [number, number][], cap = MAX_REGION_VERTICES): [number, number][] {
  if (vertices.length <= cap) return vertices;
  const stride = Math.ceil(vertices.length / cap);
  const out: [number, number][] = [];
  for (let k = 0; k < vertices.length; k += stride) out.push(vertices[k]);
  return out;
}

function round2(x: number): number {
  return Math.round(x * 100) / 100;
}

export function worldToScreen(cam: Camera, w: number, h: number, x: number, y: number): [number, number] {
  // y grows upward in the world, downward on canvas
  return [round2(w / 2 + (x - cam.cx) * cam.scale), round2(h / 2 - (y - cam.cy) * cam.scale)];
}

export function renderFrame(
  frame: StateFrame,
  cam: Camera,
  w: number,
  h: number,
  lambdaHistory: number[],
): DrawOp[] {
  const ops: DrawOp[] = [{ op: "clear", color: STYLE.background }];
  const toScreen = (x: number, y: number) => worldToScreen(cam, w, h, x, y);

  for (const poly of frame.obstacles ?? []) {
    ops.push({
      op: "poly",
      pts: poly.map(([x, y]) => toScreen(x, y)),
      stroke: STYLE.obstacle,
      width: 1,
      fill: STYLE.obstacle,
    });
  }
  for (const region of frame.regions) {
    ops.push({
      op: "poly",
      pts: decimate(region.vertices).map(([x, y]) => toScreen(x, y)),
      stroke: STYLE.region,
      width: 1,
      dash: [4, 4],
    });
  }

  const byId = new Map(frame.robots.map((r) => [r.id, r]));
  for (const e of frame.edges) {
    const a = byId.get(e.i);
    const b = byId.get(e.j);
    if (!a || !b) continue;
    const [x1, y1] = toScreen(a.x, a.y);
    const [x2, y2] = toScreen(b.x, b.y);
    ops.push(
      e.in_tree
        ? { op: "line", x1, y1, x2, y2, stroke: STYLE.treeEdge, width: 2.5 }
        : { op: "line", x1, y1, x2, y2, stroke: STYLE.extraEdge, width: 1.5, dash: [6, 4] },
    );
  }

  for (const r of frame.robots) {
    const [x, y] = toScreen(r.x, r.y);
    ops.push({
      op: "circle",
      x,
      y,
      r: 6,
      fill: r.role === "leader" ? STYLE.leader : STYLE.robot,
    });
    ops.push({ op: "text", x: x + 8, y: y - 8, text: `${r.id}`, fill: STYLE.text, size: 11 });
  }

  const lam = frame.lambda2;
  ops.push({
    op: "text",
    x: 10,
    y: 18,
    text: `tick ${frame.tick}   lambda2 ${lam === null ? "n/a" : lam.toFixed(3)}`,
    fill: STYLE.text,
    size: 13,
  });
  if (frame.edges.length === 0) {
    ops.push({
      op: "text",
      x: 10,
      y: 38,
      text: "DISCONNECTED",
      fill: STYLE.banner,
      size: 15,
    });
  }
  ops.push(...sparkline(lambdaHistory, w - 130, 8, 120, 28));
  return ops;
}

/** Polyline sparkline of the recent lambda2 trace, zero-anchored. */
export function sparkline(values: number[], x: number, y: number, w: number, h: number): DrawOp[] {
  if (values.length < 2) return [];
  const max = Math.max(...values, 1e-9);
  const pts: [number, number][] = values.map((v, k) => [
    round2(x + (k / (values.length - 1)) * w),
    round2(y + h - (Math.max(v, 0) / max) * h),
  ]);
  return [
    { op: "line", x1: x, y1: y + h, x2: x + w, y2: y + h, stroke: "#555", width: 1 },
    { op: "poly", pts, stroke: STYLE.spark, width: 1 },
  ];
}
