// Wire protocol of the live session: message-framed JSON text over a
// websocket. Unknown fields are ignored; unknown frame types are errors at
// the call site.

export interface RobotDot {
  id: number;
  x: number;
  y: number;
  role: string;
}

export interface EdgeLink {
  i: number;
  j: number;
  weight: number;
  in_tree: boolean;
}

export interface RegionOutline {
  id: number;
  vertices: [number, number][];
}

export interface SessionConfig {
  d_los_max: number;
  strategy: string;
}

export interface StateFrame {
  type: "state";
  tick: number;
  robots: RobotDot[];
  edges: EdgeLink[];
  lambda2: number | null;
  regions: RegionOutline[];
  config?: SessionConfig;
  obstacles?: [number, number][][];
  events?: string[];
}

export interface ErrorFrame {
  type: "error";
  message: string;
}

export type ServerFrame = StateFrame | ErrorFrame;

export interface CmdFrame {
  type: "cmd";
  vx: number;
  vy: number;
}

export interface ParamFrame {
  type: "param";
  name: "d_los_max" | "strategy";
  value: number | string;
}

function isNum(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

/** Parse one server frame; null means the payload is unusable and the
 * caller should keep its last good state. */
export function parseServerFrame(raw: string): ServerFrame | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  const m = msg as Record<string, unknown>;
  if (m.type === "error" && typeof m.message === "string") {
    return { type: "error", message: m.message };
  }
  if (m.type !== "state") return null;
  if (!isNum(m.tick) || !Array.isArray(m.robots) || !Array.isArray(m.edges)) {
    return null;
  }
  const robots: RobotDot[] = [];
  for (const r of m.robots as unknown[]) {
    const rr = r as Record<string, unknown>;
    if (!isNum(rr.x) || !isNum(rr.y) || !isNum(rr.id)) return null;
    robots.push({ id: rr.id, x: rr.x, y: rr.y, role: String(rr.role ?? "") });
  }
  const edges: EdgeLink[] = [];
  for (const e of m.edges as unknown[]) {
    const ee = e as Record<string, unknown>;
    if (!isNum(ee.i) || !isNum(ee.j) || !isNum(ee.weight)) return null;
    edges.push({ i: ee.i, j: ee.j, weight: ee.weight, in_tree: Boolean(ee.in_tree) });
  }
  const regions: RegionOutline[] = [];
  if (Array.isArray(m.regions)) {
    for (const g of m.regions as unknown[]) {
      const gg = g as Record<string, unknown>;
      if (!isNum(gg.id) || !Array.isArray(gg.vertices)) continue;
      regions.push({ id: gg.id, vertices: gg.vertices as [number, number][] });
    }
  }
  const frame: StateFrame = {
    type: "state",
    tick: m.tick,
    robots,
    edges,
    lambda2: isNum(m.lambda2) ? m.lambda2 : null,
    regions,
  };
  const cfg = m.config as Record<string, unknown> | undefined;
  if (cfg && isNum(cfg.d_los_max) && typeof cfg.strategy === "string") {
    frame.config = { d_los_max: cfg.d_los_max, strategy: cfg.strategy };
  }
  if (Array.isArray(m.obstacles)) {
    frame.obstacles = m.obstacles as [number, number][][];
  }
  if (Array.isArray(m.events)) {
    frame.events = (m.events as unknown[]).map(String);
  }
  return frame;
}
