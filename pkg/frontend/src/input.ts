// Keyboard teleoperation: pressed arrows/WASD become a velocity command,
// dispatched at most every MIN_SEND_INTERVAL_MS, with a single zero frame on
// release.

import { CmdFrame } from "./protocol.js";

export const MIN_SEND_INTERVAL_MS = 33; // <= 30 Hz

const KEY_VECTORS: Record<string, [number, number]> = {
  ArrowUp: [0, 1],
  ArrowDown: [0, -1],
  ArrowLeft: [-1, 0],
  ArrowRight: [1, 0],
  KeyW: [0, 1],
  KeyS: [0, -1],
  KeyA: [-1, 0],
  KeyD: [1, 0],
};

export class KeyboardTeleop {
  private pressed = new Set<string>();
  private lastSentAt = -Infinity;
  private zeroPending = false;

  constructor(public speed = 1.0) {}

  keyEvent(code: string, down: boolean): void {
    if (!(code in KEY_VECTORS)) return;
    const before = this.pressed.size;
    if (down) this.pressed.add(code);
    else this.pressed.delete(code);
    if (before > 0 && this.pressed.size === 0) this.zeroPending = true;
  }

  /** Direction from the held keys: diagonal input normalizes to unit length,
   * then scales by the configured speed. */
  commandVector(): { vx: number; vy: number } {
    let x = 0;
    let y = 0;
    for (const code of this.pressed) {
      const [dx, dy] = KEY_VECTORS[code];
      x += dx;
      y += dy;
    }
    x = Math.max(-1, Math.min(1, x));
    y = Math.max(-1, Math.min(1, y));
    const norm = Math.hypot(x, y);
    if (norm > 1) {
      x /= norm;
      y /= norm;
    }
    return { vx: x * this.speed, vy: y * this.speed };
  }

  /** Command frame due now, if any: rate-limited while keys are held, one
   * final zero after release, silence when idle. */
  maybeEmit(nowMs: number): CmdFrame | null {
    const held = this.pressed.size > 0;
    if (!held && !this.zeroPending) return null;
    if (nowMs - this.lastSentAt < MIN_SEND_INTERVAL_MS) return null;
    this.lastSentAt = nowMs;
    if (!held) {
      this.zeroPending = false;
      return { type: "cmd", vx: 0, vy: 0 };
    }
    const { vx, vy } = this.commandVector();
    return { type: "cmd", vx, vy };
  }
}
