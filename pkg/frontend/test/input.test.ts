import { describe, expect, it } from "vitest";
import { KeyboardTeleop, MIN_SEND_INTERVAL_MS } from "../src/input.js";

describe("KeyboardTeleop", () => {
  it("idle emits nothing", () => {
    const t = new KeyboardTeleop(1.0);
    expect(t.maybeEmit(0)).toBeNull();
    expect(t.maybeEmit(100)).toBeNull();
  });

  it("maps single keys to unit axes", () => {
    const t = new KeyboardTeleop(0.8);
    t.keyEvent("ArrowUp", true);
    expect(t.commandVector()).toEqual({ vx: 0, vy: 0.8 });
    t.keyEvent("ArrowUp", false);
    t.keyEvent("KeyA", true);
    expect(t.commandVector()).toEqual({ vx: -0.8, vy: 0 });
  });

  it("normalizes diagonals", () => {
    const t = new KeyboardTeleop(1.0);
    t.keyEvent("ArrowUp", true);
    t.keyEvent("ArrowRight", true);
    const { vx, vy } = t.commandVector();
    expect(vx).toBeCloseTo(Math.SQRT1_2, 10);
    expect(vy).toBeCloseTo(Math.SQRT1_2, 10);
  });

  it("opposing keys cancel", () => {
    const t = new KeyboardTeleop(1.0);
    t.keyEvent("KeyW", true);
    t.keyEvent("KeyS", true);
    expect(t.commandVector()).toEqual({ vx: 0, vy: 0 });
  });

  it("rate limits to one frame per interval", () => {
    const t = new KeyboardTeleop(1.0);
    t.keyEvent("ArrowRight", true);
    let sent = 0;
    for (let ms = 0; ms < 1000; ms += 1) {
      if (t.maybeEmit(ms)) sent += 1;
    }
    expect(sent).toBeLessThanOrEqual(Math.ceil(1000 / MIN_SEND_INTERVAL_MS));
    expect(sent).toBeGreaterThan(25);
  });

  it("release sends zero once, then goes quiet", () => {
    const t = new KeyboardTeleop(1.0);
    t.keyEvent("ArrowRight", true);
    expect(t.maybeEmit(0)).toEqual({ type: "cmd", vx: 1, vy: 0 });
    t.keyEvent("ArrowRight", false);
    const zero = t.maybeEmit(50);
    expect(zero).toEqual({ type: "cmd", vx: 0, vy: 0 });
    expect(t.maybeEmit(100)).toBeNull();
    expect(t.maybeEmit(1000)).toBeNull();
  });

  it("ignores unmapped keys", () => {
    const t = new KeyboardTeleop(1.0);
    t.keyEvent("KeyQ", true);
    expect(t.maybeEmit(0)).toBeNull();
  });

  it("dispatches within the 50 ms latency budget", () => {
    const t = new KeyboardTeleop(1.0);
    // worst case: a frame went out right when the key goes down again
    t.keyEvent("ArrowRight", true);
    t.maybeEmit(1000);
    t.keyEvent("ArrowRight", false);
    t.keyEvent("ArrowRight", true);
    let sentAt: number | null = null;
    for (let ms = 1001; ms < 1100; ms += 10) {
      // 10 ms poll cadence, as wired in main.ts
      if (t.maybeEmit(ms)) {
        sentAt = ms;
        break;
      }
    }
    expect(sentAt).not.toBeNull();
    expect(sentAt! - 1000).toBeLessThan(50);
  });
});
