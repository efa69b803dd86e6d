// Browser entry point: socket client, canvas adapter, input pump and the
// parameter panel. All simulation truth lives on the server; this file only
// draws frames and forwards intents.

import { KeyboardTeleop } from "./input.js";
import { parseServerFrame, StateFrame } from "./protocol.js";
import { Camera, DrawOp, renderFrame } from "./view.js";

const WS_URL = (window as unknown as { SIGHTLINE_WS?: string }).SIGHTLINE_WS
  ?? `ws://${location.hostname || "127.0.0.1"}:8765`;

const LAMBDA_HISTORY = 240;

interface ViewState {
  frame: StateFrame | null; // the one frame everything on screen comes from
  lambdaTrace: number[];
  connected: boolean;
  lastError: string;
  pendingParamEcho: string;
}

const view: ViewState = {
  frame: null,
  lambdaTrace: [],
  connected: false,
  lastError: "",
  pendingParamEcho: "",
};

function applyOps(ctx: CanvasRenderingContext2D, ops: DrawOp[], w: number, h: number): void {
  for (const op of ops) {
    switch (op.op) {
      case "clear":
        ctx.fillStyle = op.color;
        ctx.fillRect(0, 0, w, h);
        break;
      case "poly": {
        ctx.beginPath();
        op.pts.forEach(([x, y], k) => (k ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
        if (op.fill) {
          ctx.closePath();
          ctx.fillStyle = op.fill;
          ctx.fill();
        }
        ctx.strokeStyle = op.stroke;
        ctx.lineWidth = op.width;
        ctx.setLineDash(op.dash ?? []);
        ctx.stroke();
        ctx.setLineDash([]);
        break;
      }
      case "line":
        ctx.beginPath();
        ctx.moveTo(op.x1, op.y1);
        ctx.lineTo(op.x2, op.y2);
        ctx.strokeStyle = op.stroke;
        ctx.lineWidth = op.width;
        ctx.setLineDash(op.dash ?? []);
        ctx.stroke();
        ctx.setLineDash([]);
        break;
      case "circle":
        ctx.beginPath();
        ctx.arc(op.x, op.y, op.r, 0, 2 * Math.PI);
        ctx.fillStyle = op.fill;
        ctx.fill();
        break;
      case "text":
        ctx.fillStyle = op.fill;
        ctx.font = `${op.size}px monospace`;
        ctx.fillText(op.text, op.x, op.y);
        break;
    }
  }
}

function main(): void {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const status = document.getElementById("status")!;
  const dlosInput = document.getElementById("dlos") as HTMLInputElement;
  const strategySelect = document.getElementById("strategy") as HTMLSelectElement;
  const echo = document.getElementById("echo")!;

  const teleop = new KeyboardTeleop(1.0);
  let socket: WebSocket | null = null;
  let backoffMs = 500;

  function connect(): void {
    socket = new WebSocket(WS_URL);
    socket.onopen = () => {
      view.connected = true;
      backoffMs = 500;
      status.textContent = `connected: ${WS_URL}`;
    };
    socket.onclose = () => {
      view.connected = false;
      status.textContent = `reconnecting in ${backoffMs} ms`;
      setTimeout(connect, backoffMs);
      backoffMs = Math.min(backoffMs * 2, 5000);
    };
    socket.onerror = () => socket?.close();
    socket.onmessage = (ev: MessageEvent) => {
      const frame = parseServerFrame(String(ev.data));
      if (frame === null) {
        view.lastError = "malformed frame";
        echo.textContent = "error: malformed frame (keeping last good state)";
        return; // keep the last good frame on screen
      }
      if (frame.type === "error") {
        view.lastError = frame.message;
        echo.textContent = `server error: ${frame.message}`;
        return;
      }
      view.frame = frame;
      if (frame.lambda2 !== null) {
        view.lambdaTrace.push(frame.lambda2);
        if (view.lambdaTrace.length > LAMBDA_HISTORY) view.lambdaTrace.shift();
      }
      if (frame.config) {
        echo.textContent =
          `config: d_los_max=${frame.config.d_los_max} strategy=${frame.config.strategy}` +
          (view.lastError ? `   last error: ${view.lastError}` : "");
      }
    };
  }

  window.addEventListener("keydown", (e) => teleop.keyEvent(e.code, true));
  window.addEventListener("keyup", (e) => teleop.keyEvent(e.code, false));

  dlosInput.addEventListener("change", () => {
    send({ type: "param", name: "d_los_max", value: Number(dlosInput.value) });
  });
  strategySelect.addEventListener("change", () => {
    send({ type: "param", name: "strategy", value: strategySelect.value });
  });

  function send(msg: unknown): void {
    if (socket && socket.readyState === WebSocket.OPEN) {
      socket.send(JSON.stringify(msg));
    }
  }

  setInterval(() => {
    const cmd = teleop.maybeEmit(performance.now());
    if (cmd) send(cmd);
  }, 10);

  const camera: Camera = { scale: 18, cx: 0, cy: 0 };
  function paint(): void {
    if (view.frame) {
      const ops = renderFrame(view.frame, camera, canvas.width, canvas.height, view.lambdaTrace);
      applyOps(ctx, ops, canvas.width, canvas.height);
    }
    requestAnimationFrame(paint);
  }
  connect();
  requestAnimationFrame(paint);
}

window.addEventListener("load", main);
