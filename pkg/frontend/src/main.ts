// Browser entry point: wires the live websocket client (or a recorded
// session replay) into the canvas scene, the strip charts and the drag
// gesture. Everything drawn reflects server-confirmed frames; the page
// never simulates locally.
//
// URL query parameters:
//   host=…     live-service host (default 127.0.0.1)
//   port=…     live-service port (default 8000)
//   scale=…    drag mapping in newtons per pixel (default 0.1)
//   replay=…   path to a recorded .jsonl session; replaces the socket
//   speed=…    replay speed multiplier (default 1)

import { LiveClient, wireUrl } from "./client.js";
import { ViewState } from "./state.js";
import { Draw2D, FrameMode, renderScene } from "./scene.js";
import {
  drawDeviationChart,
  drawGainChart,
  drawLyapunovChart,
  drawRegionStrip,
} from "./charts.js";
import {
  DragState,
  dragCommand,
  dragToForce,
  endDragCommand,
  moveDrag,
  startDrag,
} from "./gesture.js";
import { parseSessionJsonl, ReplayPlayer } from "./replay.js";
import { pauseCommand, resetCommand, resumeCommand } from "./wire.js";

function mustGet<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function context2d(canvas: HTMLCanvasElement): Draw2D {
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2D canvas context unavailable");
  // The real context satisfies Draw2D at runtime (we only ever assign
  // string styles); the DOM typings are wider, hence the cast.
  return ctx as unknown as Draw2D;
}

const params = new URLSearchParams(window.location.search);
const scaleNPerPx = Number(params.get("scale") ?? "0.1");
const replayPath = params.get("replay");
const replaySpeed = Number(params.get("speed") ?? "1");
const canSend = replayPath === null;

const sceneCanvas = mustGet<HTMLCanvasElement>("scene");
const chartsCanvas = mustGet<HTMLCanvasElement>("charts");
const sceneCtx = context2d(sceneCanvas);
const chartsCtx = context2d(chartsCanvas);
const statusBadge = mustGet<HTMLElement>("status");
const banner = mustGet<HTMLElement>("banner");
const forceReadout = mustGet<HTMLElement>("force-readout");
const errorLine = mustGet<HTMLElement>("error-line");
const modeButton = mustGet<HTMLButtonElement>("mode-toggle");
const pauseButton = mustGet<HTMLButtonElement>("pause-toggle");
const resetButton = mustGet<HTMLButtonElement>("reset");

const state = new ViewState();
let mode: FrameMode = "base";
let drag: DragState | null = null;
let dragDirty = false;
let player: ReplayPlayer | null = null;
let client: LiveClient | null = null;

// -- transport ----------------------------------------------------------------

function send(command: string): void {
  client?.send(command);
}

if (canSend) {
  client = new LiveClient(wireUrl(params));
  client.onFrame = (frame) => state.apply(frame);
  client.onStatus = (status) => {
    state.status = status;
  };
  client.connect();
} else {
  void fetch(replayPath)
    .then((res) => {
      if (!res.ok) throw new Error(`${res.status} ${res.statusText}`);
      return res.text();
    })
    .then((text) => {
      player = new ReplayPlayer(
        parseSessionJsonl(text),
        (frame) => state.apply(frame),
        replaySpeed,
      );
    })
    .catch((err) => {
      state.lastError = `replay load failed: ${String(err)}`;
    });
  pauseButton.disabled = true;
  resetButton.disabled = true;
}

// -- controls -----------------------------------------------------------------

modeButton.addEventListener("click", () => {
  mode = mode === "base" ? "deviation" : "base";
});

pauseButton.addEventListener("click", () => {
  send(state.paused ? resumeCommand() : pauseCommand());
});

resetButton.addEventListener("click", () => {
  send(resetCommand());
});

sceneCanvas.addEventListener("pointerdown", (ev) => {
  if (!canSend) return;
  sceneCanvas.setPointerCapture(ev.pointerId);
  drag = startDrag(ev.offsetX, ev.offsetY);
  dragDirty = true;
});

sceneCanvas.addEventListener("pointermove", (ev) => {
  if (!drag) return;
  drag = moveDrag(drag, ev.offsetX, ev.offsetY);
  dragDirty = true;
});

function endDrag(): void {
  if (!drag) return;
  drag = null;
  dragDirty = false;
  send(endDragCommand());
  state.requestedForce = null;
}

sceneCanvas.addEventListener("pointerup", endDrag);
sceneCanvas.addEventListener("pointercancel", endDrag);

// -- rendering ----------------------------------------------------------------

function chartRects(w: number, h: number) {
  const pad = 10;
  const stripH = 40;
  const chartH = (h - stripH - 5 * pad) / 3;
  const inner = w - 2 * pad;
  return {
    dev: { x: pad, y: pad, w: inner, h: chartH },
    gains: { x: pad, y: 2 * pad + chartH, w: inner, h: chartH },
    lyap: { x: pad, y: 3 * pad + 2 * chartH, w: inner, h: chartH },
    region: { x: pad, y: 4 * pad + 3 * chartH, w: inner, h: stripH },
  };
}

function updateChrome(): void {
  const replayNote = replayPath ? " · replay" : "";
  statusBadge.textContent =
    state.status + (state.paused ? " · paused" : "") + replayNote;
  statusBadge.dataset.status = state.status;

  modeButton.textContent = `frame: ${mode}`;
  pauseButton.textContent = state.paused ? "resume" : "pause";

  if (state.terminal) {
    banner.textContent = `session ended (${state.terminal.reason}): ${state.terminal.message}`;
    banner.hidden = false;
  } else if (state.status === "closed") {
    banner.textContent = "connection lost — showing the last received state";
    banner.hidden = false;
  } else {
    banner.hidden = true;
  }

  errorLine.textContent = state.lastError ?? "";

  const applied = state.latest?.force_n ?? [0, 0];
  let text = `applied force [${applied[0].toFixed(2)}, ${applied[1].toFixed(2)}] N`;
  if (state.forceClamped()) text += " — clamped by server";
  if (drag) {
    const [rx, ry] = dragToForce(drag, scaleNPerPx);
    text += ` (requested [${rx.toFixed(2)}, ${ry.toFixed(2)}])`;
  }
  forceReadout.textContent = text;
}

function render(nowMs: number): void {
  player?.step(nowMs / 1000);

  if (drag && dragDirty) {
    send(dragCommand(drag, scaleNPerPx));
    state.requestedForce = dragToForce(drag, scaleNPerPx);
    dragDirty = false;
  }

  const snap = state.latest;
  if (snap) {
    renderScene(
      sceneCtx,
      sceneCanvas.width,
      sceneCanvas.height,
      snap,
      state.trail,
      mode,
    );

    const w = chartsCanvas.width;
    const h = chartsCanvas.height;
    const rects = chartRects(w, h);
    chartsCtx.clearRect(0, 0, w, h);
    drawDeviationChart(chartsCtx, rects.dev, state.history, snap.safe_limit_m);
    drawGainChart(chartsCtx, rects.gains, state.history);
    drawLyapunovChart(chartsCtx, rects.lyap, state.history);
    drawRegionStrip(chartsCtx, rects.region, state.history);
  } else {
    sceneCtx.clearRect(0, 0, sceneCanvas.width, sceneCanvas.height);
    sceneCtx.fillStyle = "#777";
    sceneCtx.font = "14px sans-serif";
    sceneCtx.fillText("waiting for frames…", 20, 30);
  }

  updateChrome();
  requestAnimationFrame(render);
}

requestAnimationFrame(render);
