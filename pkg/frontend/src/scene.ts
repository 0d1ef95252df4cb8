// Canvas scene: the arm, the safety square, the end-effector trail and
// the applied-force arrow. All draw functions are pure over a minimal
// 2D-context interface so they can be exercised headlessly in tests.

import { Pair, SnapshotData } from "./wire.js";

/** The subset of CanvasRenderingContext2D the scene actually uses. */
export interface Draw2D {
  lineWidth: number;
  strokeStyle: string;
  fillStyle: string;
  font: string;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  stroke(): void;
  fill(): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
}

export type FrameMode = "base" | "deviation";

export interface Viewport {
  widthPx: number;
  heightPx: number;
  /** world coordinates of the viewport centre */
  centre: Pair;
  pxPerM: number;
}

/** Base-frame viewport: the arm's base at the canvas centre, the whole
 *  reach plus the safety square in view. */
export function baseViewport(widthPx: number, heightPx: number): Viewport {
  return { widthPx, heightPx, centre: [0.35, 0.35], pxPerM: Math.min(widthPx, heightPx) / 3.2 };
}

/** Deviation-frame viewport: the operating point at the centre, the
 *  ±1 m square filling most of the canvas. */
export function deviationViewport(
  widthPx: number,
  heightPx: number,
  snap: SnapshotData,
): Viewport {
  return {
    widthPx,
    heightPx,
    centre: snap.operating_point_m,
    pxPerM: Math.min(widthPx, heightPx) / (2.6 * snap.safe_limit_m),
  };
}

/** World (metres, y up) → canvas pixels (y down). */
export function worldToPixel(view: Viewport, x: number, y: number): Pair {
  return [
    view.widthPx / 2 + (x - view.centre[0]) * view.pxPerM,
    view.heightPx / 2 - (y - view.centre[1]) * view.pxPerM,
  ];
}

export const ARM_STYLE = { link: "#2b5789", joint: "#c1292e", base: "#444" };
export const SQUARE_STYLE = { calm: "#7aa06e", alert: "#c1292e" };
export const TRAIL_STYLE = "#87a7c7";
export const FORCE_STYLE = "#d98324";

/** Two links drawn from the server-confirmed base → elbow → end-effector
 *  points (which the server computed from the joint angles and link
 *  lengths); joints drawn as discs. */
export function drawArm(ctx: Draw2D, view: Viewport, snap: SnapshotData): void {
  const base = worldToPixel(view, 0, 0);
  const elbow = worldToPixel(view, snap.elbow_m[0], snap.elbow_m[1]);
  const ee = worldToPixel(view, snap.ee_m[0], snap.ee_m[1]);

  ctx.strokeStyle = ARM_STYLE.link;
  ctx.lineWidth = 5;
  ctx.beginPath();
  ctx.moveTo(base[0], base[1]);
  ctx.lineTo(elbow[0], elbow[1]);
  ctx.lineTo(ee[0], ee[1]);
  ctx.stroke();

  ctx.fillStyle = ARM_STYLE.base;
  ctx.beginPath();
  ctx.arc(base[0], base[1], 7, 0, 2 * Math.PI);
  ctx.fill();
  ctx.fillStyle = ARM_STYLE.joint;
  for (const [px, py] of [elbow, ee]) {
    ctx.beginPath();
    ctx.arc(px, py, 5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

/** The ±safe_limit square around the operating point; alert styling when
 *  any axis runs in the stiffened boundary region. */
export function drawSafetySquare(
  ctx: Draw2D,
  view: Viewport,
  snap: SnapshotData,
): void {
  const alert = snap.limit_engaged.any;
  const [ox, oy] = snap.operating_point_m;
  const lim = snap.safe_limit_m;
  const topLeft = worldToPixel(view, ox - lim, oy + lim);
  const side = 2 * lim * view.pxPerM;

  ctx.strokeStyle = alert ? SQUARE_STYLE.alert : SQUARE_STYLE.calm;
  ctx.lineWidth = alert ? 4 : 2;
  ctx.setLineDash(alert ? [] : [8, 6]);
  ctx.beginPath();
  ctx.rect(topLeft[0], topLeft[1], side, side);
  ctx.stroke();
  ctx.setLineDash([]);

  // operating point marker
  const op = worldToPixel(view, ox, oy);
  ctx.strokeStyle = SQUARE_STYLE.calm;
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(op[0] - 6, op[1]);
  ctx.lineTo(op[0] + 6, op[1]);
  ctx.moveTo(op[0], op[1] - 6);
  ctx.lineTo(op[0], op[1] + 6);
  ctx.stroke();
}

/** End-effector trail; points are deviation-frame coordinates. */
export function drawTrail(
  ctx: Draw2D,
  view: Viewport,
  snap: SnapshotData,
  trail: readonly Pair[],
): void {
  if (trail.length < 2) return;
  const [ox, oy] = snap.operating_point_m;
  ctx.strokeStyle = TRAIL_STYLE;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  trail.forEach(([dx, dy], i) => {
    const [px, py] = worldToPixel(view, ox + dx, oy + dy);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
}

const FORCE_PX_PER_N = 6;

/** Arrow for the server-confirmed applied force, anchored at the
 *  end effector. Nothing is drawn at zero force. */
export function drawForceArrow(
  ctx: Draw2D,
  view: Viewport,
  snap: SnapshotData,
): void {
  const [fx, fy] = snap.force_n;
  const mag = Math.hypot(fx, fy);
  if (mag < 1e-9) return;
  const tip = worldToPixel(view, snap.ee_m[0], snap.ee_m[1]);
  const end: Pair = [tip[0] + fx * FORCE_PX_PER_N, tip[1] - fy * FORCE_PX_PER_N];

  ctx.strokeStyle = FORCE_STYLE;
  ctx.fillStyle = FORCE_STYLE;
  ctx.lineWidth = 3;
  ctx.beginPath();
  ctx.moveTo(tip[0], tip[1]);
  ctx.lineTo(end[0], end[1]);
  ctx.stroke();

  const angle = Math.atan2(end[1] - tip[1], end[0] - tip[0]);
  const headLen = 9;
  ctx.beginPath();
  ctx.moveTo(end[0], end[1]);
  ctx.lineTo(
    end[0] - headLen * Math.cos(angle - 0.5),
    end[1] - headLen * Math.sin(angle - 0.5),
  );
  ctx.lineTo(
    end[0] - headLen * Math.cos(angle + 0.5),
    end[1] - headLen * Math.sin(angle + 0.5),
  );
  ctx.fill();
}

/** Compose the full scene for one snapshot. */
export function renderScene(
  ctx: Draw2D,
  widthPx: number,
  heightPx: number,
  snap: SnapshotData,
  trail: readonly Pair[],
  mode: FrameMode,
): Viewport {
  const view =
    mode === "base"
      ? baseViewport(widthPx, heightPx)
      : deviationViewport(widthPx, heightPx, snap);
  ctx.clearRect(0, 0, widthPx, heightPx);
  drawSafetySquare(ctx, view, snap);
  drawTrail(ctx, view, snap, trail);
  drawArm(ctx, view, snap);
  drawForceArrow(ctx, view, snap);
  return view;
}
