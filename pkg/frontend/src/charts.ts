// Scrolling strip charts over the rolling history buffer: deviation and
// reference positions with the safety guides, adaptive gains, per-axis
// Lyapunov values, and the active-region indicator strip.

import { Draw2D } from "./scene.js";
import { HistoryPoint } from "./state.js";

export interface ChartRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

interface Series {
  label: string;
  color: string;
  dash?: number[];
  value: (p: HistoryPoint) => number;
}

function timeRange(history: readonly HistoryPoint[]): [number, number] {
  const t0 = history[0].t;
  const t1 = history[history.length - 1].t;
  return t1 > t0 ? [t0, t1] : [t0, t0 + 1];
}

function plot(
  ctx: Draw2D,
  rect: ChartRect,
  history: readonly HistoryPoint[],
  series: Series,
  yMin: number,
  yMax: number,
): void {
  const [t0, t1] = timeRange(history);
  ctx.strokeStyle = series.color;
  ctx.lineWidth = 1.5;
  ctx.setLineDash(series.dash ?? []);
  ctx.beginPath();
  history.forEach((p, i) => {
    const px = rect.x + ((p.t - t0) / (t1 - t0)) * rect.w;
    const py =
      rect.y + rect.h - ((series.value(p) - yMin) / (yMax - yMin)) * rect.h;
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
  ctx.setLineDash([]);
}

function frame(ctx: Draw2D, rect: ChartRect, title: string): void {
  ctx.strokeStyle = "#999";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.rect(rect.x, rect.y, rect.w, rect.h);
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(title, rect.x + 4, rect.y + 12);
}

function guideline(
  ctx: Draw2D,
  rect: ChartRect,
  yValue: number,
  yMin: number,
  yMax: number,
  color: string,
): void {
  const py = rect.y + rect.h - ((yValue - yMin) / (yMax - yMin)) * rect.h;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1;
  ctx.setLineDash([3, 4]);
  ctx.beginPath();
  ctx.moveTo(rect.x, py);
  ctx.lineTo(rect.x + rect.w, py);
  ctx.stroke();
  ctx.setLineDash([]);
}

/** Reference/plant deviation positions per axis with ±limit guides. */
export function drawDeviationChart(
  ctx: Draw2D,
  rect: ChartRect,
  history: readonly HistoryPoint[],
  safeLimit: number,
): void {
  frame(ctx, rect, "deviation / reference position [m]");
  if (history.length < 2) return;
  const span = 1.3 * safeLimit;
  guideline(ctx, rect, safeLimit, -span, span, "#b55");
  guideline(ctx, rect, -safeLimit, -span, span, "#b55");
  const series: Series[] = [
    { label: "ref x", color: "#2b5789", value: (p) => p.refX },
    { label: "dev x", color: "#2b5789", dash: [5, 4], value: (p) => p.devX },
    { label: "ref y", color: "#6c9a3f", value: (p) => p.refY },
    { label: "dev y", color: "#6c9a3f", dash: [5, 4], value: (p) => p.devY },
  ];
  for (const s of series) plot(ctx, rect, history, s, -span, span);
}

const GAIN_COLORS = [
  "#2b5789", "#5c84b1", "#13314f", "#86a9cc",
  "#6c9a3f", "#93bb6d", "#3d5c20", "#b6d49a",
];

/** All eight adaptive gain components (two rows × two axes). */
export function drawGainChart(
  ctx: Draw2D,
  rect: ChartRect,
  history: readonly HistoryPoint[],
): void {
  frame(ctx, rect, "adaptive gains");
  if (history.length < 2) return;
  let lo = Infinity;
  let hi = -Infinity;
  for (const p of history) {
    for (const g of p.gains) {
      if (g < lo) lo = g;
      if (g > hi) hi = g;
    }
  }
  const pad = 0.05 * (hi - lo || 1);
  for (let i = 0; i < 8; i += 1) {
    plot(
      ctx,
      rect,
      history,
      { label: `g${i}`, color: GAIN_COLORS[i], value: (p) => p.gains[i] },
      lo - pad,
      hi + pad,
    );
  }
}

/** Per-axis Lyapunov values (theory: non-increasing between force edits). */
export function drawLyapunovChart(
  ctx: Draw2D,
  rect: ChartRect,
  history: readonly HistoryPoint[],
): void {
  frame(ctx, rect, "Lyapunov value per axis");
  if (history.length < 2) return;
  let hi = -Infinity;
  for (const p of history) hi = Math.max(hi, p.vX, p.vY);
  if (hi <= 0) hi = 1;
  const series: Series[] = [
    { label: "V x", color: "#2b5789", value: (p) => p.vX },
    { label: "V y", color: "#6c9a3f", value: (p) => p.vY },
  ];
  for (const s of series) plot(ctx, rect, history, s, 0, 1.05 * hi);
}

export const REGION_COLORS: Record<number, string> = {
  1: "#cfe3c0",
  2: "#e7b2b4",
};

/** Two thin strips (x above y) coloring the active region over time. */
export function drawRegionStrip(
  ctx: Draw2D,
  rect: ChartRect,
  history: readonly HistoryPoint[],
): void {
  frame(ctx, rect, "active region (top: x, bottom: y)");
  if (history.length < 2) return;
  const [t0, t1] = timeRange(history);
  const half = rect.h / 2;
  for (let i = 1; i < history.length; i += 1) {
    const a = history[i - 1];
    const b = history[i];
    const x0 = rect.x + ((a.t - t0) / (t1 - t0)) * rect.w;
    const x1 = rect.x + ((b.t - t0) / (t1 - t0)) * rect.w;
    ctx.fillStyle = REGION_COLORS[a.regionX] ?? "#ddd";
    ctx.fillRect(x0, rect.y, Math.max(x1 - x0, 1), half);
    ctx.fillStyle = REGION_COLORS[a.regionY] ?? "#ddd";
    ctx.fillRect(x0, rect.y + half, Math.max(x1 - x0, 1), half);
  }
}
