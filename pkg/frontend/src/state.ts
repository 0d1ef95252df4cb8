// Client-side view of the session. Everything rendered comes from
// server-confirmed frames; the only client-originated value kept here is
// the force the user *asked* for, so the UI can annotate when the
// server's echo was clamped.

import {
  Pair,
  ServerFrame,
  SnapshotData,
  TerminalFrame,
} from "./wire.js";

export type ConnectionStatus = "connecting" | "live" | "closed";

export interface HistoryPoint {
  t: number;
  refX: number;
  refY: number;
  devX: number;
  devY: number;
  regionX: number;
  regionY: number;
  vX: number;
  vY: number;
  /** gain rows flattened: [soft_pos, soft_vel, stiff_pos, stiff_vel] x then y */
  gains: number[];
}

export const DEFAULT_HISTORY_DEPTH_S = 30;

export class ViewState {
  status: ConnectionStatus = "connecting";
  latest: SnapshotData | null = null;
  terminal: TerminalFrame | null = null;
  paused = false;
  epoch = -1;
  decimation = 0;
  dtS = 0;
  /** rolling window of chart samples, trimmed to historyDepthS */
  history: HistoryPoint[] = [];
  /** rolling end-effector positions in the deviation frame */
  trail: Pair[] = [];
  /** last force the local user commanded (for the clamp annotation) */
  requestedForce: Pair | null = null;
  /** message of the last error frame addressed to this client */
  lastError: string | null = null;

  constructor(public historyDepthS: number = DEFAULT_HISTORY_DEPTH_S) {}

  /** True when the latest echoed force differs from what the user asked. */
  forceClamped(): boolean {
    if (!this.latest || !this.requestedForce) return false;
    const [ax, ay] = this.latest.force_n;
    const [rx, ry] = this.requestedForce;
    return Math.abs(ax - rx) > 1e-9 || Math.abs(ay - ry) > 1e-9;
  }

  apply(frame: ServerFrame): void {
    switch (frame.type) {
      case "hello":
        this.status = "live";
        this.epoch = frame.epoch;
        this.decimation = frame.decimation;
        this.dtS = frame.dt_s;
        this.paused = frame.paused;
        this.terminal = null;
        this.clearBuffers();
        this.pushSnapshot(frame.snapshot);
        break;
      case "snapshot":
        if (frame.epoch !== this.epoch) {
          // reset / config change happened: time restarted
          this.epoch = frame.epoch;
          this.clearBuffers();
        }
        this.pushSnapshot(frame.data);
        break;
      case "event":
        if (frame.kind === "paused") this.paused = true;
        if (frame.kind === "resumed") this.paused = false;
        if (frame.kind === "reset" || frame.kind === "config_updated") {
          this.terminal = null;
          this.requestedForce = null;
        }
        break;
      case "terminal":
        this.terminal = frame;
        break;
      case "error":
        this.lastError = `${frame.label}: ${frame.message}`;
        break;
    }
  }

  private clearBuffers(): void {
    this.history = [];
    this.trail = [];
  }

  private pushSnapshot(data: SnapshotData): void {
    this.latest = data;
    this.history.push({
      t: data.t_s,
      refX: data.ref.x[0],
      refY: data.ref.y[0],
      devX: data.dev.x[0],
      devY: data.dev.y[0],
      regionX: data.region.x,
      regionY: data.region.y,
      vX: data.lyap.x,
      vY: data.lyap.y,
      gains: [
        data.gains.x[0][0], data.gains.x[0][1],
        data.gains.x[1][0], data.gains.x[1][1],
        data.gains.y[0][0], data.gains.y[0][1],
        data.gains.y[1][0], data.gains.y[1][1],
      ],
    });
    this.trail.push([data.ee_dev_m[0], data.ee_dev_m[1]]);
    const horizon = data.t_s - this.historyDepthS;
    let drop = 0;
    while (drop < this.history.length && this.history[drop].t < horizon) {
      drop += 1;
    }
    if (drop > 0) {
      this.history.splice(0, drop);
      this.trail.splice(0, drop);
    }
  }
}
