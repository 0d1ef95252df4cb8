// Shared test utilities: fixture loading, a snapshot-data factory with
// sane defaults, and a recording fake of the minimal 2D draw interface.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { Draw2D } from "../src/scene.js";
import { SnapshotData, SnapshotFrame, SCHEMA_VERSION } from "../src/wire.js";

export function fixturePath(name: string): string {
  const here = dirname(fileURLToPath(import.meta.url));
  return join(here, "..", "fixtures", name);
}

export function readFixture(name: string): string {
  return readFileSync(fixturePath(name), "utf8");
}

export function makeSnapshot(
  overrides: Partial<SnapshotData> = {},
): SnapshotData {
  return {
    t_s: 0,
    step: 0,
    force_n: [0, 0],
    dev: { x: [0, 0], y: [0, 0] },
    ref: { x: [0, 0], y: [0, 0] },
    region: { x: 1, y: 1 },
    limit_engaged: { x: false, y: false, any: false },
    gains: {
      x: [
        [-5, -9],
        [-5, -9],
      ],
      y: [
        [-5, -9],
        [-5, -9],
      ],
    },
    q_rad: [-0.5758964005011373, 2.722589127797171],
    qd_radps: [0, 0],
    elbow_m: [0.7128988008152424, -0.4628988008152424],
    ee_m: [0.25, 0.25],
    ee_dev_m: [0, 0],
    tau_nm: [0, 0],
    wrench_n: [0, 0],
    lyap: { x: 0.2405, y: 0.2405, total: 0.481 },
    safe_limit_m: 1.0,
    threshold_m: 0.998,
    operating_point_m: [0.25, 0.25],
    ...overrides,
  };
}

export function makeSnapshotFrame(
  data: SnapshotData,
  seq = 1,
  epoch = 0,
): SnapshotFrame {
  return { type: "snapshot", schema_version: SCHEMA_VERSION, seq, epoch, data };
}

export interface DrawOp {
  op: string;
  args: number[];
  strokeStyle: string;
  fillStyle: string;
  lineWidth: number;
  dash: number[];
}

/** Records every draw call together with the style in force at the time,
 *  so tests can assert both geometry and styling. */
export class FakeDraw2D implements Draw2D {
  lineWidth = 1;
  strokeStyle = "";
  fillStyle = "";
  font = "";
  ops: DrawOp[] = [];
  private dash: number[] = [];

  private log(op: string, args: number[] = []): void {
    this.ops.push({
      op,
      args,
      strokeStyle: this.strokeStyle,
      fillStyle: this.fillStyle,
      lineWidth: this.lineWidth,
      dash: [...this.dash],
    });
  }

  beginPath(): void {
    this.log("beginPath");
  }
  moveTo(x: number, y: number): void {
    this.log("moveTo", [x, y]);
  }
  lineTo(x: number, y: number): void {
    this.log("lineTo", [x, y]);
  }
  arc(x: number, y: number, r: number, a0: number, a1: number): void {
    this.log("arc", [x, y, r, a0, a1]);
  }
  rect(x: number, y: number, w: number, h: number): void {
    this.log("rect", [x, y, w, h]);
  }
  stroke(): void {
    this.log("stroke");
  }
  fill(): void {
    this.log("fill");
  }
  clearRect(x: number, y: number, w: number, h: number): void {
    this.log("clearRect", [x, y, w, h]);
  }
  fillRect(x: number, y: number, w: number, h: number): void {
    this.log("fillRect", [x, y, w, h]);
  }
  fillText(_text: string, x: number, y: number): void {
    this.log("fillText", [x, y]);
  }
  setLineDash(segments: number[]): void {
    this.dash = [...segments];
    this.log("setLineDash", [...segments]);
  }

  named(op: string): DrawOp[] {
    return this.ops.filter((o) => o.op === op);
  }
}
