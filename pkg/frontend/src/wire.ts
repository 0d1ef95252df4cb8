// Typed mirror of wire_schema.md (version 1). Every server frame is one
// JSON text message; clients drop frames whose schema version they do
// not understand.

export const SCHEMA_VERSION = 1;

export type Pair = [number, number];

export interface AxisPair<T> {
  x: T;
  y: T;
}

export interface SnapshotData {
  t_s: number;
  step: number;
  force_n: Pair;
  dev: AxisPair<Pair>;
  ref: AxisPair<Pair>;
  region: AxisPair<number>;
  limit_engaged: { x: boolean; y: boolean; any: boolean };
  gains: AxisPair<[Pair, Pair]>;
  q_rad: Pair;
  qd_radps: Pair;
  elbow_m: Pair;
  ee_m: Pair;
  ee_dev_m: Pair;
  tau_nm: Pair;
  wrench_n: Pair;
  lyap: { x: number; y: number; total: number };
  safe_limit_m: number;
  threshold_m: number;
  operating_point_m: Pair;
}

export interface HelloFrame {
  type: "hello";
  schema_version: number;
  epoch: number;
  decimation: number;
  dt_s: number;
  paused: boolean;
  terminated: string | null;
  config: Record<string, unknown>;
  snapshot: SnapshotData;
}

export interface SnapshotFrame {
  type: "snapshot";
  schema_version: number;
  seq: number;
  epoch: number;
  data: SnapshotData;
}

export interface EventFrame {
  type: "event";
  schema_version: number;
  kind: "paused" | "resumed" | "reset" | "config_updated";
  epoch: number;
  t_s: number;
}

export interface TerminalFrame {
  type: "terminal";
  schema_version: number;
  reason: string;
  message: string;
  epoch: number;
  t_s: number;
}

export interface ErrorFrame {
  type: "error";
  schema_version: number;
  label: string;
  message: string;
}

export type ServerFrame =
  | HelloFrame
  | SnapshotFrame
  | EventFrame
  | TerminalFrame
  | ErrorFrame;

const FRAME_TYPES = new Set(["hello", "snapshot", "event", "terminal", "error"]);

/** Parse one websocket text message into a typed frame.
 *  Returns null for frames of a different schema version (the documented
 *  drop rule); throws on malformed input. */
export function parseFrame(text: string): ServerFrame | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new Error("frame is not valid JSON");
  }
  if (typeof raw !== "object" || raw === null) {
    throw new Error("frame is not an object");
  }
  const frame = raw as Record<string, unknown>;
  if (typeof frame.type !== "string" || !FRAME_TYPES.has(frame.type)) {
    throw new Error(`unknown frame type ${JSON.stringify(frame.type)}`);
  }
  if (frame.schema_version !== SCHEMA_VERSION) {
    return null;
  }
  return frame as unknown as ServerFrame;
}

// -- client → server commands -------------------------------------------------

/** Hold an interaction force. The value is sent exactly as given: the
 *  server clamps and the next snapshot echoes what was applied. */
export function setForceCommand(fx: number, fy: number): string {
  return JSON.stringify({ type: "command", kind: "set_force", force_n: [fx, fy] });
}

export function releaseCommand(): string {
  return JSON.stringify({ type: "command", kind: "release" });
}

export function pauseCommand(): string {
  return JSON.stringify({ type: "command", kind: "pause" });
}

export function resumeCommand(): string {
  return JSON.stringify({ type: "command", kind: "resume" });
}

export function resetCommand(): string {
  return JSON.stringify({ type: "command", kind: "reset" });
}

export function overridesCommand(overrides: string[]): string {
  return JSON.stringify({ type: "command", kind: "set_config_overrides", overrides });
}
