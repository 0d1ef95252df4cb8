// Recorded-session replay. Fixtures are JSONL files produced by the
// server-side recorder: each line is {"dir": "rx"|"tx", "frame": ...}
// where rx frames are exactly what a live client would have received
// and tx lines are the commands the scripted client sent (kept inline
// so the Lyapunov trace can be segmented at force edits).

import { parseFrame, ServerFrame, SnapshotFrame } from "./wire.js";

export interface RecordedLine {
  dir: "rx" | "tx";
  frame: Record<string, unknown>;
}

export function parseSessionJsonl(text: string): RecordedLine[] {
  const lines: RecordedLine[] = [];
  for (const row of text.split("\n")) {
    const trimmed = row.trim();
    if (!trimmed) continue;
    const parsed = JSON.parse(trimmed) as RecordedLine;
    if (parsed.dir !== "rx" && parsed.dir !== "tx") {
      throw new Error(`bad direction tag ${JSON.stringify(parsed.dir)}`);
    }
    lines.push(parsed);
  }
  return lines;
}

/** The received frames of a recording, revalidated through the normal
 *  wire parser (drops nothing for a same-version recording). */
export function receivedFrames(lines: readonly RecordedLine[]): ServerFrame[] {
  const frames: ServerFrame[] = [];
  for (const line of lines) {
    if (line.dir !== "rx") continue;
    const frame = parseFrame(JSON.stringify(line.frame));
    if (frame !== null) frames.push(frame);
  }
  return frames;
}

export interface ForceSegment {
  /** the command that opened this segment, null for the leading one */
  edit: Record<string, unknown> | null;
  snapshots: SnapshotFrame[];
}

const FORCE_EDIT_KINDS = new Set(["set_force", "release"]);

/** Split the snapshot stream at the force edits the recorded client
 *  sent. Within each segment the applied force is constant (or follows
 *  the scenario profile), so the Lyapunov trace must not increase. */
export function segmentByForceEdits(
  lines: readonly RecordedLine[],
): ForceSegment[] {
  const segments: ForceSegment[] = [{ edit: null, snapshots: [] }];
  for (const line of lines) {
    if (line.dir === "tx") {
      if (FORCE_EDIT_KINDS.has(String(line.frame.kind))) {
        segments.push({ edit: line.frame, snapshots: [] });
      }
      continue;
    }
    if (line.frame.type === "snapshot") {
      const frame = parseFrame(JSON.stringify(line.frame));
      if (frame && frame.type === "snapshot") {
        segments[segments.length - 1].snapshots.push(frame);
      }
    }
  }
  return segments;
}

/** Worst step-to-step increase of the total Lyapunov value (a decreasing
 *  trace yields a non-positive number). */
export function worstLyapunovIncrease(
  snapshots: readonly SnapshotFrame[],
): number {
  let worst = -Infinity;
  for (let i = 1; i < snapshots.length; i += 1) {
    worst = Math.max(
      worst,
      snapshots[i].data.lyap.total - snapshots[i - 1].data.lyap.total,
    );
  }
  return worst;
}

/** Paced playback of a recording: call step(now) regularly (e.g. from an
 *  animation-frame loop) and forward due frames to the sink. tx lines
 *  pace with the stream but are not delivered. */
export class ReplayPlayer {
  private index = 0;
  private startWallS: number | null = null;
  private baseT = 0;

  constructor(
    private readonly lines: readonly RecordedLine[],
    private readonly sink: (frame: ServerFrame) => void,
    private readonly speed: number = 1,
  ) {}

  get done(): boolean {
    return this.index >= this.lines.length;
  }

  /** Deliver every frame whose recorded time has come; wallNowS is a
   *  monotonic clock in seconds. The nanosecond slack keeps a frame due
   *  exactly now from slipping a step when the wall-clock subtraction
   *  rounds a hair short of the recorded time. */
  step(wallNowS: number): void {
    if (this.startWallS === null) {
      this.startWallS = wallNowS;
      this.baseT = this.firstTime() ?? 0;
    }
    const due = this.baseT + (wallNowS - this.startWallS) * this.speed + 1e-9;
    while (this.index < this.lines.length) {
      const line = this.lines[this.index];
      const t = recordedTime(line);
      if (t !== null && t > due) break;
      this.index += 1;
      if (line.dir !== "rx") continue;
      const frame = parseFrame(JSON.stringify(line.frame));
      if (frame !== null) this.sink(frame);
    }
  }

  private firstTime(): number | null {
    for (const line of this.lines) {
      const t = recordedTime(line);
      if (t !== null) return t;
    }
    return null;
  }
}

function recordedTime(line: RecordedLine): number | null {
  if (line.dir !== "rx") return null;
  const frame = line.frame as { type?: string; t_s?: number; data?: { t_s?: number } };
  if (frame.type === "snapshot" && frame.data) return frame.data.t_s ?? null;
  if (frame.type === "event" || frame.type === "terminal") return frame.t_s ?? null;
  return null;
}
