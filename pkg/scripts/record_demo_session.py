#!/usr/bin/env python3
"""Record live-session wire streams into JSONL fixtures for the browser UI.

Each output line is ``{"dir": "rx"|"tx", "frame": {...}}``: ``rx`` frames
are exactly what a connected client would have received (hello, decimated
snapshots, terminal), ``tx`` lines are the commands the scripted client
sent, kept inline so a replayer can segment the Lyapunov trace at force
edits. Two fixtures are produced:

* ``session_paper.jsonl`` — the bundled default scenario over one force
  period (no client commands), for trail-rendering checks.
* ``session_interactive.jsonl`` — an externally driven session with three
  scripted force edits, including an oversized command the server clamps
  and a push that engages the stiff region.

The session is stepped synchronously (no event loop) but every command
passes through the normal wire parsing and application path, so the
recorded frames match the live protocol byte for byte.
"""

import argparse
import json
from pathlib import Path

from admitswitch.config import config_from_dict, config_to_dict, load_config
from admitswitch.live import LiveSession, parse_command

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = REPO_ROOT / "configs"

#: one full period of the default scenario's 0.5 rad/s force profile is
#: 4*pi = 12.566 s; record two periods (rounded to a snapshot boundary)
#: because the first one still carries the spiral-out transient from rest
#: while the second traces the steady, closed-ish loop
PAPER_FIXTURE_DURATION_S = 25.14

#: scripted pushes stay mostly single-axis: a sustained diagonal push parks
#: the end effector near the safety-square corner, 1.77 m from the base and
#: outside this arm's 1.7 m reach, which (by design) terminates the session
INTERACTIVE_DURATION_S = 12.0
INTERACTIVE_EDITS = (
    (1.0, {"type": "command", "kind": "set_force", "force_n": [10.0, 3.0]}),
    (4.0, {"type": "command", "kind": "set_force", "force_n": [25.0, 0.0]}),
    (8.0, {"type": "command", "kind": "release"}),
)


def record(cfg, edits, out_path: Path, decimation: int = 20) -> int:
    session = LiveSession(cfg, decimation=decimation, pace=False)
    pending = sorted(edits, key=lambda item: item[0])
    lines = [{"dir": "rx", "frame": session.hello_frame()}]

    chunks, rem = divmod(cfg.n_steps, decimation)
    if rem:
        raise SystemExit("duration must be a whole number of snapshot chunks")
    for _ in range(chunks):
        while pending and session.sim.t >= pending[0][0] - 1e-9:
            _, command = pending.pop(0)
            lines.append({"dir": "tx", "frame": command})
            kind, payload = parse_command(command)
            session._apply(None, kind, payload)
        session.sim.advance(decimation)
        lines.append({"dir": "rx", "frame": session.snapshot_frame()})

    session._terminate("complete", "scenario duration reached")
    lines.append({"dir": "rx", "frame": session._terminal_frame})

    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w") as fh:
        for line in lines:
            fh.write(json.dumps(line, separators=(",", ":")) + "\n")
    return len(lines)


def load_with_duration(path: Path, duration_s: float):
    data = config_to_dict(load_config(path))
    data["duration_s"] = duration_s
    return config_from_dict(data)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir",
                        default=str(REPO_ROOT / "frontend" / "fixtures"),
                        help="directory for the JSONL fixtures")
    args = parser.parse_args(argv)
    out_dir = Path(args.out_dir)

    cfg = load_with_duration(CONFIG_DIR / "paper_scenario.json",
                             PAPER_FIXTURE_DURATION_S)
    n = record(cfg, (), out_dir / "session_paper.jsonl")
    print(f"session_paper.jsonl: {n} lines")

    cfg = load_with_duration(CONFIG_DIR / "live_demo.json",
                             INTERACTIVE_DURATION_S)
    n = record(cfg, INTERACTIVE_EDITS, out_dir / "session_interactive.jsonl")
    print(f"session_interactive.jsonl: {n} lines")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
