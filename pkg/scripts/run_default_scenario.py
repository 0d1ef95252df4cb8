#!/usr/bin/env python3
"""Run the bundled default scenario and collect every artifact in one place.

Convenience wrapper over ``admitswitch run`` + ``admitswitch figures`` on
``configs/paper_scenario.json``: trace, metrics, certificate and the four
plot-ready figure files land under a single output directory.
"""

import argparse
from pathlib import Path

from admitswitch.cli import main as cli_main

REPO_ROOT = Path(__file__).resolve().parents[1]
DEFAULT_CONFIG = REPO_ROOT / "configs" / "paper_scenario.json"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(DEFAULT_CONFIG),
                        help="scenario file (JSON or YAML)")
    parser.add_argument("--out", default="artifacts",
                        help="output directory (created if missing)")
    parser.add_argument("--override", action="append", default=[],
                        metavar="PATH=VALUE",
                        help="config override, repeatable")
    args = parser.parse_args(argv)

    run_args = ["run", args.config, "--out", args.out]
    for item in args.override:
        run_args += ["--override", item]
    rc = cli_main(run_args)
    if rc:
        return rc

    fig_args = ["figures", args.config,
                "--out", str(Path(args.out) / "figures")]
    for item in args.override:
        fig_args += ["--override", item]
    return cli_main(fig_args)


if __name__ == "__main__":
    raise SystemExit(main())
