"""Command-line entry point.

Subcommands:

- ``run <config> --out <dir>``: execute a scenario, write ``trace.csv``,
  ``metrics.json``, ``metrics.txt`` and ``certificate.txt``.
- ``certify <config> [--check-p <file>]``: certify the scenario's
  Lyapunov matrix (or a user-supplied candidate) against its reference
  family and print the full certificate.
- ``figures <config> --out <dir>``: run the scenario and emit four
  plot-ready CSV files plus one gnuplot script per figure.
- ``serve <config> --port <p>``: host the interactive session.

Any failure prints the error class label plus the offending field or
step and exits nonzero.  The ``ADMIT_SWITCH_LOG`` environment variable
selects the log level (debug logs every region switch).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from .config import (ScenarioConfig, apply_overrides, assemble,
                     config_from_dict, load_config)
from .cqlf import certify, format_certificate, require_cqlf
from .errors import AdmitSwitchError, ConfigError
from .sim import Simulator
from .switched_reference import make_position_band_family

log = logging.getLogger("admitswitch")

#: summary metrics echoed to stdout after a run
_SUMMARY_KEYS = (
    "max_abs_dev_pos_x_m", "max_abs_dev_pos_y_m",
    "max_abs_ref_pos_x_m", "max_abs_ref_pos_y_m",
    "max_abs_torque_nm", "switch_count_x", "switch_count_y",
    "safety_violation_steps", "runtime_s",
)


def _setup_logging():
    level = os.environ.get("ADMIT_SWITCH_LOG", "warning").strip().lower()
    numeric = {"debug": logging.DEBUG, "info": logging.INFO,
               "warning": logging.WARNING, "error": logging.ERROR}.get(
                   level, logging.WARNING)
    logging.basicConfig(level=numeric, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _load_scenario(path: str, overrides: list[str] | None) -> ScenarioConfig:
    if not overrides:
        return load_config(path)
    p = Path(path)
    text = p.read_text()
    if p.suffix.lower() in (".yaml", ".yml"):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigError("<root>", "scenario must be a mapping")
    return config_from_dict(apply_overrides(data, overrides))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _write_metrics(out: Path, metrics: dict):
    with open(out / "metrics.json", "w") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "metrics.txt", "w") as fh:
        for key in sorted(metrics):
            fh.write(f"{key}: {_fmt(metrics[key])}\n")


def cmd_run(args) -> int:
    cfg = _load_scenario(args.config, args.override)
    bundle = assemble(cfg)
    sim = Simulator(bundle, audit=args.audit)
    log.info("running %s: %d steps at dt = %g s", args.config,
             cfg.n_steps, cfg.dt_s)
    result = sim.run()
    for ev in result.switches:
        log.debug("switch %s: region %d -> %d at t = %.4f s",
                  ev.axis, ev.from_index, ev.to_index, ev.t_s)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result.trace.to_csv(out / "trace.csv")
    _write_metrics(out, result.metrics)
    with open(out / "certificate.txt", "w") as fh:
        fh.write(format_certificate(bundle.certificate))
        fh.write("\n")
    log.info("wrote trace.csv, metrics.json, metrics.txt, certificate.txt to %s", out)

    print(f"scenario complete: {result.metrics['n_steps']} steps, "
          f"outputs in {out}")
    for key in _SUMMARY_KEYS:
        print(f"  {key}: {_fmt(result.metrics[key])}")
    return 0


def _read_matrix(path: str) -> np.ndarray:
    """2x2 matrix from a file: JSON, or four whitespace/comma numbers."""
    text = Path(path).read_text()
    try:
        return np.array(json.loads(text), dtype=float).reshape(2, 2)
    except (json.JSONDecodeError, TypeError, ValueError):
        pass
    tokens = text.replace(",", " ").split()
    try:
        values = [float(tok) for tok in tokens]
    except ValueError:
        values = []
    if len(values) != 4:
        raise ConfigError(path, "expected a 2x2 matrix (JSON or four numbers)")
    return np.array(values, dtype=float).reshape(2, 2)


def cmd_certify(args) -> int:
    cfg = _load_scenario(args.config, args.override)
    if args.check_p is not None:
        family = make_position_band_family(
            threshold=cfg.reference.threshold_m,
            a_soft=np.array(cfg.reference.a_soft, dtype=float),
            a_stiff=np.array(cfg.reference.a_stiff, dtype=float))
        cert = certify(_read_matrix(args.check_p), family.matrices)
        print(format_certificate(cert))
        if not cert.ok:
            # raises with the precise rejection reason
            require_cqlf(cert.P, family.matrices)
        return 0
    bundle = assemble(cfg)  # resolves, searches and certifies
    print(format_certificate(bundle.certificate))
    return 0


def _write_columns(path: Path, header: tuple[str, ...], columns):
    """CSV with ragged columns: shorter ones trail off as empty fields."""
    columns = [list(col) for col in columns]
    n = max(len(col) for col in columns)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header))
        fh.write("\n")
        for k in range(n):
            cells = []
            for col in columns:
                cells.append(f"{col[k]:.9g}" if k < len(col) else "")
            fh.write(",".join(cells))
            fh.write("\n")


def _gnuplot(path: Path, title: str, xlabel: str, ylabel: str, plot: str):
    path.write_text(
        "set datafile separator ','\n"
        f"set title '{title}'\n"
        f"set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"
        "set grid\nset key outside\n"
        f"plot {plot}\n")


def cmd_figures(args) -> int:
    cfg = _load_scenario(args.config, args.override)
    bundle = assemble(cfg)
    result = Simulator(bundle).run()
    tr = result.trace
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lim = cfg.reference.safe_limit_m
    t = tr.column("t_s")

    _write_columns(
        out / "fig1_reference.csv",
        ("t_s", "ref_pos_x_m", "ref_pos_y_m", "dev_pos_x_m", "dev_pos_y_m",
         "region_x", "region_y"),
        (t, tr.column("ref_pos_x_m"), tr.column("ref_pos_y_m"),
         tr.column("dev_pos_x_m"), tr.column("dev_pos_y_m"),
         tr.column("region_x"), tr.column("region_y")))
    _gnuplot(out / "fig1_reference.gp",
             "virtual reference trajectory", "t [s]", "deviation [m]",
             "'fig1_reference.csv' using 1:2 with lines title 'x reference', "
             "'' using 1:3 with lines title 'y reference', "
             f"{lim:g} with lines dashtype 2 lc rgb 'gray' title 'safe limit', "
             f"{-lim:g} with lines dashtype 2 lc rgb 'gray' notitle")

    gain_cols = ("gain_soft_pos_x", "gain_soft_vel_x",
                 "gain_stiff_pos_x", "gain_stiff_vel_x",
                 "gain_soft_pos_y", "gain_soft_vel_y",
                 "gain_stiff_pos_y", "gain_stiff_vel_y")
    _write_columns(out / "fig2_gains.csv", ("t_s",) + gain_cols,
                   (t,) + tuple(tr.column(c) for c in gain_cols))
    parts = []
    for i, name in enumerate(gain_cols):
        src = "'fig2_gains.csv'" if i == 0 else "''"
        parts.append(f"{src} using 1:{i + 2} with lines title '{name}'")
    plot2 = ", ".join(parts)
    _gnuplot(out / "fig2_gains.gp", "adaptive feedback gains", "t [s]",
             "gain", plot2)

    ee_dev_x = tr.column("ee_x_m") - float(bundle.operating_point[0])
    ee_dev_y = tr.column("ee_y_m") - float(bundle.operating_point[1])
    square_x = [lim, lim, -lim, -lim, lim]
    square_y = [lim, -lim, -lim, lim, lim]
    _write_columns(out / "fig3_xy.csv",
                   ("ee_dev_x_m", "ee_dev_y_m", "square_x_m", "square_y_m"),
                   (ee_dev_x, ee_dev_y, square_x, square_y))
    _gnuplot(out / "fig3_xy.gp",
             "end-effector trajectory (deviation frame)",
             "x deviation [m]", "y deviation [m]",
             "'fig3_xy.csv' using 1:2 with lines title 'end effector', "
             "'' using 3:4 with lines dashtype 2 lc rgb 'red' title 'safety square'")

    _write_columns(out / "fig4_torque.csv", ("t_s", "tau1_nm", "tau2_nm"),
                   (t, tr.column("tau1_nm"), tr.column("tau2_nm")))
    _gnuplot(out / "fig4_torque.gp", "commanded joint torque", "t [s]",
             "torque [N m]",
             "'fig4_torque.csv' using 1:2 with lines title 'joint 1', "
             "'' using 1:3 with lines title 'joint 2', "
             "30 with lines dashtype 2 lc rgb 'gray' title 'motor envelope', "
             "-30 with lines dashtype 2 lc rgb 'gray' notitle")

    print(f"wrote fig1_reference, fig2_gains, fig3_xy, fig4_torque "
          f"(csv + gp) to {out}")
    return 0


def cmd_serve(args) -> int:
    from .live import serve  # lazy: pulls in the network stack

    cfg = _load_scenario(args.config, args.override)
    serve(cfg, host=args.host, port=args.port)
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="admitswitch",
        description="switched adaptive admittance control simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("config", help="scenario file (JSON or YAML)")
        p.add_argument("--override", action="append", default=[],
                       metavar="dotted.path=value",
                       help="override a config entry (repeatable)")

    p_run = sub.add_parser("run", help="run a scenario and export artifacts")
    add_common(p_run)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--audit", choices=("all", "none"), default="all",
                       help="per-step Lyapunov audit enforcement")
    p_run.set_defaults(func=cmd_run)

    p_cert = sub.add_parser("certify",
                            help="certify the Lyapunov matrix for a scenario")
    add_common(p_cert)
    p_cert.add_argument("--check-p", metavar="FILE",
                        help="certify this candidate matrix instead")
    p_cert.set_defaults(func=cmd_certify)

    p_fig = sub.add_parser("figures", help="export plot-ready figure data")
    add_common(p_fig)
    p_fig.add_argument("--out", required=True, help="output directory")
    p_fig.set_defaults(func=cmd_figures)

    p_srv = sub.add_parser("serve", help="host an interactive session")
    add_common(p_srv)
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except AdmitSwitchError as exc:
        print(f"{exc.label}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"file_not_found: {exc}", file=sys.stderr)
        return 1
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        print(f"parse_error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
