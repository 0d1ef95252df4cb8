"""Command-line interface: artifact layout, overrides, error labels."""

import json

import numpy as np
import pytest

from admitswitch.cli import main
from admitswitch.sim import TRACE_COLUMNS

PAPER = "configs/paper_scenario.json"
STEP = "configs/stiff_step_response.json"


def run_cli(*argv):
    return main(list(argv))


# -- run -----------------------------------------------------------------------

def test_run_writes_all_artifacts(tmp_path, capsys):
    code = run_cli("run", STEP, "--out", str(tmp_path),
                   "--override", "duration_s=1")
    assert code == 0
    out = capsys.readouterr().out
    assert "scenario complete" in out
    for name in ("trace.csv", "metrics.json", "metrics.txt", "certificate.txt"):
        assert (tmp_path / name).exists(), name

    header = (tmp_path / "trace.csv").read_text().splitlines()[0]
    assert header == ",".join(TRACE_COLUMNS)

    metrics = json.loads((tmp_path / "metrics.json").read_text())
    txt_lines = (tmp_path / "metrics.txt").read_text().splitlines()
    txt_keys = [line.split(":", 1)[0] for line in txt_lines]
    assert txt_keys == sorted(metrics)
    assert all(": " in line for line in txt_lines)
    assert metrics["n_steps"] == 1000

    assert "CERTIFIED" in (tmp_path / "certificate.txt").read_text()


def test_run_zero_amplitude_override_gives_zero_motion(tmp_path):
    code = run_cli("run", PAPER, "--out", str(tmp_path),
                   "--override", "duration_s=1",
                   "--override", "force.amplitude_n=0")
    assert code == 0
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["max_abs_dev_pos_m"] == 0.0
    assert metrics["max_abs_torque_nm"] == 0.0
    assert metrics["switch_count_x"] == 0


def test_run_rejects_unstable_reference(tmp_path, capsys):
    code = run_cli("run", PAPER, "--out", str(tmp_path),
                   "--override", "reference.a_stiff=[[0,1],[20,-25]]")
    assert code == 1
    err = capsys.readouterr().err
    assert "not_hurwitz" in err
    assert not (tmp_path / "trace.csv").exists()


def test_run_unknown_key_names_field(tmp_path, capsys):
    code = run_cli("run", PAPER, "--out", str(tmp_path),
                   "--override", "force.ampl=3")
    assert code == 1
    err = capsys.readouterr().err
    assert "config_error" in err and "force.ampl" in err


def test_run_missing_config(tmp_path, capsys):
    code = run_cli("run", "configs/nope.json", "--out", str(tmp_path))
    assert code == 1
    assert "file_not_found" in capsys.readouterr().err


def test_run_malformed_json(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text("{ not json")
    code = run_cli("run", str(bad), "--out", str(tmp_path / "out"))
    assert code == 1
    assert "parse_error" in capsys.readouterr().err


# -- certify --------------------------------------------------------------------

def test_certify_prints_exact_sums(capsys):
    assert run_cli("certify", PAPER) == 0
    out = capsys.readouterr().out
    for fragment in ("-22.2", "-31.32", "-65.76", "-88.8", "-125.34",
                     "-190.56", "CERTIFIED"):
        assert fragment in out, fragment


def test_certify_accepts_supplied_valid_p(tmp_path, capsys):
    pfile = tmp_path / "p.json"
    pfile.write_text("[[8.16, 2.22], [2.22, 3.90]]")
    assert run_cli("certify", PAPER, "--check-p", str(pfile)) == 0
    assert "CERTIFIED" in capsys.readouterr().out


def test_certify_rejects_negative_identity(tmp_path, capsys):
    pfile = tmp_path / "p.txt"
    pfile.write_text("-1 0\n0 -1\n")  # plain-number matrix form
    code = run_cli("certify", PAPER, "--check-p", str(pfile))
    assert code == 1
    captured = capsys.readouterr()
    assert "not positive definite" in captured.err
    assert "cqlf_rejected" in captured.err
    assert "REJECTED" in captured.out


def test_certify_bad_matrix_file(tmp_path, capsys):
    pfile = tmp_path / "p.txt"
    pfile.write_text("1 2 3")
    assert run_cli("certify", PAPER, "--check-p", str(pfile)) == 1
    assert "config_error" in capsys.readouterr().err


# -- figures ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def figure_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("figs")
    assert run_cli("figures", PAPER, "--out", str(out),
                   "--override", "duration_s=2") == 0
    return out


def test_figures_emit_csv_and_script_pairs(figure_dir):
    for stem in ("fig1_reference", "fig2_gains", "fig3_xy", "fig4_torque"):
        assert (figure_dir / f"{stem}.csv").exists()
        script = (figure_dir / f"{stem}.gp").read_text()
        assert f"'{stem}.csv'" in script
        assert "plot " in script


def test_figures_gain_traces_start_at_soft_matched_row(figure_dir):
    lines = (figure_dir / "fig2_gains.csv").read_text().splitlines()
    first = [float(v) for v in lines[1].split(",")]
    assert first[0] == 0.0
    assert first[1:] == [-5.0, -9.0, -5.0, -9.0] * 2


def test_figures_xy_includes_safety_square(figure_dir):
    lines = (figure_dir / "fig3_xy.csv").read_text().splitlines()
    assert lines[0] == "ee_dev_x_m,ee_dev_y_m,square_x_m,square_y_m"
    square = [tuple(map(float, line.split(",")[2:4])) for line in lines[1:6]]
    assert square == [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0),
                      (-1.0, 1.0), (1.0, 1.0)]
    assert lines[6].endswith(",,")  # polyline ends, trajectory continues
    # trajectory starts at the operating point (deviation frame origin)
    assert [float(v) for v in lines[1].split(",")[:2]] == [0.0, 0.0]


def test_figures_torque_columns_parse(figure_dir):
    rows = (figure_dir / "fig4_torque.csv").read_text().splitlines()[1:]
    data = np.array([[float(v) for v in row.split(",")] for row in rows])
    assert data.shape[1] == 3
    assert np.all(np.isfinite(data))
    assert data[0, 0] == 0.0 and data[-1, 0] == pytest.approx(2.0)
