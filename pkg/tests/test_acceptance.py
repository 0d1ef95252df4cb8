"""Acceptance gate: one test per top-level criterion, each at its stated
tolerance, each printing a single `ACCEPTANCE <n>: PASS|FAIL` line (shown
by pytest for failures; pass lines are in the captured output).

Criterion 8 runs here as a headless wire client against the live
service. Criterion 9 (UI smoke) lives in the frontend's vitest suite;
its gate line below shells out to `npm test` when that is installed.

Criteria 2 and 4 assert the stated bounds verbatim even though the
scenario physics lands outside them (see the detail lines: the adaptive
transient at first boundary contact peaks near 1.005 m against the
1.002 m gate, and the stiffened step response needs about 5.6 s to
settle within 1% against the 5 s gate). The failures are the faithful
result, not a defect in the checks around them.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from admitswitch.admittance import (AdaptiveAdmittanceParams, ChannelState,
                                    rk4_channel_step)
from admitswitch.config import config_from_dict, load_config
from admitswitch.cqlf import certify, is_hurwitz, lyap_solve
from admitswitch.live import create_app
from admitswitch.manipulator import (JointState, TwoLinkParams, apply_torque,
                                     forward_kinematics, jacobian,
                                     joint_dynamics_terms, total_energy)
from admitswitch.sim import run_scenario
from admitswitch.switched_reference import A_MODEL_SOFT, A_MODEL_STIFF

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

P_CANDIDATE = np.array([[8.16, 2.22], [2.22, 3.90]])
SUM_ORACLE_SOFT = np.array([[-22.2, -31.32], [-31.32, -65.76]])
SUM_ORACLE_STIFF = np.array([[-88.8, -125.34], [-125.34, -190.56]])


def report(criterion: int, ok: bool, detail: str) -> str:
    line = f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    return line


@pytest.fixture(scope="module")
def paper_run():
    return run_scenario(load_config(CONFIG_DIR / "paper_scenario.json"))


@pytest.fixture(scope="module")
def counterfactual_run():
    return run_scenario(load_config(CONFIG_DIR / "counterfactual_soft_only.json"))


def test_criterion_1_cqlf_certificate_exact_sums_under_1ms():
    family = (A_MODEL_SOFT, A_MODEL_STIFF)
    certify(P_CANDIDATE, family)  # warm-up outside the timed call
    started = time.perf_counter()
    cert = certify(P_CANDIDATE, family)
    elapsed = time.perf_counter() - started

    sums_exact = (np.allclose(cert.subsystems[0].S, SUM_ORACLE_SOFT, atol=1e-12)
                  and np.allclose(cert.subsystems[1].S, SUM_ORACLE_STIFF,
                                  atol=1e-12))
    both_negative = all(r.negative_definite for r in cert.subsystems)
    ok = cert.ok and sums_exact and both_negative and elapsed < 1e-3
    line = report(1, ok, f"sums exact={sums_exact}, negative definite="
                         f"{both_negative}, certified={cert.ok}, "
                         f"runtime={elapsed * 1e6:.1f} us")
    assert ok, line


def test_criterion_2_safety_bound_and_counterfactual(paper_run,
                                                     counterfactual_run):
    m = paper_run.metrics
    slack = 1.0 + 2e-3
    plant_x = m["max_abs_dev_pos_x_m"]
    plant_y = m["max_abs_dev_pos_y_m"]
    model_x = m["max_abs_ref_pos_x_m"]
    model_y = m["max_abs_ref_pos_y_m"]
    bound_ok = plant_x <= slack and plant_y <= slack
    runtime_ok = m["runtime_s"] < 10.0

    # locked-compliant counterfactual: the whole run must leave the safe
    # square, and the steady oscillation amplitude must match the
    # analytic single-subsystem oracle 1.146 m within 2 %
    tr = counterfactual_run.trace
    t = tr.column("t_s")
    late = t >= 40.0
    amp_x = float(np.abs(tr.column("dev_pos_x_m"))[late].max())
    amp_y = float(np.abs(tr.column("dev_pos_y_m"))[late].max())
    exceeds = counterfactual_run.metrics["max_abs_dev_pos_m"] > 1.0
    amp_ok = (abs(amp_x - 1.146) <= 0.02 * 1.146
              and abs(amp_y - 1.146) <= 0.02 * 1.146)

    ok = bound_ok and runtime_ok and exceeds and amp_ok
    line = report(
        2, ok,
        f"plant max|dev|=({plant_x:.6f}, {plant_y:.6f}) vs {slack:.3f} "
        f"(reference model: {model_x:.6f}, {model_y:.6f}); "
        f"counterfactual exceeds 1.0={exceeds}, steady amplitude="
        f"({amp_x:.4f}, {amp_y:.4f}) vs 1.146 +-2%; "
        f"runtime={m['runtime_s']:.2f} s < 10 s: {runtime_ok}")
    assert ok, line


def test_criterion_3_lyapunov_audit_and_pinned_gain_decay(paper_run):
    m = paper_run.metrics
    worst = max(m["lyap_max_step_increase_x"], m["lyap_max_step_increase_y"])
    audit_ok = worst <= 1e-6

    # pinned gains: adaptation frozen at the matched values, so the
    # model-following error contracts at the active subsystem's slowest
    # pole; fit the tail slope of log ||e||
    params = AdaptiveAdmittanceParams(adapt_rates=(1e-12, 1e-12))
    dt = 1e-3
    decays = {}
    for index in (1, 2):
        state = ChannelState(dev=np.array([0.3, 0.0]), dev_ref=np.zeros(2),
                             gains=params.matched_gains().copy())
        norms = [math.hypot(state.dev[0], state.dev[1])]
        for k in range(5000):
            state = rk4_channel_step(params, state, lambda t: 0.0,
                                     k * dt, dt, index)
            norms.append(math.hypot(state.dev[0] - state.dev_ref[0],
                                    state.dev[1] - state.dev_ref[1]))
        t = np.arange(5001) * dt
        window = t >= 2.0
        slope = float(np.polyfit(t[window],
                                 np.log(np.asarray(norms))[window], 1)[0])
        rate = params.family.slowest_decay_rate(index)
        decays[index] = (-slope, rate)
    decay_ok = all(abs(meas - rate) <= 0.05 * rate
                   for meas, rate in decays.values())

    ok = audit_ok and decay_ok
    line = report(
        3, ok,
        f"max per-step dV={worst:.3e} <= 1e-6: {audit_ok}; decay rates "
        f"subsystem1 measured={decays[1][0]:.5f} vs {decays[1][1]:.5f}, "
        f"subsystem2 measured={decays[2][0]:.5f} vs {decays[2][1]:.5f} (+-5%)")
    assert ok, line


def test_criterion_4_stiff_step_reaches_limit_by_5s():
    result = run_scenario(load_config(CONFIG_DIR / "stiff_step_response.json"))
    tr = result.trace
    plant_final = float(tr.column("dev_pos_x_m")[-1])
    model_final = float(tr.column("ref_pos_x_m")[-1])
    ok = abs(plant_final - 1.0) <= 0.01
    line = report(
        4, ok,
        f"plant deviation at t=5 s: {plant_final:.6f} vs 1.000 +-1% "
        f"(reference model: {model_final:.6f}; steady state is exactly "
        f"20 N / 20 N m^-1 = 1.0)")
    assert ok, line


def test_criterion_5_torque_envelope(paper_run):
    achieved = paper_run.metrics["max_abs_torque_nm"]
    ok = achieved <= 30.0
    line = report(5, ok, f"max joint torque achieved={achieved:.3f} N m "
                         f"<= 30 N m")
    assert ok, line


def test_criterion_6_dynamics_invariant_suite():
    started = time.perf_counter()
    arm = TwoLinkParams()
    rng = np.random.default_rng(20240814)

    # (a) analytic Jacobian vs central finite difference, 100 poses
    h = 1e-7
    jac_worst = 0.0
    for _ in range(100):
        q = rng.uniform(-math.pi, math.pi, 2)
        J = jacobian(arm, q)
        fd = np.empty((2, 2))
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd[:, k] = (forward_kinematics(arm, q + e)
                        - forward_kinematics(arm, q - e)) / (2.0 * h)
        jac_worst = max(jac_worst, float(np.abs(J - fd).max()))
    jac_ok = jac_worst < 1e-6

    # (b) dM/dt - 2C skew-symmetric along free trajectories
    skew_worst = 0.0
    for _ in range(5):
        state = JointState(q=rng.uniform(-1.5, 1.5, 2),
                           qdot=rng.uniform(-1.0, 1.0, 2))
        for step in range(200):
            state = apply_torque(arm, state, np.zeros(2), np.zeros(2), 1e-3)
            if step % 20 != 0:
                continue
            dq = state.qdot * h
            m_plus = joint_dynamics_terms(
                arm, JointState(q=state.q + dq, qdot=state.qdot)).M
            m_minus = joint_dynamics_terms(
                arm, JointState(q=state.q - dq, qdot=state.qdot)).M
            m_dot = (m_plus - m_minus) / (2.0 * h)
            S = m_dot - 2.0 * joint_dynamics_terms(arm, state).C
            skew_worst = max(skew_worst, float(np.abs(S + S.T).max()))
    skew_ok = skew_worst < 1e-6

    # (c) free-motion energy conservation over 1 s (gravity on)
    state = JointState(q=np.array([0.4, 0.9]), qdot=np.array([0.7, -0.5]))
    e0 = total_energy(arm, state)
    drift = 0.0
    for _ in range(1000):
        state = apply_torque(arm, state, np.zeros(2), np.zeros(2), 1e-3)
        drift = max(drift, abs(total_energy(arm, state) - e0))
    energy_rel = drift / max(abs(e0), 1e-12)
    energy_ok = energy_rel < 1e-6

    # (d) Lyapunov-equation residual over 1000 random Hurwitz matrices
    lyap_worst = 0.0
    count = 0
    I = np.eye(2)
    while count < 1000:
        A = rng.uniform(-3.0, 3.0, (2, 2))
        if not is_hurwitz(A):
            continue
        P = lyap_solve(A, I)
        lyap_worst = max(lyap_worst,
                         float(np.abs(A.T @ P + P @ A + I).max()))
        count += 1
    lyap_ok = lyap_worst < 1e-10

    elapsed = time.perf_counter() - started
    ok = jac_ok and skew_ok and energy_ok and lyap_ok and elapsed < 5.0
    line = report(
        6, ok,
        f"jacobian FD worst={jac_worst:.2e} (<1e-6), "
        f"skew residual worst={skew_worst:.2e} (<1e-6), "
        f"energy drift={energy_rel:.2e} rel (<1e-6), "
        f"lyapunov residual worst={lyap_worst:.2e} (<1e-10), "
        f"runtime={elapsed:.2f} s (<5 s)")
    assert ok, line


def test_criterion_7_byte_identical_traces(paper_run, tmp_path):
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    paper_run.trace.to_csv(first)
    rerun = run_scenario(load_config(CONFIG_DIR / "paper_scenario.json"))
    rerun.trace.to_csv(second)
    identical = first.read_bytes() == second.read_bytes()
    line = report(7, identical,
                  f"trace.csv runs byte-identical={identical} "
                  f"({first.stat().st_size} bytes)")
    assert identical, line


def test_criterion_8_wire_round_trip_and_boundary_flip():
    from admitswitch.manipulator import inverse_kinematics

    q0 = inverse_kinematics(TwoLinkParams(), (0.25, 0.25))
    cfg = config_from_dict({
        "duration_s": 3600.0,
        "arm": {"gravity_enabled": False,
                "q0_rad": [float(q0[0]), float(q0[1])]},
        "force": {"kind": "external"},
    })
    app = create_app(cfg, decimation=20, pace=False)

    def recv(ws):
        return json.loads(ws.receive_text())

    def send(ws, kind, **extra):
        ws.send_text(json.dumps({"type": "command", "kind": kind, **extra}))

    def read_until_event(ws, kind, limit=500):
        for _ in range(limit):
            frame = recv(ws)
            if frame["type"] == "event" and frame["kind"] == kind:
                return True
        return False

    with TestClient(app) as tc, tc.websocket_connect("/ws") as ws:
        hello = recv(ws)
        assert hello["type"] == "hello"

        # pause first so the free-running session cannot queue stale
        # snapshots between the command and its echo
        send(ws, "pause")
        assert read_until_event(ws, "paused")
        send(ws, "set_force", force_n=[25.0, 0.0])
        send(ws, "resume")
        assert read_until_event(ws, "resumed")

        frame = recv(ws)
        while frame["type"] != "snapshot":
            frame = recv(ws)
        echo_ok = frame["data"]["force_n"] == [20.0, 0.0]

        # hold the force; the streamed reference position rises toward
        # its compliant steady state of 4 m and must flip the region
        # strip and the safety flag as it crosses the 0.998 m threshold.
        # The region is latched at the start of each 1 ms step while the
        # stream shows end-of-step state, so the strip may trail the
        # displayed crossing by at most one 20 ms frame.
        thr = 0.998
        cross_idx = flip_idx = None
        cross_limit = flip_limit_any = None
        pre_cross_limits = []
        idx = 0
        while flip_idx is None and idx < 2000:
            if frame["type"] == "snapshot":
                data = frame["data"]
                if cross_idx is None and abs(data["ref"]["x"][0]) > thr:
                    cross_idx = idx
                    cross_limit = data["limit_engaged"]["x"]
                elif cross_idx is None:
                    pre_cross_limits.append(data["limit_engaged"]["x"])
                if data["region"]["x"] == 2:
                    flip_idx = idx
                    flip_limit_any = data["limit_engaged"]["any"]
                idx += 1
            frame = recv(ws)

        flip_ok = (cross_idx is not None and flip_idx is not None
                   and 0 <= flip_idx - cross_idx <= 1
                   and cross_limit is True
                   and flip_limit_any is True
                   and not any(pre_cross_limits))

    ok = echo_ok and flip_ok
    line = report(
        8, ok,
        f"set_force [25,0] echoed [20,0] in the next snapshot: {echo_ok}; "
        f"|ref| crossed 0.998 at frame {cross_idx}, region flipped at "
        f"frame {flip_idx}, safety flag aligned with the crossing: {flip_ok}")
    assert ok, line


def test_criterion_9_ui_smoke_via_frontend_suite():
    """The UI smoke runs in the frontend's own vitest suite (it is
    TypeScript); this gate line shells out to it so all nine criteria
    report in one place. Skips when the frontend isn't installed."""
    import re
    import shutil
    import subprocess

    frontend = Path(__file__).resolve().parents[1] / "frontend"
    if shutil.which("npm") is None:
        pytest.skip("npm unavailable; run `npm test` in frontend/ directly")
    if not (frontend / "node_modules").is_dir():
        pytest.skip("frontend deps not installed (`npm install` in frontend/)")

    t0 = time.perf_counter()
    proc = subprocess.run(["npm", "test", "--silent"], cwd=frontend,
                          capture_output=True, text=True, timeout=300)
    elapsed = time.perf_counter() - t0
    out = proc.stdout + proc.stderr
    match = re.search(r"Tests\s+(\d+) passed", out)
    passed = int(match.group(1)) if match else 0

    ok = proc.returncode == 0 and passed > 0
    line = report(
        9, ok,
        f"frontend suite green ({passed} tests, {elapsed:.1f} s): live "
        "connect, arm + safety-square render, recorded replays with "
        "per-segment Lyapunov non-increase")
    assert ok, line + "\n" + out[-2000:]
