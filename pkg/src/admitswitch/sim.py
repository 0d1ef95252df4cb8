"""Deterministic fixed-step closed-loop simulator.

One control step covers [t, t + dt] and always runs in the same order:

1. sample the interaction force and clamp each axis to +-f_max;
2. freeze the active reference subsystem per axis (from the reference
   deviation by default, the plant deviation when configured, or the
   locked index for counterfactual runs);
3. advance both admittance channels with one coupled RK4 step (plant
   deviation, reference deviation and the active gain row together,
   force sampled at the stage times, inactive rows bitwise untouched);
4. form the Cartesian target from the new channel state: position is
   the operating point plus the plant deviation, velocity the deviation
   rate, and acceleration the analytic control input of the virtual
   plant (never a finite difference);
5. feedback-linearize on the current arm state and hold the resulting
   joint torque across one RK4 step of the arm.

There is no randomness anywhere, integration is fixed-step, and the
trace serializes with "%.9g", so a scenario reproduces byte-identically.

The inner loop is deliberately written over plain floats: allocating
numpy views per step would dominate the runtime at 1 kHz for 60 s.
The vectorized module-level APIs stay the reference implementations and
the test suite cross-checks the loop against them step by step.
"""

from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass

import numpy as np

from .config import ForceConfig, ScenarioBundle, ScenarioConfig, assemble
from .errors import LyapunovAuditError, NonfiniteStateError, SingularityError
from .manipulator import EPS_SINGULAR, _arm_rk4, _joint_terms

Array = np.ndarray

#: per-step tolerance on the discrete Lyapunov increase
LYAP_STEP_TOL = 1e-6

TRACE_COLUMNS = (
    "t_s", "force_x_n", "force_y_n",
    "dev_pos_x_m", "dev_vel_x_mps", "ref_pos_x_m", "ref_vel_x_mps", "region_x",
    "dev_pos_y_m", "dev_vel_y_mps", "ref_pos_y_m", "ref_vel_y_mps", "region_y",
    "gain_soft_pos_x", "gain_soft_vel_x", "gain_stiff_pos_x", "gain_stiff_vel_x",
    "gain_soft_pos_y", "gain_soft_vel_y", "gain_stiff_pos_y", "gain_stiff_vel_y",
    "q1_rad", "q2_rad", "qd1_radps", "qd2_radps",
    "ee_x_m", "ee_y_m", "ee_vx_mps", "ee_vy_mps",
    "tau1_nm", "tau2_nm", "wrench_x_n", "wrench_y_n", "det_j_m2",
    "lyap_x", "lyap_y",
)


def build_force_profile(cfg: ForceConfig):
    """Closure t -> (fx, fy) in newtons, before clamping."""
    if cfg.kind == "sinusoid":
        ax, ay = cfg.amplitude_n
        w = cfg.frequency_radps
        px, py = cfg.phase_rad

        def profile(t: float):
            return ax * math.sin(w * t + px), ay * math.sin(w * t + py)

    elif cfg.kind == "constant":
        vx, vy = cfg.value_n

        def profile(t: float):
            return vx, vy

    elif cfg.kind == "piecewise":
        starts = [seg.t_start_s for seg in cfg.segments]
        values = [seg.value_n for seg in cfg.segments]

        def profile(t: float):
            k = bisect.bisect_right(starts, t) - 1
            return values[k] if k >= 0 else (0.0, 0.0)

    else:  # external: driven purely by runtime force commands
        def profile(t: float):
            return 0.0, 0.0

    return profile


@dataclass(frozen=True)
class SwitchEvent:
    """Region change on one axis, timestamped at the step that saw it."""

    t_s: float
    axis: str
    from_index: int
    to_index: int


class SimTrace:
    """Column-oriented trace of every control step (row 0 = initial state).

    Torque and Cartesian-wrench columns hold the command applied over
    the interval ending at the row's time, so row 0 carries zeros there.
    All other columns are state facts at the row's time.
    """

    def __init__(self):
        self._cols = {name: [] for name in TRACE_COLUMNS}

    def append(self, values: dict):
        for name in TRACE_COLUMNS:
            self._cols[name].append(values[name])

    def __len__(self):
        return len(self._cols["t_s"])

    def column(self, name: str) -> Array:
        return np.asarray(self._cols[name])

    def write(self, fh):
        fh.write(",".join(TRACE_COLUMNS))
        fh.write("\n")
        cols = [self._cols[name] for name in TRACE_COLUMNS]
        for row in zip(*cols):
            fh.write(",".join(f"{v:.9g}" for v in row))
            fh.write("\n")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            self.write(fh)


@dataclass(frozen=True)
class SimulationResult:
    """Trace plus summary metrics of one completed run."""

    bundle: ScenarioBundle
    trace: SimTrace
    metrics: dict
    switches: tuple[SwitchEvent, ...]


class Simulator:
    """Stepwise closed-loop simulator over one scenario bundle.

    ``run()`` executes the whole scenario; ``advance(n)`` steps
    incrementally (used by the live service), and ``set_force`` installs
    a clamped force override that takes effect at step boundaries and
    wins over the configured profile until ``clear_force``.
    """

    def __init__(self, bundle: ScenarioBundle, audit: str = "none",
                 collect_trace: bool = True):
        if audit not in ("all", "none"):
            raise ValueError("audit must be 'all' or 'none'")
        self.bundle = bundle
        self.audit = audit
        self.collect_trace = collect_trace
        self._profile = build_force_profile(bundle.config.force)
        self.reset()

    # -- state management -------------------------------------------------

    def reset(self):
        """Return to the initial state (operating pose, matched soft gains)."""
        cfg = self.bundle.config
        ch = self.bundle.channel
        self.t = 0.0
        self.step_count = 0
        self.q1, self.q2 = cfg.arm.q0_rad
        self.qd1 = self.qd2 = 0.0
        # per-axis channel state: [dev_pos, dev_vel, ref_pos, ref_vel]
        self.chan = {"x": [0.0, 0.0, 0.0, 0.0], "y": [0.0, 0.0, 0.0, 0.0]}
        init = ch.initial_gains()
        self.gains = {"x": [list(map(float, row)) for row in init],
                      "y": [list(map(float, row)) for row in init]}
        self.region = {"x": self._region_of("x"), "y": self._region_of("y")}
        self.lyap = {"x": self._lyap_of("x"), "y": self._lyap_of("y")}
        self.tau1 = self.tau2 = 0.0
        self.wrench = (0.0, 0.0)
        self.force_override = None
        self.last_force = self._step_force(0.0)
        self.switches: list[SwitchEvent] = []
        self.lyap_max_increase = {"x": -math.inf, "y": -math.inf}
        self.min_abs_detj = math.inf
        self.max_tracking_error = 0.0
        self.max_mass_inverse_norm = 0.0
        self.violation_steps = {"x": 0, "y": 0, "any": 0}
        self.trace = SimTrace()
        if self.collect_trace:
            self._append_trace_row()

    def set_force(self, fx: float, fy: float):
        """Install a held force override (clamped immediately)."""
        f_max = self.bundle.config.force.f_max_n
        self.force_override = (_clamp(float(fx), f_max), _clamp(float(fy), f_max))

    def clear_force(self):
        """Drop the override; the configured profile takes over again."""
        self.force_override = None

    def _step_force(self, t: float):
        if self.force_override is not None:
            return self.force_override
        f_max = self.bundle.config.force.f_max_n
        fx, fy = self._profile(t)
        return _clamp(fx, f_max), _clamp(fy, f_max)

    def _region_of(self, axis: str) -> int:
        cfg = self.bundle.config.reference
        if cfg.lock_region_index is not None:
            return cfg.lock_region_index
        state = self.chan[axis]
        pos = state[0] if cfg.switch_on == "plant" else state[2]
        thr = cfg.threshold_m
        return 1 if -thr <= pos <= thr else 2

    def _lyap_of(self, axis: str) -> float:
        ch = self.bundle.channel
        P = ch.p_matrix
        d = self.chan[axis]
        e1, e2 = d[0] - d[2], d[1] - d[3]
        value = 0.5 * (P[0, 0] * e1 * e1 + 2.0 * P[0, 1] * e1 * e2 + P[1, 1] * e2 * e2)
        matched = ch.matched_gains()
        for i, rate in enumerate(ch.adapt_rates):
            m0 = self.gains[axis][i][0] - matched[i, 0]
            m1 = self.gains[axis][i][1] - matched[i, 1]
            value += 0.5 * (m0 * m0 + m1 * m1) / rate
        return value

    # -- main loop ---------------------------------------------------------

    def advance(self, n_steps: int):
        """Run ``n_steps`` control steps from the current state."""
        bundle = self.bundle
        cfg = bundle.config
        arm = bundle.arm
        ch = bundle.channel
        dt = cfg.dt_s
        half = 0.5 * dt
        sixth = dt / 6.0
        f_max = cfg.force.f_max_n
        lock = cfg.reference.lock_region_index
        switch_on_plant = cfg.reference.switch_on == "plant"
        thr = cfg.reference.threshold_m
        kp, kd = bundle.gains.kp, bundle.gains.kd
        l1, l2 = arm.l1, arm.l2
        inv_mass = 1.0 / ch.virtual_mass
        kcmd = ch.command_gain
        P = ch.p_matrix
        p11, p12, p22 = float(P[0, 0]), float(P[0, 1]), float(P[1, 1])
        ew = ch.error_weight
        ew1, ew2 = float(ew[0]), float(ew[1])
        mats = bundle.family.matrices
        sub = [(float(A[0, 0]), float(A[0, 1]), float(A[1, 0]), float(A[1, 1]))
               for A in mats]
        b1, b2 = float(bundle.family.B[0]), float(bundle.family.B[1])
        rates = [float(r) for r in ch.adapt_rates]
        matched = [(float(row[0]), float(row[1])) for row in ch.matched_gains()]
        ox, oy = float(bundle.operating_point[0]), float(bundle.operating_point[1])
        safe_lim = cfg.reference.safe_limit_m
        profile = self._profile
        override = self.force_override
        audit_all = self.audit == "all"
        collect = self.collect_trace
        viol_x = self.violation_steps["x"]
        viol_y = self.violation_steps["y"]
        viol_any = self.violation_steps["any"]
        max_minv = self.max_mass_inverse_norm

        q1, q2, qd1, qd2 = self.q1, self.q2, self.qd1, self.qd2
        cx = self.chan["x"]
        cy = self.chan["y"]
        gx = self.gains["x"]
        gy = self.gains["y"]
        vx_prev, vy_prev = self.lyap["x"], self.lyap["y"]
        reg_x, reg_y = self.region["x"], self.region["y"]
        t = self.t

        for _ in range(n_steps):
            # 1. force samples at the RK4 stage times, clamped per axis
            if override is not None:
                f0x, f0y = override
                fhx, fhy = override
                f1x, f1y = override
            else:
                rx, ry = profile(t)
                f0x, f0y = _clamp(rx, f_max), _clamp(ry, f_max)
                rx, ry = profile(t + half)
                fhx, fhy = _clamp(rx, f_max), _clamp(ry, f_max)
                rx, ry = profile(t + dt)
                f1x, f1y = _clamp(rx, f_max), _clamp(ry, f_max)

            # 2. freeze the active subsystem per axis for the whole step
            if lock is not None:
                new_rx = new_ry = lock
            else:
                px = cx[0] if switch_on_plant else cx[2]
                py = cy[0] if switch_on_plant else cy[2]
                new_rx = 1 if -thr <= px <= thr else 2
                new_ry = 1 if -thr <= py <= thr else 2
            if new_rx != reg_x:
                self.switches.append(SwitchEvent(t, "x", reg_x, new_rx))
                reg_x = new_rx
            if new_ry != reg_y:
                self.switches.append(SwitchEvent(t, "y", reg_y, new_ry))
                reg_y = new_ry

            # 3. coupled RK4 of each admittance channel
            ga = gx[reg_x - 1]
            a11, a12, a21, a22 = sub[reg_x - 1]
            _channel_rk4(cx, ga, f0x, fhx, f1x, a11, a12, a21, a22, b1, b2,
                         rates[reg_x - 1], ew1, ew2, kcmd, inv_mass, dt, half, sixth)
            ga = gy[reg_y - 1]
            a11, a12, a21, a22 = sub[reg_y - 1]
            _channel_rk4(cy, ga, f0y, fhy, f1y, a11, a12, a21, a22, b1, b2,
                         rates[reg_y - 1], ew1, ew2, kcmd, inv_mass, dt, half, sixth)
            if not (math.isfinite(cx[0]) and math.isfinite(cx[1])
                    and math.isfinite(cy[0]) and math.isfinite(cy[1])):
                raise NonfiniteStateError(
                    f"admittance channel diverged at t = {t + dt:.4f} s")

            over_x = abs(cx[0]) > safe_lim
            over_y = abs(cy[0]) > safe_lim
            if over_x:
                viol_x += 1
            if over_y:
                viol_y += 1
            if over_x or over_y:
                viol_any += 1

            # Lyapunov bookkeeping on the step just taken
            e1, e2 = cx[0] - cx[2], cx[1] - cx[3]
            vx_new = 0.5 * (p11 * e1 * e1 + 2.0 * p12 * e1 * e2 + p22 * e2 * e2)
            for i, rate in enumerate(rates):
                m0 = gx[i][0] - matched[i][0]
                m1 = gx[i][1] - matched[i][1]
                vx_new += 0.5 * (m0 * m0 + m1 * m1) / rate
            e1, e2 = cy[0] - cy[2], cy[1] - cy[3]
            vy_new = 0.5 * (p11 * e1 * e1 + 2.0 * p12 * e1 * e2 + p22 * e2 * e2)
            for i, rate in enumerate(rates):
                m0 = gy[i][0] - matched[i][0]
                m1 = gy[i][1] - matched[i][1]
                vy_new += 0.5 * (m0 * m0 + m1 * m1) / rate
            inc_x = vx_new - vx_prev
            inc_y = vy_new - vy_prev
            if inc_x > self.lyap_max_increase["x"]:
                self.lyap_max_increase["x"] = inc_x
            if inc_y > self.lyap_max_increase["y"]:
                self.lyap_max_increase["y"] = inc_y
            if audit_all:
                if inc_x > LYAP_STEP_TOL:
                    raise LyapunovAuditError("x", t + dt, inc_x)
                if inc_y > LYAP_STEP_TOL:
                    raise LyapunovAuditError("y", t + dt, inc_y)
            vx_prev, vy_prev = vx_new, vy_new

            # 4. Cartesian target from the new channel state; the
            #    feedforward acceleration is the analytic plant input
            ga = gx[reg_x - 1]
            acc_x = (ga[0] * cx[0] + ga[1] * cx[1] + kcmd * f1x) * inv_mass
            ga = gy[reg_y - 1]
            acc_y = (ga[0] * cy[0] + ga[1] * cy[1] + kcmd * f1y) * inv_mass
            tgt_px, tgt_vx = ox + cx[0], cx[1]
            tgt_py, tgt_vy = oy + cy[0], cy[1]

            # 5. feedback linearization on the current arm state
            s1, c1 = math.sin(q1), math.cos(q1)
            s12, c12 = math.sin(q1 + q2), math.cos(q1 + q2)
            j11 = -l1 * s1 - l2 * s12
            j12 = -l2 * s12
            j21 = l1 * c1 + l2 * c12
            j22 = l2 * c12
            det = j11 * j22 - j12 * j21
            if abs(det) <= EPS_SINGULAR:
                raise SingularityError(det, q=(q1, q2), t=t)
            if abs(det) < self.min_abs_detj:
                self.min_abs_detj = abs(det)
            ee_x = l1 * c1 + l2 * c12
            ee_y = l1 * s1 + l2 * s12
            vel_x = j11 * qd1 + j12 * qd2
            vel_y = j21 * qd1 + j22 * qd2
            a_cmd_x = acc_x + kd * (tgt_vx - vel_x) + kp * (tgt_px - ee_x)
            a_cmd_y = acc_y + kd * (tgt_vy - vel_y) + kp * (tgt_py - ee_y)
            werr = qd1 + qd2
            jd11 = -l1 * c1 * qd1 - l2 * c12 * werr
            jd12 = -l2 * c12 * werr
            jd21 = -l1 * s1 * qd1 - l2 * s12 * werr
            jd22 = -l2 * s12 * werr
            r1 = a_cmd_x - (jd11 * qd1 + jd12 * qd2)
            r2 = a_cmd_y - (jd21 * qd1 + jd22 * qd2)
            w1 = (j22 * r1 - j12 * r2) / det
            w2 = (j11 * r2 - j21 * r1) / det
            m11, m12, m22, c11q, c12q, c21q, g1, g2 = _joint_terms(
                arm, q1, q2, qd1, qd2)
            # J^T f_ext, cancelled by the controller and felt by the arm
            te1 = j11 * f1x + j21 * f1y
            te2 = j12 * f1x + j22 * f1y
            tau1 = m11 * w1 + m12 * w2 + c11q * qd1 + c12q * qd2 + g1 - te1
            tau2 = m12 * w1 + m22 * w2 + c21q * qd1 + g2 - te2
            # Cartesian wrench behind the torque command: F = J^-T tau
            wr1 = (j22 * tau1 - j21 * tau2) / det
            wr2 = (j11 * tau2 - j12 * tau1) / det
            # spectral norm of the task-space inverse inertia J M^-1 J^T
            det_m = m11 * m22 - m12 * m12
            mi11, mi12, mi22 = m22 / det_m, -m12 / det_m, m11 / det_m
            r11 = mi11 * j11 + mi12 * j12
            r21 = mi12 * j11 + mi22 * j12
            r12 = mi11 * j21 + mi12 * j22
            r22 = mi12 * j21 + mi22 * j22
            x11 = j11 * r11 + j12 * r21
            x12 = j11 * r12 + j12 * r22
            x22 = j21 * r12 + j22 * r22
            minv_norm = 0.5 * ((x11 + x22)
                               + math.hypot(x11 - x22, 2.0 * x12))
            if minv_norm > max_minv:
                max_minv = minv_norm
            track_err = max(abs(tgt_px - ee_x), abs(tgt_py - ee_y))
            if track_err > self.max_tracking_error:
                self.max_tracking_error = track_err

            q1, q2, qd1, qd2 = _arm_rk4(arm, q1, q2, qd1, qd2,
                                        tau1, tau2, te1, te2, dt)
            t += dt
            self.step_count += 1
            self.tau1, self.tau2 = tau1, tau2
            self.wrench = (wr1, wr2)
            self.last_force = (f1x, f1y)

            if collect:
                self.t = t
                self.q1, self.q2, self.qd1, self.qd2 = q1, q2, qd1, qd2
                self.lyap["x"], self.lyap["y"] = vx_new, vy_new
                self.region["x"], self.region["y"] = reg_x, reg_y
                self._append_trace_row()

        self.t = t
        self.q1, self.q2, self.qd1, self.qd2 = q1, q2, qd1, qd2
        self.region["x"], self.region["y"] = reg_x, reg_y
        self.lyap["x"], self.lyap["y"] = vx_prev, vy_prev
        self.violation_steps["x"] = viol_x
        self.violation_steps["y"] = viol_y
        self.violation_steps["any"] = viol_any
        self.max_mass_inverse_norm = max_minv

    def _append_trace_row(self):
        cx, cy = self.chan["x"], self.chan["y"]
        gx, gy = self.gains["x"], self.gains["y"]
        s1, c1 = math.sin(self.q1), math.cos(self.q1)
        s12, c12 = math.sin(self.q1 + self.q2), math.cos(self.q1 + self.q2)
        arm = self.bundle.arm
        j11 = -arm.l1 * s1 - arm.l2 * s12
        j12 = -arm.l2 * s12
        j21 = arm.l1 * c1 + arm.l2 * c12
        j22 = arm.l2 * c12
        self.trace.append({
            "t_s": self.t,
            "force_x_n": self.last_force[0],
            "force_y_n": self.last_force[1],
            "dev_pos_x_m": cx[0], "dev_vel_x_mps": cx[1],
            "ref_pos_x_m": cx[2], "ref_vel_x_mps": cx[3],
            "region_x": float(self.region["x"]),
            "dev_pos_y_m": cy[0], "dev_vel_y_mps": cy[1],
            "ref_pos_y_m": cy[2], "ref_vel_y_mps": cy[3],
            "region_y": float(self.region["y"]),
            "gain_soft_pos_x": gx[0][0], "gain_soft_vel_x": gx[0][1],
            "gain_stiff_pos_x": gx[1][0], "gain_stiff_vel_x": gx[1][1],
            "gain_soft_pos_y": gy[0][0], "gain_soft_vel_y": gy[0][1],
            "gain_stiff_pos_y": gy[1][0], "gain_stiff_vel_y": gy[1][1],
            "q1_rad": self.q1, "q2_rad": self.q2,
            "qd1_radps": self.qd1, "qd2_radps": self.qd2,
            "ee_x_m": arm.l1 * c1 + arm.l2 * c12,
            "ee_y_m": arm.l1 * s1 + arm.l2 * s12,
            "ee_vx_mps": j11 * self.qd1 + j12 * self.qd2,
            "ee_vy_mps": j21 * self.qd1 + j22 * self.qd2,
            "tau1_nm": self.tau1, "tau2_nm": self.tau2,
            "wrench_x_n": self.wrench[0], "wrench_y_n": self.wrench[1],
            "det_j_m2": j11 * j22 - j12 * j21,
            "lyap_x": self.lyap["x"], "lyap_y": self.lyap["y"],
        })

    def snapshot(self) -> dict:
        """Current state as plain JSON-ready values (live wire payload)."""
        cx, cy = self.chan["x"], self.chan["y"]
        gx, gy = self.gains["x"], self.gains["y"]
        arm = self.bundle.arm
        thr = self.bundle.config.reference.threshold_m
        s1, c1 = math.sin(self.q1), math.cos(self.q1)
        s12, c12 = math.sin(self.q1 + self.q2), math.cos(self.q1 + self.q2)
        elbow = (arm.l1 * c1, arm.l1 * s1)
        ee = (elbow[0] + arm.l2 * c12, elbow[1] + arm.l2 * s12)
        ox, oy = (float(v) for v in self.bundle.operating_point)
        limit_x = abs(cx[2]) > thr
        limit_y = abs(cy[2]) > thr
        return {
            "t_s": self.t,
            "step": self.step_count,
            "force_n": list(self.last_force),
            "dev": {"x": cx[:2], "y": cy[:2]},
            "ref": {"x": cx[2:], "y": cy[2:]},
            "region": {"x": self.region["x"], "y": self.region["y"]},
            "limit_engaged": {"x": limit_x, "y": limit_y,
                              "any": limit_x or limit_y},
            "gains": {"x": [list(r) for r in gx], "y": [list(r) for r in gy]},
            "q_rad": [self.q1, self.q2],
            "qd_radps": [self.qd1, self.qd2],
            "elbow_m": list(elbow),
            "ee_m": list(ee),
            "ee_dev_m": [ee[0] - ox, ee[1] - oy],
            "tau_nm": [self.tau1, self.tau2],
            "wrench_n": list(self.wrench),
            "lyap": {"x": self.lyap["x"], "y": self.lyap["y"],
                     "total": self.lyap["x"] + self.lyap["y"]},
            "safe_limit_m": self.bundle.config.reference.safe_limit_m,
            "threshold_m": thr,
            "operating_point_m": [ox, oy],
        }

    # -- one-shot run ------------------------------------------------------

    def run(self) -> SimulationResult:
        """Execute the configured duration and assemble summary metrics."""
        started = time.perf_counter()
        self.advance(self.bundle.config.n_steps)
        runtime = time.perf_counter() - started
        return SimulationResult(
            bundle=self.bundle,
            trace=self.trace,
            metrics=self._metrics(runtime),
            switches=tuple(self.switches),
        )

    def _metrics(self, runtime: float) -> dict:
        cfg = self.bundle.config
        tr = self.trace
        cx, cy = self.chan["x"], self.chan["y"]
        e_mrac = (cx[0] - cx[2], cx[1] - cx[3], cy[0] - cy[2], cy[1] - cy[3])
        arm = self.bundle.arm
        ox, oy = (float(v) for v in self.bundle.operating_point)
        ee_x = arm.l1 * math.cos(self.q1) + arm.l2 * math.cos(self.q1 + self.q2)
        ee_y = arm.l1 * math.sin(self.q1) + arm.l2 * math.sin(self.q1 + self.q2)
        m = {
            "duration_s": cfg.duration_s,
            "dt_s": cfg.dt_s,
            "n_steps": self.step_count,
            "runtime_s": runtime,
            "safe_limit_m": cfg.reference.safe_limit_m,
            "switch_threshold_m": cfg.reference.threshold_m,
            "min_abs_det_j": self.min_abs_detj,
            "max_tracking_error_m": self.max_tracking_error,
            "max_mass_inverse_norm": self.max_mass_inverse_norm,
            "switch_count_x": sum(1 for s in self.switches if s.axis == "x"),
            "switch_count_y": sum(1 for s in self.switches if s.axis == "y"),
            "safety_violation_steps_x": self.violation_steps["x"],
            "safety_violation_steps_y": self.violation_steps["y"],
            "safety_violation_steps": self.violation_steps["any"],
            "final_mrac_error_norm": math.hypot(math.hypot(e_mrac[0], e_mrac[1]),
                                                math.hypot(e_mrac[2], e_mrac[3])),
            "final_tracking_error_norm": math.hypot(ox + cx[0] - ee_x,
                                                    oy + cy[0] - ee_y),
        }
        if len(tr):
            for axis in ("x", "y"):
                m[f"max_abs_dev_pos_{axis}_m"] = float(
                    np.abs(tr.column(f"dev_pos_{axis}_m")).max())
                m[f"max_abs_ref_pos_{axis}_m"] = float(
                    np.abs(tr.column(f"ref_pos_{axis}_m")).max())
                m[f"max_abs_force_{axis}_n"] = float(
                    np.abs(tr.column(f"force_{axis}_n")).max())
                m[f"lyap_max_step_increase_{axis}"] = self.lyap_max_increase[axis]
                m[f"final_region_{axis}"] = self.region[axis]
            m["max_abs_dev_pos_m"] = max(m["max_abs_dev_pos_x_m"],
                                         m["max_abs_dev_pos_y_m"])
            m["max_abs_torque_nm"] = float(max(
                np.abs(tr.column("tau1_nm")).max(),
                np.abs(tr.column("tau2_nm")).max()))
        return m


def _clamp(value: float, f_max: float) -> float:
    if value > f_max:
        return f_max
    if value < -f_max:
        return -f_max
    return value


def _channel_rk4(state, ga, f0, fh, f1, a11, a12, a21, a22, b1, b2,
                 rate, ew1, ew2, kcmd, inv_mass, dt, half, sixth):
    """One RK4 step of (dev, ref, active gain row) in place.

    ``state`` is the 4-list [dev_pos, dev_vel, ref_pos, ref_vel] and
    ``ga`` the active 2-list gain row; both are mutated.
    """
    d1, d2, m1, m2 = state
    g0, g1 = ga

    # stage 1 at force f0
    u = (g0 * d1 + g1 * d2 + kcmd * f0) * inv_mass
    s = (d1 - m1) * ew1 + (d2 - m2) * ew2
    k1_d1, k1_d2 = d2, u
    k1_m1 = a11 * m1 + a12 * m2 + b1 * f0
    k1_m2 = a21 * m1 + a22 * m2 + b2 * f0
    k1_g0, k1_g1 = -rate * s * d1, -rate * s * d2

    # stage 2 at force fh
    td1, td2 = d1 + half * k1_d1, d2 + half * k1_d2
    tm1, tm2 = m1 + half * k1_m1, m2 + half * k1_m2
    tg0, tg1 = g0 + half * k1_g0, g1 + half * k1_g1
    u = (tg0 * td1 + tg1 * td2 + kcmd * fh) * inv_mass
    s = (td1 - tm1) * ew1 + (td2 - tm2) * ew2
    k2_d1, k2_d2 = td2, u
    k2_m1 = a11 * tm1 + a12 * tm2 + b1 * fh
    k2_m2 = a21 * tm1 + a22 * tm2 + b2 * fh
    k2_g0, k2_g1 = -rate * s * td1, -rate * s * td2

    # stage 3 at force fh
    td1, td2 = d1 + half * k2_d1, d2 + half * k2_d2
    tm1, tm2 = m1 + half * k2_m1, m2 + half * k2_m2
    tg0, tg1 = g0 + half * k2_g0, g1 + half * k2_g1
    u = (tg0 * td1 + tg1 * td2 + kcmd * fh) * inv_mass
    s = (td1 - tm1) * ew1 + (td2 - tm2) * ew2
    k3_d1, k3_d2 = td2, u
    k3_m1 = a11 * tm1 + a12 * tm2 + b1 * fh
    k3_m2 = a21 * tm1 + a22 * tm2 + b2 * fh
    k3_g0, k3_g1 = -rate * s * td1, -rate * s * td2

    # stage 4 at force f1
    td1, td2 = d1 + dt * k3_d1, d2 + dt * k3_d2
    tm1, tm2 = m1 + dt * k3_m1, m2 + dt * k3_m2
    tg0, tg1 = g0 + dt * k3_g0, g1 + dt * k3_g1
    u = (tg0 * td1 + tg1 * td2 + kcmd * f1) * inv_mass
    s = (td1 - tm1) * ew1 + (td2 - tm2) * ew2
    k4_d1, k4_d2 = td2, u
    k4_m1 = a11 * tm1 + a12 * tm2 + b1 * f1
    k4_m2 = a21 * tm1 + a22 * tm2 + b2 * f1
    k4_g0, k4_g1 = -rate * s * td1, -rate * s * td2

    state[0] = d1 + sixth * (k1_d1 + 2.0 * (k2_d1 + k3_d1) + k4_d1)
    state[1] = d2 + sixth * (k1_d2 + 2.0 * (k2_d2 + k3_d2) + k4_d2)
    state[2] = m1 + sixth * (k1_m1 + 2.0 * (k2_m1 + k3_m1) + k4_m1)
    state[3] = m2 + sixth * (k1_m2 + 2.0 * (k2_m2 + k3_m2) + k4_m2)
    ga[0] = g0 + sixth * (k1_g0 + 2.0 * (k2_g0 + k3_g0) + k4_g0)
    ga[1] = g1 + sixth * (k1_g1 + 2.0 * (k2_g1 + k3_g1) + k4_g1)


def run_scenario(cfg: ScenarioConfig, audit: str = "none") -> SimulationResult:
    """Assemble and run one scenario end to end."""
    return Simulator(assemble(cfg), audit=audit).run()


#: trace gain-column prefixes in subsystem order (row 1 = soft, row 2 = stiff)
_GAIN_PREFIXES = ("gain_soft", "gain_stiff")


def run_lyapunov_audit(trace: SimTrace, channel, tol: float = LYAP_STEP_TOL) -> dict:
    """Recompute the per-axis Lyapunov value from a finished trace and
    report the worst per-step increase.

    Independent of the in-loop bookkeeping: everything is rebuilt from
    the logged deviations, reference states and gain rows, so a corrupted
    or hand-edited trace is caught.  Returns a report dict with one entry
    per axis (max increase, the time it occurred, pass flag) plus an
    overall ``ok``.
    """
    P = channel.p_matrix
    p11, p12, p22 = float(P[0, 0]), float(P[0, 1]), float(P[1, 1])
    matched = channel.matched_gains()
    t = trace.column("t_s")
    report = {"tolerance": tol}
    ok = True
    for axis in ("x", "y"):
        e1 = trace.column(f"dev_pos_{axis}_m") - trace.column(f"ref_pos_{axis}_m")
        e2 = trace.column(f"dev_vel_{axis}_mps") - trace.column(f"ref_vel_{axis}_mps")
        v = 0.5 * (p11 * e1 * e1 + 2.0 * p12 * e1 * e2 + p22 * e2 * e2)
        for i, prefix in enumerate(_GAIN_PREFIXES):
            m0 = trace.column(f"{prefix}_pos_{axis}") - matched[i, 0]
            m1 = trace.column(f"{prefix}_vel_{axis}") - matched[i, 1]
            v += 0.5 * (m0 * m0 + m1 * m1) / channel.adapt_rates[i]
        dv = np.diff(v)
        if dv.size:
            k = int(np.argmax(dv))
            worst = float(dv[k])
            when = float(t[k + 1])
        else:
            worst, when = -math.inf, 0.0
        axis_ok = worst <= tol
        ok = ok and axis_ok
        report[axis] = {"max_step_increase": worst, "at_t_s": when, "ok": axis_ok}
    report["ok"] = ok
    return report
