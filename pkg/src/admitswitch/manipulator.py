"""Rigid-body dynamics, kinematics and Jacobian machinery for a planar
two-link manipulator.

Joint-space model:  M_q(q) q'' + C_q(q, q') q' + G_q(q) = tau + tau_ext
with point masses at the link ends.  The Coriolis matrix uses the
Christoffel form, so M'_q - 2 C_q is skew-symmetric and the same holds
for the Cartesian-space counterparts.

All functions are pure; states and parameters are plain value types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonfiniteStateError, SingularityError

Array = np.ndarray

#: abort threshold on |det J|; the simulation halts rather than regularizes
EPS_SINGULAR = 1e-6


@dataclass(frozen=True)
class TwoLinkParams:
    """Physical parameters of the two-link arm.

    Defaults are the stock model: 1.5 kg / 1 kg point masses on two
    0.85 m links.  ``gravity_enabled=False`` models the arm moving in a
    horizontal plane (gravity acts out-of-plane, G_q = 0).
    """

    m1: float = 1.5
    m2: float = 1.0
    l1: float = 0.85
    l2: float = 0.85
    g: float = 9.81
    gravity_enabled: bool = True

    def __post_init__(self):
        for name in ("m1", "m2", "l1", "l2"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.g < 0.0:
            raise ValueError("g must be non-negative")

    @property
    def reach(self) -> float:
        return self.l1 + self.l2


@dataclass(frozen=True)
class JointState:
    """Joint angles q (rad) and velocities qdot (rad/s)."""

    q: Array
    qdot: Array

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "qdot", np.asarray(self.qdot, dtype=float))
        if self.q.shape != self.qdot.shape:
            raise ValueError("q and qdot must have the same length")
        if not (np.isfinite(self.q).all() and np.isfinite(self.qdot).all()):
            raise NonfiniteStateError("joint state contains non-finite entries")


@dataclass(frozen=True)
class CartesianState:
    """End-effector position x (m) and velocity xdot (m/s)."""

    x: Array
    xdot: Array


@dataclass(frozen=True)
class DynamicsTerms:
    """Inertia matrix M, Coriolis/centripetal matrix C and gravity vector G
    (either joint-space or Cartesian-space)."""

    M: Array
    C: Array
    G: Array


def forward_kinematics(params: TwoLinkParams, q: Array) -> Array:
    """End-effector position in the base frame."""
    q1, q2 = float(q[0]), float(q[1])
    return np.array([
        params.l1 * math.cos(q1) + params.l2 * math.cos(q1 + q2),
        params.l1 * math.sin(q1) + params.l2 * math.sin(q1 + q2),
    ])


def jacobian(params: TwoLinkParams, q: Array) -> Array:
    """Jacobian J(q) relating joint velocities to end-effector velocity;
    det J = l1 l2 sin(q2)."""
    q1, q2 = float(q[0]), float(q[1])
    s1, c1 = math.sin(q1), math.cos(q1)
    s12, c12 = math.sin(q1 + q2), math.cos(q1 + q2)
    l1, l2 = params.l1, params.l2
    return np.array([
        [-l1 * s1 - l2 * s12, -l2 * s12],
        [l1 * c1 + l2 * c12, l2 * c12],
    ])


def jacobian_dot(params: TwoLinkParams, q: Array, qdot: Array) -> Array:
    """Analytic time derivative of the Jacobian along (q, qdot)."""
    q1, q2 = float(q[0]), float(q[1])
    qd1, qd2 = float(qdot[0]), float(qdot[1])
    s1, c1 = math.sin(q1), math.cos(q1)
    s12, c12 = math.sin(q1 + q2), math.cos(q1 + q2)
    l1, l2 = params.l1, params.l2
    w = qd1 + qd2
    return np.array([
        [-l1 * c1 * qd1 - l2 * c12 * w, -l2 * c12 * w],
        [-l1 * s1 * qd1 - l2 * s12 * w, -l2 * s12 * w],
    ])


def singularity_check(J: Array, eps: float = EPS_SINGULAR,
                      q: Array | None = None, t: float | None = None) -> float:
    """Raise :class:`SingularityError` when |det J| <= eps; returns det J."""
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    if abs(det) <= eps:
        raise SingularityError(det, q=q, t=t)
    return det


def inverse_kinematics(params: TwoLinkParams, x: Array, elbow_up: bool = True) -> Array:
    """Joint angles reaching Cartesian point ``x``; raises ValueError when
    out of reach."""
    px, py = float(x[0]), float(x[1])
    l1, l2 = params.l1, params.l2
    r2 = px * px + py * py
    c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    if not -1.0 <= c2 <= 1.0:
        raise ValueError(f"point {x} out of reach (reach = {params.reach})")
    q2 = math.acos(c2) if elbow_up else -math.acos(c2)
    q1 = math.atan2(py, px) - math.atan2(l2 * math.sin(q2), l1 + l2 * math.cos(q2))
    return np.array([q1, q2])


def _joint_terms(params: TwoLinkParams, q1: float, q2: float,
                 qd1: float, qd2: float):
    """Scalar-level joint-space terms (m11, m12, m22, c11, c12, c21, g1, g2)."""
    m1, m2, l1, l2 = params.m1, params.m2, params.l1, params.l2
    c2 = math.cos(q2)
    s2 = math.sin(q2)
    p1 = m2 * l2 * l2
    p2 = m2 * l1 * l2 * c2
    m11 = p1 + 2.0 * p2 + (m1 + m2) * l1 * l1
    m12 = p1 + p2
    m22 = p1
    h = m2 * l1 * l2 * s2
    c11 = -h * qd2
    c12 = -h * (qd1 + qd2)
    c21 = h * qd1
    if params.gravity_enabled:
        g = params.g
        c1 = math.cos(q1)
        c12t = math.cos(q1 + q2)
        g1 = m2 * l2 * g * c12t + (m1 + m2) * l1 * g * c1
        g2 = m2 * l2 * g * c12t
    else:
        g1 = g2 = 0.0
    return m11, m12, m22, c11, c12, c21, g1, g2


def joint_dynamics_terms(params: TwoLinkParams, state: JointState) -> DynamicsTerms:
    """Joint-space M_q, C_q, G_q evaluated at ``state``."""
    m11, m12, m22, c11, c12, c21, g1, g2 = _joint_terms(
        params, float(state.q[0]), float(state.q[1]),
        float(state.qdot[0]), float(state.qdot[1]))
    return DynamicsTerms(
        M=np.array([[m11, m12], [m12, m22]]),
        C=np.array([[c11, c12], [c21, 0.0]]),
        G=np.array([g1, g2]),
    )


def cartesian_dynamics_terms(params: TwoLinkParams, state: JointState) -> DynamicsTerms:
    """Cartesian-space terms M_x = J^-T M J^-1, C_x = J^-T (C - M J^-1 Jdot) J^-1,
    G_x = J^-T G.  Raises :class:`SingularityError` near det J = 0."""
    J = jacobian(params, state.q)
    det = singularity_check(J, q=state.q)
    terms = joint_dynamics_terms(params, state)
    Jinv = np.array([[J[1, 1], -J[0, 1]], [-J[1, 0], J[0, 0]]]) / det
    JinvT = Jinv.T
    Jdot = jacobian_dot(params, state.q, state.qdot)
    Mx = JinvT @ terms.M @ Jinv
    Cx = JinvT @ (terms.C - terms.M @ Jinv @ Jdot) @ Jinv
    Gx = JinvT @ terms.G
    return DynamicsTerms(M=Mx, C=Cx, G=Gx)


def cartesian_state(params: TwoLinkParams, state: JointState) -> CartesianState:
    """Map a joint state through the kinematics and Jacobian."""
    return CartesianState(
        x=forward_kinematics(params, state.q),
        xdot=jacobian(params, state.q) @ state.qdot,
    )


def mass_inverse_norm(params: TwoLinkParams, state: JointState) -> float:
    """Spectral norm of M_x^-1 = J M_q^-1 J^T (bounded-inertia witness)."""
    J = jacobian(params, state.q)
    m11, m12, m22, *_ = _joint_terms(
        params, float(state.q[0]), float(state.q[1]), 0.0, 0.0)
    detm = m11 * m22 - m12 * m12
    Minv = np.array([[m22, -m12], [-m12, m11]]) / detm
    S = J @ Minv @ J.T
    half_tr = 0.5 * (S[0, 0] + S[1, 1])
    disc = math.sqrt(max(0.0, (0.5 * (S[0, 0] - S[1, 1])) ** 2 + S[0, 1] * S[1, 0]))
    return half_tr + disc


def _joint_accel(params: TwoLinkParams, q1, q2, qd1, qd2, tau1, tau2, te1, te2):
    """Joint acceleration q'' = M^-1 (tau + tau_ext - C q' - G) at scalar level."""
    m11, m12, m22, c11, c12, c21, g1, g2 = _joint_terms(params, q1, q2, qd1, qd2)
    r1 = tau1 + te1 - (c11 * qd1 + c12 * qd2) - g1
    r2 = tau2 + te2 - (c21 * qd1) - g2
    det = m11 * m22 - m12 * m12
    return (m22 * r1 - m12 * r2) / det, (m11 * r2 - m12 * r1) / det


def _arm_rk4(params: TwoLinkParams, q1, q2, qd1, qd2, t1, t2, e1, e2, dt):
    """Scalar RK4 step of the arm under constant torques; returns the new
    (q1, q2, qd1, qd2).  Raises :class:`NonfiniteStateError` on divergence."""

    def f(a, b, c, d):
        dd1, dd2 = _joint_accel(params, a, b, c, d, t1, t2, e1, e2)
        return c, d, dd1, dd2

    try:
        k1 = f(q1, q2, qd1, qd2)
        h = 0.5 * dt
        k2 = f(q1 + h * k1[0], q2 + h * k1[1], qd1 + h * k1[2], qd2 + h * k1[3])
        k3 = f(q1 + h * k2[0], q2 + h * k2[1], qd1 + h * k2[2], qd2 + h * k2[3])
        k4 = f(q1 + dt * k3[0], q2 + dt * k3[1], qd1 + dt * k3[2], qd2 + dt * k3[3])
    except (ValueError, OverflowError) as exc:
        # math.cos/math.sin reject inf arguments once a stage overflows
        raise NonfiniteStateError("joint integration diverged") from exc
    w = dt / 6.0
    nq1 = q1 + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    nq2 = q2 + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    nqd1 = qd1 + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    nqd2 = qd2 + w * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    if not (math.isfinite(nq1) and math.isfinite(nq2)
            and math.isfinite(nqd1) and math.isfinite(nqd2)):
        raise NonfiniteStateError("joint integration diverged")
    return nq1, nq2, nqd1, nqd2


def apply_torque(params: TwoLinkParams, state: JointState, tau: Array,
                 tau_ext: Array, dt: float) -> JointState:
    """Advance the joint state by one classical RK4 step under constant
    applied torques.

    Raises :class:`NonfiniteStateError` when the step diverges.
    """
    nq1, nq2, nqd1, nqd2 = _arm_rk4(
        params,
        float(state.q[0]), float(state.q[1]),
        float(state.qdot[0]), float(state.qdot[1]),
        float(tau[0]), float(tau[1]),
        float(tau_ext[0]), float(tau_ext[1]), dt)
    return JointState(q=np.array([nq1, nq2]), qdot=np.array([nqd1, nqd2]))


def kinetic_energy(params: TwoLinkParams, state: JointState) -> float:
    """0.5 qdot^T M_q qdot."""
    terms = joint_dynamics_terms(params, state)
    return 0.5 * float(state.qdot @ terms.M @ state.qdot)


def potential_energy(params: TwoLinkParams, state: JointState) -> float:
    """Gravitational potential of the two point masses (0 when gravity is
    disabled); G_q is its gradient in q."""
    if not params.gravity_enabled:
        return 0.0
    q1, q2 = float(state.q[0]), float(state.q[1])
    y1 = params.l1 * math.sin(q1)
    y2 = y1 + params.l2 * math.sin(q1 + q2)
    return params.g * (params.m1 * y1 + params.m2 * y2)


def total_energy(params: TwoLinkParams, state: JointState) -> float:
    """Kinetic plus potential energy; conserved under zero applied torque."""
    return kinetic_energy(params, state) + potential_energy(params, state)
