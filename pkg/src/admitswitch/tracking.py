"""Inner-loop Cartesian tracking controller.

Feedback linearization in task space: the commanded wrench cancels the
arm's Coriolis, gravity and measured interaction force terms and shapes
the end-effector acceleration to follow the admittance target, leaving
the linear error dynamics  err'' + kd err' + kp err = 0.  Joint torques
are the Jacobian-transpose image of the commanded wrench.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .manipulator import (
    CartesianState,
    JointState,
    TwoLinkParams,
    cartesian_dynamics_terms,
    cartesian_state,
    jacobian,
)

Array = np.ndarray


@dataclass(frozen=True)
class TrackingGains:
    """PD gains on the Cartesian tracking error, applied per axis.

    The defaults place both closed-loop error poles at -10 (critically
    damped: kd^2 = 4 kp).
    """

    kp: float = 100.0
    kd: float = 20.0

    def __post_init__(self):
        if self.kp <= 0.0 or self.kd <= 0.0:
            raise ValueError("tracking gains must be strictly positive")

    @property
    def poles(self) -> tuple[complex, complex]:
        """Roots of s^2 + kd s + kp, slowest first."""
        disc = self.kd * self.kd - 4.0 * self.kp
        if disc >= 0.0:
            root = math.sqrt(disc)
            return complex((-self.kd + root) / 2.0), complex((-self.kd - root) / 2.0)
        root = math.sqrt(-disc)
        return complex(-self.kd / 2.0, root / 2.0), complex(-self.kd / 2.0, -root / 2.0)


@dataclass(frozen=True)
class CartesianTarget:
    """Position, velocity and acceleration the end effector should follow."""

    pos: Array
    vel: Array
    acc: Array


@dataclass(frozen=True)
class TrackingCommand:
    """Torque command with the intermediate quantities kept for auditing."""

    tau: Array
    wrench: Array
    accel: Array


def acceleration_command(gains: TrackingGains, target: CartesianTarget,
                         current: CartesianState) -> Array:
    """a = acc_ref + kd (vel_ref - vel) + kp (pos_ref - pos)."""
    return (target.acc
            + gains.kd * (target.vel - current.xdot)
            + gains.kp * (target.pos - current.x))


def tracking_command(params: TwoLinkParams, gains: TrackingGains,
                     state: JointState, target: CartesianTarget,
                     f_ext: Array) -> TrackingCommand:
    """Feedback-linearizing torque for one control step.

    The returned wrench is M_x a + C_x xdot + G_x - f_ext, and the torque
    is exactly J^T wrench.  Raises :class:`SingularityError` when the
    arm is too close to a fold to invert the Jacobian.
    """
    current = cartesian_state(params, state)
    terms = cartesian_dynamics_terms(params, state)
    accel = acceleration_command(gains, target, current)
    wrench = terms.M @ accel + terms.C @ current.xdot + terms.G - np.asarray(f_ext, dtype=float)
    tau = jacobian(params, state.q).T @ wrench
    return TrackingCommand(tau=tau, wrench=wrench, accel=accel)
