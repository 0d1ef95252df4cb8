"""Adaptive model-reference admittance channel.

Each Cartesian axis runs an independent double-integrator virtual plant
driven by the clamped interaction force: the deviation from the
operating point obeys  virtual_mass * dev'' = u + 0 (no virtual spring
or damper of its own).  A state-feedback control u = gains . dev + r
shapes the plant to track the active reference subsystem, and the gain
row of the active subsystem adapts online so the match is recovered
even when the virtual mass is wrong or perturbed.

The adaptation rate of each subsystem is scalar (rate * identity), the
inactive rows stay bitwise frozen, and the stability argument rests on
the family's common quadratic Lyapunov matrix: the composite function
V = e' P e / 2 + sum_i |gains_i - matched_i|^2 / (2 rate_i)
is non-increasing along trajectories for any switching sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .cqlf import DEFAULT_CQLF_P, sym_eig2
from .errors import ConfigError
from .switched_reference import SwitchedReferenceFamily, make_position_band_family

Array = np.ndarray

#: virtual plant "A" matrix: pure double integrator in the deviation
PLANT_A = np.array([[0.0, 1.0], [0.0, 0.0]])

#: stock adaptation rates (soft subsystem, stiff subsystem)
DEFAULT_ADAPT_RATES = (200.0, 1000.0)


def plant_input_matrix(virtual_mass: float) -> Array:
    """Input matrix of the virtual plant: force enters the velocity row."""
    return np.array([0.0, 1.0 / virtual_mass])


@dataclass(frozen=True)
class AdaptiveAdmittanceParams:
    """Static data of the adaptive admittance channel.

    Parameters
    ----------
    family:
        Switched reference family the channel tracks.
    p_matrix:
        Symmetric positive definite matrix of the common quadratic
        Lyapunov function (certification against the family happens at
        scenario assembly; here only positive definiteness is checked).
    adapt_rates:
        One positive scalar rate per subsystem.
    virtual_mass:
        Apparent inertia of the admittance plant (kg).
    command_gain:
        Fixed feedforward gain on the force command; kept at 1 so the
        matched closed loop reproduces the reference input path exactly
        when ``virtual_mass`` is 1.
    """

    family: SwitchedReferenceFamily = field(default_factory=make_position_band_family)
    p_matrix: Array = field(default_factory=lambda: DEFAULT_CQLF_P.copy())
    adapt_rates: tuple[float, ...] = DEFAULT_ADAPT_RATES
    virtual_mass: float = 1.0
    command_gain: float = 1.0

    def __post_init__(self):
        P = np.asarray(self.p_matrix, dtype=float)
        object.__setattr__(self, "p_matrix", P)
        if P.shape != (2, 2) or abs(P[0, 1] - P[1, 0]) > 1e-12:
            raise ConfigError("p_matrix", "must be a symmetric 2x2 matrix")
        w_min, _, _ = sym_eig2(P)
        if w_min <= 0.0:
            raise ConfigError("p_matrix", f"not positive definite (min eigenvalue {w_min:g})")
        if len(self.adapt_rates) != self.n_subsystems:
            raise ConfigError("adapt_rates",
                              f"need {self.n_subsystems} rates, got {len(self.adapt_rates)}")
        if any(rate <= 0.0 for rate in self.adapt_rates):
            raise ConfigError("adapt_rates", "rates must be strictly positive")
        if self.virtual_mass <= 0.0:
            raise ConfigError("virtual_mass", "must be strictly positive")

    @property
    def n_subsystems(self) -> int:
        return len(self.family.subsystems)

    @property
    def error_weight(self) -> Array:
        """P B: weight turning the tracking error into the adaptation signal."""
        return self.p_matrix @ plant_input_matrix(self.virtual_mass)

    def matched_gains(self) -> Array:
        """Gain rows that reproduce each subsystem exactly: row i is
        virtual_mass * (second row of A_i)."""
        return np.vstack([self.virtual_mass * sub.A[1, :]
                          for sub in self.family.subsystems])

    def initial_gains(self) -> Array:
        """Every row starts at the matched gains of the first (soft)
        subsystem, so the soft loop starts matched and the others do not."""
        first = self.virtual_mass * self.family.subsystems[0].A[1, :]
        return np.tile(first, (self.n_subsystems, 1))


@dataclass(frozen=True)
class ChannelState:
    """State of one admittance axis.

    ``dev`` is the virtual plant deviation (position, velocity) from the
    operating point, ``dev_ref`` the reference-model deviation, and
    ``gains`` the per-subsystem feedback rows (only the active row moves).
    """

    dev: Array
    dev_ref: Array
    gains: Array

    def tracking_error(self) -> Array:
        return self.dev - self.dev_ref


def initial_channel_state(params: AdaptiveAdmittanceParams) -> ChannelState:
    return ChannelState(dev=np.zeros(2), dev_ref=np.zeros(2),
                        gains=params.initial_gains())


def control_input(params: AdaptiveAdmittanceParams, state: ChannelState,
                  force: float, index: int) -> float:
    """Virtual plant input u = gains_active . dev + command_gain * force."""
    row = state.gains[index - 1]
    return float(row @ state.dev) + params.command_gain * float(force)


def channel_derivatives(params: AdaptiveAdmittanceParams, dev: Array,
                        dev_ref: Array, gains: Array, force: float,
                        index: int) -> tuple[Array, Array, Array]:
    """Time derivatives of (dev, dev_ref, gains) with subsystem ``index``
    active; inactive gain rows get exactly zero."""
    u = float(gains[index - 1] @ dev) + params.command_gain * float(force)
    ddev = np.array([dev[1], u / params.virtual_mass])
    ddev_ref = params.family.derivative(dev_ref, force, index)
    dgains = np.zeros_like(gains)
    err_sig = float((dev - dev_ref) @ params.error_weight)
    dgains[index - 1] = -params.adapt_rates[index - 1] * err_sig * dev
    return ddev, ddev_ref, dgains


def rk4_channel_step(params: AdaptiveAdmittanceParams, state: ChannelState,
                     force_at, t: float, dt: float, index: int) -> ChannelState:
    """One classical RK4 step of the coupled channel with the subsystem
    frozen for the whole step; ``force_at(t)`` is sampled at stage times."""

    def deriv(dev, dev_ref, gains, tau):
        return channel_derivatives(params, dev, dev_ref, gains,
                                   force_at(tau), index)

    y = (state.dev, state.dev_ref, state.gains)
    k1 = deriv(*y, t)
    k2 = deriv(*(a + 0.5 * dt * b for a, b in zip(y, k1)), t + 0.5 * dt)
    k3 = deriv(*(a + 0.5 * dt * b for a, b in zip(y, k2)), t + 0.5 * dt)
    k4 = deriv(*(a + dt * b for a, b in zip(y, k3)), t + dt)
    new = [a + dt / 6.0 * (b + 2.0 * c + 2.0 * d + e)
           for a, b, c, d, e in zip(y, k1, k2, k3, k4)]
    return ChannelState(dev=new[0], dev_ref=new[1], gains=new[2])


def lyapunov_value(params: AdaptiveAdmittanceParams, state: ChannelState) -> float:
    """Composite Lyapunov value of the channel (error plus gain mismatch)."""
    e = state.tracking_error()
    value = 0.5 * float(e @ params.p_matrix @ e)
    matched = params.matched_gains()
    for i, rate in enumerate(params.adapt_rates):
        mism = state.gains[i] - matched[i]
        value += 0.5 * float(mism @ mism) / rate
    return value


def clamp_force(value: float, f_max: float) -> float:
    """Saturate one force component to [-f_max, f_max]."""
    if value > f_max:
        return f_max
    if value < -f_max:
        return -f_max
    return value
