"""Exception types shared across the simulator."""

from __future__ import annotations


class AdmitSwitchError(Exception):
    """Base class for all simulator errors."""

    #: short machine-readable label printed by the CLI
    label = "error"


class ConfigError(AdmitSwitchError):
    """Scenario configuration is invalid; carries the offending field."""

    label = "config_error"

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class SingularityError(AdmitSwitchError):
    """Jacobian determinant below the singularity threshold."""

    label = "singular"

    def __init__(self, det: float, q=None, t: float | None = None):
        detail = f"|det J| = {abs(det):.3e} below threshold"
        if q is not None:
            detail += f" at q = {list(q)}"
        if t is not None:
            detail += f", t = {t:.4f} s"
        super().__init__(detail)
        self.det = det
        self.q = q
        self.t = t


class NonfiniteStateError(AdmitSwitchError):
    """A state vector picked up a NaN or infinity (divergence guard)."""

    label = "nonfinite_state"


class UncoveredStateError(AdmitSwitchError):
    """No partition region contains the queried state."""

    label = "uncovered_state"


class NotHurwitzError(AdmitSwitchError):
    """Matrix expected to be Hurwitz has an eigenvalue with Re >= 0."""

    label = "not_hurwitz"


class UnmatchableError(AdmitSwitchError):
    """Reference matrix cannot be reached by state feedback through B."""

    label = "unmatchable"


class CqlfRejection(AdmitSwitchError):
    """A candidate common Lyapunov matrix fails the definiteness tests."""

    label = "cqlf_rejected"

    def __init__(self, message: str, subsystem_index: int | None = None,
                 eigenvalue: float | None = None):
        super().__init__(message)
        self.subsystem_index = subsystem_index
        self.eigenvalue = eigenvalue


class NoCqlfError(AdmitSwitchError):
    """Search for a common Lyapunov matrix terminated without a certificate."""

    label = "no_cqlf"

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class LyapunovAuditError(AdmitSwitchError):
    """Enforced audit caught a per-step Lyapunov increase above tolerance."""

    label = "lyapunov_violation"

    def __init__(self, axis: str, t: float, increase: float):
        super().__init__(
            f"Lyapunov value on axis {axis} rose by {increase:.3e} at t = {t:.4f} s")
        self.axis = axis
        self.t = t
        self.increase = increase
