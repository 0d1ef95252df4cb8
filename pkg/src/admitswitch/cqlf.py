"""Common quadratic Lyapunov function (CQLF) machinery for families of
2x2 Hurwitz matrices.

Everything here is closed-form for the 2x2 case: eigenvalues via the
quadratic formula, symmetric eigendecomposition via the rotation angle,
and the Lyapunov equation A^T P + P A = -Q reduced to a 3-variable
linear system in (p11, p12, p22).  No iterative linear-algebra backends
are involved, which keeps certification fast and bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CqlfRejection, NoCqlfError, NotHurwitzError

Array = np.ndarray

#: quadratic Lyapunov matrix certified for the stock reference family
DEFAULT_CQLF_P = np.array([[8.16, 2.22], [2.22, 3.90]])

#: decay margin used by the certificate search
SEARCH_MARGIN = 1e-3


def eig2(A: Array) -> tuple[complex, complex]:
    """Eigenvalues of a real 2x2 matrix, slowest (largest real part) first."""
    tr = float(A[0, 0] + A[1, 1])
    det = float(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        root = math.sqrt(disc)
        lo, hi = (tr - root) / 2.0, (tr + root) / 2.0
        return complex(hi), complex(lo)
    root = math.sqrt(-disc)
    return complex(tr / 2.0, root / 2.0), complex(tr / 2.0, -root / 2.0)


def sym_eig2(S: Array) -> tuple[float, float, Array]:
    """Eigendecomposition of a symmetric 2x2 matrix.

    Returns ``(w_min, w_max, R)`` with orthonormal columns of ``R``
    ordered to match, so ``R @ diag(w_min, w_max) @ R.T == S``.
    """
    a, b, c = float(S[0, 0]), float(S[0, 1]), float(S[1, 1])
    mean = 0.5 * (a + c)
    radius = math.hypot(0.5 * (a - c), b)
    w_min, w_max = mean - radius, mean + radius
    # rotation angle diagonalizing S; [cos, sin] pairs with w_max
    theta = 0.5 * math.atan2(2.0 * b, a - c)
    ct, st = math.cos(theta), math.sin(theta)
    R = np.array([[-st, ct], [ct, st]])
    return w_min, w_max, R


def sym_clip(S: Array, max_eig: float | None = None,
             min_eig: float | None = None) -> Array:
    """Project a symmetric matrix onto the cone with clipped eigenvalues."""
    w_min, w_max, R = sym_eig2(S)
    if max_eig is not None:
        w_min, w_max = min(w_min, max_eig), min(w_max, max_eig)
    if min_eig is not None:
        w_min, w_max = max(w_min, min_eig), max(w_max, min_eig)
    return R @ np.diag([w_min, w_max]) @ R.T


def is_hurwitz(A: Array) -> bool:
    """Routh test for 2x2: trace < 0 and det > 0."""
    return float(A[0, 0] + A[1, 1]) < 0.0 and \
        float(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]) > 0.0


def lyap_solve(A: Array, Q: Array) -> Array:
    """Solve A^T P + P A = -Q for symmetric P (2x2, closed form).

    Raises :class:`NotHurwitzError` when A is not Hurwitz, in which case
    the solution would not be a valid Lyapunov matrix.
    """
    if not is_hurwitz(A):
        raise NotHurwitzError(f"matrix with eigenvalues {eig2(A)} is not Hurwitz")
    a, b = float(A[0, 0]), float(A[0, 1])
    c, d = float(A[1, 0]), float(A[1, 1])
    # unknowns (p11, p12, p22)
    lhs = np.array([
        [2.0 * a, 2.0 * c, 0.0],
        [b, a + d, c],
        [0.0, 2.0 * b, 2.0 * d],
    ])
    rhs = -np.array([float(Q[0, 0]), float(Q[0, 1]), float(Q[1, 1])])
    p11, p12, p22 = np.linalg.solve(lhs, rhs)
    return np.array([[p11, p12], [p12, p22]])


def lyapunov_residual(A: Array, P: Array, Q: Array) -> float:
    """Max-abs entry of A^T P + P A + Q."""
    return float(np.abs(A.T @ P + P @ A + Q).max())


@dataclass(frozen=True)
class SubsystemReport:
    """Certificate entry for one subsystem: S = A^T P + P A and its spectrum."""

    A: Array
    S: Array
    eig_min: float
    eig_max: float

    @property
    def negative_definite(self) -> bool:
        return self.eig_max < 0.0


@dataclass(frozen=True)
class CqlfCertificate:
    """Outcome of checking one P against a family of subsystem matrices."""

    P: Array
    p_eig_min: float
    p_eig_max: float
    subsystems: tuple[SubsystemReport, ...]
    ok: bool

    @property
    def worst_eig(self) -> float:
        return max(r.eig_max for r in self.subsystems)


def certify(P: Array, mats: list[Array] | tuple[Array, ...]) -> CqlfCertificate:
    """Check that P is symmetric positive definite and that every
    A_i^T P + P A_i is negative definite.  Never raises; inspect ``ok``."""
    P = np.asarray(P, dtype=float)
    sym_defect = float(abs(P[0, 1] - P[1, 0]))
    p_min, p_max, _ = sym_eig2(0.5 * (P + P.T))
    reports = []
    for A in mats:
        A = np.asarray(A, dtype=float)
        S = A.T @ P + P @ A
        w_min, w_max, _ = sym_eig2(0.5 * (S + S.T))
        reports.append(SubsystemReport(A=A, S=S, eig_min=w_min, eig_max=w_max))
    ok = sym_defect < 1e-12 and p_min > 0.0 and all(r.negative_definite for r in reports)
    return CqlfCertificate(P=P, p_eig_min=p_min, p_eig_max=p_max,
                           subsystems=tuple(reports), ok=ok)


def require_cqlf(P: Array, mats: list[Array] | tuple[Array, ...]) -> CqlfCertificate:
    """Like :func:`certify` but raises :class:`CqlfRejection` on failure."""
    cert = certify(P, mats)
    if cert.ok:
        return cert
    if cert.p_eig_min <= 0.0:
        raise CqlfRejection(
            f"candidate P is not positive definite (min eigenvalue {cert.p_eig_min:g})",
            eigenvalue=cert.p_eig_min)
    for i, rep in enumerate(cert.subsystems, start=1):
        if not rep.negative_definite:
            raise CqlfRejection(
                f"A^T P + P A for subsystem {i} is not negative definite "
                f"(max eigenvalue {rep.eig_max:g})",
                subsystem_index=i, eigenvalue=rep.eig_max)
    raise CqlfRejection("candidate P rejected")


def search_cqlf(mats: list[Array] | tuple[Array, ...], eps: float = SEARCH_MARGIN,
                max_iter: int = 500) -> CqlfCertificate:
    """Find a common quadratic Lyapunov matrix by alternating projections.

    Starting from the average of the per-subsystem Lyapunov solutions for
    Q = I, each sweep clips every S_i = A_i^T P + P A_i onto the cone
    {max eigenvalue <= -eps}, maps the clipped targets back through the
    Lyapunov operator, averages, and re-projects P onto {P >= eps I}.
    Raises :class:`NoCqlfError` when the sweep limit is exhausted, which
    for 2x2 pairs is strong evidence no CQLF exists.
    """
    mats = [np.asarray(A, dtype=float) for A in mats]
    if not mats:
        raise ValueError("need at least one subsystem matrix")
    for A in mats:
        if not is_hurwitz(A):
            raise NotHurwitzError(
                f"subsystem with eigenvalues {eig2(A)} is not Hurwitz")
    def normalize(P: Array) -> Array:
        # P is a CQLF iff c P is; pin trace(P) = 2 so the iterate cannot
        # blow up or collapse onto the eps I floor
        P = sym_clip(0.5 * (P + P.T), min_eig=eps)
        return P * (2.0 / (P[0, 0] + P[1, 1]))

    I = np.eye(2)
    P = normalize(sum(lyap_solve(A, I) for A in mats) / len(mats))
    history = []
    for sweep in range(max_iter):
        worst = -math.inf
        targets = []
        for A in mats:
            S = A.T @ P + P @ A
            S = 0.5 * (S + S.T)
            _, w_max, _ = sym_eig2(S)
            worst = max(worst, w_max)
            targets.append(sym_clip(S, max_eig=-eps))
        if not math.isfinite(worst):
            break
        history.append(worst)
        if worst <= -eps * 0.5:
            cert = certify(P, mats)
            if cert.ok:
                return cert
            break
        P = normalize(sum(lyap_solve(A, -T) for A, T in zip(mats, targets)) / len(mats))
    raise NoCqlfError(
        f"no common quadratic Lyapunov matrix found in {max_iter} sweeps",
        report={"worst_eig_trace": history[-10:], "eps": eps})


def format_certificate(cert: CqlfCertificate) -> str:
    """Human-readable certificate block (used verbatim in certificate.txt)."""
    lines = []
    lines.append("common quadratic Lyapunov certificate")
    lines.append(f"  P           = [[{cert.P[0, 0]:.9g}, {cert.P[0, 1]:.9g}],")
    lines.append(f"                 [{cert.P[1, 0]:.9g}, {cert.P[1, 1]:.9g}]]")
    lines.append(f"  eig(P)      = [{cert.p_eig_min:.9g}, {cert.p_eig_max:.9g}]"
                 f"  ({'positive definite' if cert.p_eig_min > 0 else 'NOT positive definite'})")
    for i, rep in enumerate(cert.subsystems, start=1):
        lines.append(f"  subsystem {i}: A = [[{rep.A[0, 0]:.9g}, {rep.A[0, 1]:.9g}], "
                     f"[{rep.A[1, 0]:.9g}, {rep.A[1, 1]:.9g}]]")
        lines.append(f"    A'P + PA  = [[{rep.S[0, 0]:.9g}, {rep.S[0, 1]:.9g}],")
        lines.append(f"                 [{rep.S[1, 0]:.9g}, {rep.S[1, 1]:.9g}]]")
        lines.append(f"    eig       = [{rep.eig_min:.9g}, {rep.eig_max:.9g}]"
                     f"  ({'negative definite' if rep.negative_definite else 'NOT negative definite'})")
    lines.append(f"  verdict     : {'CERTIFIED' if cert.ok else 'REJECTED'}")
    return "\n".join(lines)
