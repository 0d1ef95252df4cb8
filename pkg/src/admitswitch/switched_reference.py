"""Piecewise-linear switched reference model for the admittance channel.

The reference state is the deviation of the virtual target from the
operating point, per Cartesian axis.  State space is partitioned by the
magnitude of the position deviation: a compliant (soft) model acts in
the inner band, a stiff high-damping model takes over beyond the switch
threshold and pulls the target back toward the safe region.

Regions are unions of convex cells; each cell is an intersection of
half-spaces written as rows h in R^3 acting on the lifted state
[d1, d2, 1], with membership h . [d1, d2, 1] <= 0 (or < 0 for strict
rows).  The outer region is a union of two disjoint cells, one per sign
of the position deviation, which keeps every cell convex.  Boundary
states satisfy the non-strict inner rows only, so ties resolve to the
soft model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cqlf import eig2, is_hurwitz
from .errors import NotHurwitzError, UncoveredStateError

Array = np.ndarray

#: compliant inner model: poles are the roots of s^2 + 9 s + 5
A_MODEL_SOFT = np.array([[0.0, 1.0], [-5.0, -9.0]])

#: stiff outer model: poles are the roots of s^2 + 25 s + 20
A_MODEL_STIFF = np.array([[0.0, 1.0], [-20.0, -25.0]])

#: shared input matrix (reference command enters the velocity row)
B_MODEL = np.array([0.0, 1.0])

#: stock safe position deviation (m) and relative switch band
DEFAULT_SAFE_LIMIT = 1.0
DEFAULT_SWITCH_BAND = 0.002


def switching_threshold(safe_limit: float = DEFAULT_SAFE_LIMIT,
                        band: float = DEFAULT_SWITCH_BAND) -> float:
    """Switch boundary placed just inside the safe limit: (1 - band) * limit."""
    if not 0.0 < band < 1.0:
        raise ValueError("band must lie in (0, 1)")
    if safe_limit <= 0.0:
        raise ValueError("safe_limit must be positive")
    return (1.0 - band) * safe_limit


@dataclass(frozen=True)
class HalfspaceRow:
    """One affine constraint h . [d1, d2, 1] <= 0 (< 0 when strict)."""

    h: tuple[float, float, float]
    strict: bool = False

    def holds(self, d1: float, d2: float) -> bool:
        value = self.h[0] * d1 + self.h[1] * d2 + self.h[2]
        return value < 0.0 if self.strict else value <= 0.0


@dataclass(frozen=True)
class ConvexCell:
    """Intersection of half-space rows."""

    rows: tuple[HalfspaceRow, ...]

    def contains(self, d1: float, d2: float) -> bool:
        return all(row.holds(d1, d2) for row in self.rows)


@dataclass(frozen=True)
class Region:
    """Union of convex cells (need not be convex or connected)."""

    cells: tuple[ConvexCell, ...]

    def contains(self, d1: float, d2: float) -> bool:
        return any(cell.contains(d1, d2) for cell in self.cells)


@dataclass(frozen=True)
class ReferenceSubsystem:
    """One linear reference model with the region where it is active."""

    A: Array
    region: Region

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        object.__setattr__(self, "A", A)
        if A.shape != (2, 2):
            raise ValueError("subsystem matrix must be 2x2")
        if not is_hurwitz(A):
            raise NotHurwitzError(
                f"reference subsystem with eigenvalues {eig2(A)} is not Hurwitz")


@dataclass(frozen=True)
class SwitchedReferenceFamily:
    """Ordered family of reference subsystems covering the deviation plane.

    ``active_index`` returns the 1-based index of the first subsystem
    whose region contains the state, so earlier subsystems win ties on
    shared boundaries.
    """

    subsystems: tuple[ReferenceSubsystem, ...]
    B: Array = field(default_factory=lambda: B_MODEL.copy())

    def __post_init__(self):
        if not self.subsystems:
            raise ValueError("family needs at least one subsystem")
        B = np.asarray(self.B, dtype=float)
        object.__setattr__(self, "B", B)
        if B.shape != (2,):
            raise ValueError("input matrix must be a 2-vector")

    @property
    def matrices(self) -> tuple[Array, ...]:
        return tuple(sub.A for sub in self.subsystems)

    def active_index_at(self, d1: float, d2: float) -> int:
        for i, sub in enumerate(self.subsystems, start=1):
            if sub.region.contains(d1, d2):
                return i
        raise UncoveredStateError(
            f"no region contains deviation ({d1:g}, {d2:g})")

    def active_index(self, delta: Array) -> int:
        return self.active_index_at(float(delta[0]), float(delta[1]))

    def derivative(self, delta_m: Array, r: float, index: int) -> Array:
        A = self.subsystems[index - 1].A
        return A @ delta_m + self.B * float(r)

    def eigenvalues(self, index: int) -> tuple[complex, complex]:
        return eig2(self.subsystems[index - 1].A)

    def slowest_decay_rate(self, index: int) -> float:
        """Magnitude of the real part of the slowest pole of subsystem i."""
        hi, _ = self.eigenvalues(index)
        return -hi.real


def make_position_band_family(threshold: float | None = None,
                              a_soft: Array = A_MODEL_SOFT,
                              a_stiff: Array = A_MODEL_STIFF,
                              b: Array = B_MODEL) -> SwitchedReferenceFamily:
    """Two-subsystem family switching on |position deviation|.

    Inner region (soft): |d1| <= threshold, one cell with two non-strict
    rows.  Outer region (stiff): |d1| > threshold, two strict one-row
    cells.  The boundary |d1| = threshold belongs to the soft region.
    """
    thr = switching_threshold() if threshold is None else float(threshold)
    if thr <= 0.0:
        raise ValueError("threshold must be positive")
    inner = Region(cells=(
        ConvexCell(rows=(
            HalfspaceRow(h=(1.0, 0.0, -thr)),
            HalfspaceRow(h=(-1.0, 0.0, -thr)),
        )),
    ))
    outer = Region(cells=(
        ConvexCell(rows=(HalfspaceRow(h=(-1.0, 0.0, thr), strict=True),)),
        ConvexCell(rows=(HalfspaceRow(h=(1.0, 0.0, thr), strict=True),)),
    ))
    return SwitchedReferenceFamily(subsystems=(
        ReferenceSubsystem(A=a_soft, region=inner),
        ReferenceSubsystem(A=a_stiff, region=outer),
    ), B=b)
