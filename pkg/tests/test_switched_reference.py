"""Unit tests for the switched reference-model family and its regions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admitswitch.errors import NotHurwitzError, UncoveredStateError
from admitswitch.switched_reference import (
    A_MODEL_SOFT,
    A_MODEL_STIFF,
    B_MODEL,
    ConvexCell,
    HalfspaceRow,
    ReferenceSubsystem,
    Region,
    SwitchedReferenceFamily,
    make_position_band_family,
    switching_threshold,
)

FAMILY = make_position_band_family()
THR = switching_threshold()

deviations = st.floats(-3.0, 3.0, allow_nan=False)


class TestThreshold:
    def test_stock_value(self):
        assert THR == pytest.approx(0.998)

    def test_scales_with_limit(self):
        assert switching_threshold(0.5, 0.01) == pytest.approx(0.495)

    @pytest.mark.parametrize("limit,band", [(1.0, 0.0), (1.0, 1.0), (0.0, 0.1), (-1.0, 0.1)])
    def test_rejects_degenerate(self, limit, band):
        with pytest.raises(ValueError):
            switching_threshold(limit, band)


class TestHalfspaces:
    def test_nonstrict_row_includes_boundary(self):
        row = HalfspaceRow(h=(1.0, 0.0, -1.0))
        assert row.holds(1.0, 99.0)
        assert row.holds(0.5, 0.0)
        assert not row.holds(1.0 + 1e-12, 0.0)

    def test_strict_row_excludes_boundary(self):
        row = HalfspaceRow(h=(1.0, 0.0, -1.0), strict=True)
        assert not row.holds(1.0, 0.0)
        assert row.holds(1.0 - 1e-12, 0.0)

    def test_velocity_coefficient(self):
        row = HalfspaceRow(h=(0.0, -1.0, 0.25))
        assert row.holds(5.0, 0.25)
        assert not row.holds(5.0, 0.2)

    def test_cell_is_intersection(self):
        cell = ConvexCell(rows=(
            HalfspaceRow(h=(1.0, 0.0, -1.0)),
            HalfspaceRow(h=(-1.0, 0.0, -1.0)),
        ))
        assert cell.contains(0.0, 0.0)
        assert cell.contains(1.0, 0.0)
        assert not cell.contains(1.5, 0.0)

    def test_region_is_union(self):
        region = Region(cells=(
            ConvexCell(rows=(HalfspaceRow(h=(-1.0, 0.0, 1.0), strict=True),)),
            ConvexCell(rows=(HalfspaceRow(h=(1.0, 0.0, 1.0), strict=True),)),
        ))
        assert region.contains(2.0, 0.0)
        assert region.contains(-2.0, 0.0)
        assert not region.contains(0.0, 0.0)
        assert not region.contains(1.0, 0.0)


class TestStockFamily:
    def test_subsystem_matrices(self):
        assert FAMILY.matrices[0] == pytest.approx(A_MODEL_SOFT)
        assert FAMILY.matrices[1] == pytest.approx(A_MODEL_STIFF)
        assert FAMILY.B == pytest.approx(B_MODEL)

    @given(d1=deviations, d2=deviations)
    @settings(max_examples=200, deadline=None)
    def test_partition_by_position_magnitude(self, d1, d2):
        idx = FAMILY.active_index_at(d1, d2)
        assert idx == (1 if abs(d1) <= THR else 2)

    def test_boundary_belongs_to_soft_region(self):
        assert FAMILY.active_index_at(THR, 0.0) == 1
        assert FAMILY.active_index_at(-THR, 5.0) == 1
        assert FAMILY.active_index_at(math.nextafter(THR, 2.0), 0.0) == 2

    @given(d1=deviations, d2=deviations)
    @settings(max_examples=100, deadline=None)
    def test_exactly_one_region_matches(self, d1, d2):
        hits = [sub.region.contains(d1, d2) for sub in FAMILY.subsystems]
        assert sum(hits) == 1

    def test_velocity_never_triggers_switch(self):
        assert FAMILY.active_index_at(0.0, 1e6) == 1
        assert FAMILY.active_index_at(0.999, -1e6) == 2

    def test_derivative_soft(self):
        d = FAMILY.derivative(np.array([0.5, -0.2]), 0.0, 1)
        assert d == pytest.approx([-0.2, -5 * 0.5 - 9 * -0.2])

    def test_derivative_stiff_with_command(self):
        d = FAMILY.derivative(np.array([1.2, 0.1]), 2.0, 2)
        assert d == pytest.approx([0.1, -20 * 1.2 - 25 * 0.1 + 2.0])

    def test_eigenvalues_and_decay_rates(self):
        hi1, lo1 = FAMILY.eigenvalues(1)
        assert hi1 == pytest.approx((-9 + math.sqrt(61)) / 2)
        assert lo1 == pytest.approx((-9 - math.sqrt(61)) / 2)
        assert FAMILY.slowest_decay_rate(1) == pytest.approx((9 - math.sqrt(61)) / 2)
        hi2, _ = FAMILY.eigenvalues(2)
        assert FAMILY.slowest_decay_rate(2) == pytest.approx(-hi2.real)

    def test_active_index_array_api(self):
        assert FAMILY.active_index(np.array([0.5, 0.0])) == 1
        assert FAMILY.active_index(np.array([1.5, 0.0])) == 2

    def test_custom_threshold(self):
        fam = make_position_band_family(threshold=0.25)
        assert fam.active_index_at(0.25, 0.0) == 1
        assert fam.active_index_at(0.26, 0.0) == 2


class TestValidation:
    def test_rejects_non_hurwitz_subsystem(self):
        with pytest.raises(NotHurwitzError):
            make_position_band_family(a_soft=np.array([[0.0, 1.0], [5.0, -1.0]]))

    def test_rejects_empty_family(self):
        with pytest.raises(ValueError):
            SwitchedReferenceFamily(subsystems=())

    def test_rejects_bad_threshold(self):
        with pytest.raises(ValueError):
            make_position_band_family(threshold=-1.0)

    def test_uncovered_state_raises(self):
        # family whose single region is a bounded box
        box = Region(cells=(ConvexCell(rows=(
            HalfspaceRow(h=(1.0, 0.0, -1.0)),
            HalfspaceRow(h=(-1.0, 0.0, -1.0)),
        )),))
        fam = SwitchedReferenceFamily(
            subsystems=(ReferenceSubsystem(A=A_MODEL_SOFT, region=box),))
        assert fam.active_index_at(0.0, 0.0) == 1
        with pytest.raises(UncoveredStateError):
            fam.active_index_at(2.0, 0.0)
