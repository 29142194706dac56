import pytest

from nwram.layout import (
    AREA_16NM_UM2,
    NM,
    NWRAM_GEOMETRY,
    PITCH_MAX,
    PITCH_MIN,
    RULE_FACTORS,
    UM2,
    CellGeometry,
    LayoutError,
    WireModel,
    bitline_lengths,
    cell_area,
    cell_area_bounds,
    cell_parasitics,
    extract_wire_rc,
    reference_rules,
    scale_area,
    scale_rules,
    scaling_scenarios,
    sram_6t_area_bounds,
)
from nwram.netlist import CellKind


def test_area_rows_reproduced_exactly():
    for col, rows in zip(scaling_scenarios(), AREA_16NM_UM2):
        for s, target in zip(col, rows):
            assert round(scale_area(s.ref_area, s.area_factor) / UM2, 6) == target


def test_rule_columns_reproduced_exactly():
    r = scale_rules(reference_rules(1), RULE_FACTORS[1])
    assert round(r.m1_half_pitch / NM, 6) == 24.5
    for c in range(4):
        for row in range(3):
            assert scale_rules(reference_rules(c, row), RULE_FACTORS[c]).m1_half_pitch > 0


def test_6t_bounds_span_table():
    lo, hi = sram_6t_area_bounds()
    assert (round(lo / UM2, 6), round(hi / UM2, 6)) == (0.025, 0.064)


def test_nwram_bound_ratio():
    lo, hi = cell_area_bounds(CellKind.NWRAM_10T)
    assert hi / lo == pytest.approx(2.25, rel=1e-12)
    assert lo / UM2 == pytest.approx(0.032)


def test_rejects_out_of_range():
    with pytest.raises(LayoutError):
        cell_area(NWRAM_GEOMETRY, 30 * NM)
    with pytest.raises(LayoutError):
        scale_area(0.1, 0.9)
    with pytest.raises(LayoutError):
        scale_rules(reference_rules(0), 0.5)
    with pytest.raises(LayoutError):
        CellGeometry(0, 3)


def test_wire_rc_reference():
    rc = extract_wire_rc(320 * NM, 40 * NM)
    assert rc.ohms == pytest.approx(10.0)
    assert rc.farads == pytest.approx(0.064e-15)
    with pytest.raises(LayoutError):
        extract_wire_rc(0.0, 1.0)
    with pytest.raises(LayoutError):
        WireModel(sheet_resistance=0.0)


def test_bitline_lengths_and_parasitics():
    assert bitline_lengths(CellKind.NWRAM_10T) == pytest.approx(200 * NM)
    assert bitline_lengths(CellKind.SRAM_8T_HP) == pytest.approx(120 * NM)
    assert bitline_lengths(CellKind.SRAM_6T_HP) == pytest.approx(98 * NM)
    lo = cell_parasitics(CellKind.NWRAM_10T, PITCH_MIN)
    hi = cell_parasitics(CellKind.NWRAM_10T, PITCH_MAX)
    assert hi["bit_0"].farads / lo["bit_0"].farads == pytest.approx(1.5)
    # resistance of a half-pitch-wide wire does not change with pitch
    assert hi["bit_0"].ohms == pytest.approx(lo["bit_0"].ohms)


def test_geometry_override():
    lo, _ = cell_area_bounds(CellKind.SRAM_8T_HP, CellGeometry(5, 3))
    assert lo / UM2 == pytest.approx(15 * 0.0016)
