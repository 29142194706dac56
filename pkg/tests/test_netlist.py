import pytest

from nwram.device import DeviceKind
from nwram.layout import cell_parasitics
from nwram.netlist import (
    Capacitor,
    CellKind,
    Circuit,
    NetlistError,
    build_cell,
    build_nwram_array,
    to_text,
    transistor_count,
    validate,
)

COUNTS = {CellKind.NWRAM_10T: 10, CellKind.SRAM_6T_HP: 6, CellKind.SRAM_6T_LP: 6,
          CellKind.SRAM_8T_HP: 8, CellKind.SRAM_8T_LP: 8}


@pytest.mark.parametrize("kind", list(CellKind))
def test_cell_counts_and_validity(kind):
    c = build_cell(kind, parasitics=cell_parasitics(kind))
    assert transistor_count(c) == COUNTS[kind]
    assert validate(c) == []


def test_nwram_is_single_device_type():
    c = build_cell(CellKind.NWRAM_10T)
    assert {t.kind for t in c.transistors} == {DeviceKind.XNWFET_2C}
    assert set(c.driven) == {"bit_0", "read_0", "W_0_pre_0", "W_0_eva_0", "W_0_pre_1", "W_0_eva_1"}


def test_sram_uses_sized_pass_and_pulldown():
    c = build_cell(CellKind.SRAM_6T_HP)
    mult = {t.name: t.width_mult for t in c.transistors}
    assert mult["Mpg_q"] == 1.4 and mult["Mpd_q"] == 1.7 and mult["Mpu_q"] == 1.0


def test_array_counts():
    c = build_nwram_array(4, 4)
    assert transistor_count(c) == 160
    assert validate(c) == []
    assert {f"bit_{j}" for j in range(4)} <= set(c.driven)
    assert len([p for p in c.driven if p.startswith("W_")]) == 16


def test_array_bitline_accumulates_per_cell_wire():
    par = cell_parasitics(CellKind.NWRAM_10T)
    c = build_nwram_array(4, 2, parasitics=par)
    wire = {x.node: x.farads for x in c.capacitors}
    assert wire["bit_0"] == pytest.approx(4 * par["bit_0"].farads)
    assert wire["read_1"] == pytest.approx(2 * par["read_0"].farads)


def test_bad_dimensions_and_parasitics():
    with pytest.raises(NetlistError):
        build_nwram_array(0, 3)
    with pytest.raises(NetlistError):
        build_cell(CellKind.NWRAM_10T, parasitics={"nope": 1e-15})
    with pytest.raises(NetlistError):
        build_cell(CellKind.NWRAM_10T, parasitics={"out": -1e-15})


def test_validate_reports_dangling_and_zero_cap():
    c = Circuit("t", ("VDD", "VSS", "a", "b"), {"VDD": 0.8, "VSS": 0.0},
                capacitors=(Capacitor("C1", "a", 0.0),))
    problems = validate(c)
    assert any("dangling node: b" in p for p in problems)
    assert any("zero capacitance" in p for p in problems)


def test_validate_reports_missing_node():
    c = Circuit("t", ("VDD", "VSS"), {"VDD": 0.8, "VSS": 0.0},
                capacitors=(Capacitor("C1", "ghost", 1e-15),))
    assert any("missing node" in p for p in validate(c))


def test_text_export():
    txt = to_text(build_cell(CellKind.NWRAM_10T))
    lines = txt.splitlines()
    assert lines[0] == "* NWRAM_10T"
    assert sum(l.startswith("M ") for l in lines) == 10
    assert ".port bit_0 bit_0 driven" in lines
    assert ".rail VDD 0.8" in lines
