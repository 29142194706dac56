import pytest

from nwram.config import ConfigError, config_from_dict, load_config
from nwram.device import DeviceKind
from nwram.engine import Method
from nwram.netlist import CellKind


def test_defaults_without_file():
    cfg = load_config(None)
    assert cfg.bounds == ("lower", "upper") and len(cfg.cells) == 5


def test_full_roundtrip(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("""
[devices.XNWFET_2C]
ioff = 2e-9
[caps]
c_gate = 0.06e-15
[clock]
period = 8e-9
phase_width = 1.6e-9
gap = 0.4e-9
boosted = true
[sim]
method = "TRAPEZOIDAL"
[thresholds.NWRAM_10T]
v_high_ok = 0.5
v_low_ok = 0.1
sense = 0.4
[geometry.SRAM_8T_HP]
tracks_x = 5
tracks_y = 3
[wire]
cap_per_length = 0.25e-9
[bench]
cells = ["NWRAM_10T", "SRAM_6T_HP"]
bounds = ["upper"]
retention = false
""")
    cfg = load_config(p)
    assert cfg.devices.params[DeviceKind.XNWFET_2C].ioff == 2e-9
    assert cfg.devices.params[DeviceKind.XNWFET_2C].ion == 4.08e-5
    assert cfg.devices.caps.c_gate == 0.06e-15
    assert cfg.scheme.period == 8e-9 and cfg.boosted
    assert cfg.sim.method is Method.TRAPEZOIDAL
    assert cfg.thresholds[CellKind.NWRAM_10T].v_high_ok == 0.5
    assert cfg.geometry[CellKind.SRAM_8T_HP].tracks_x == 5
    assert cfg.cells == (CellKind.NWRAM_10T, CellKind.SRAM_6T_HP)
    assert cfg.bounds == ("upper",) and cfg.retention is False
    assert cfg.wire.cap_per_length == 0.25e-9


@pytest.mark.parametrize("data", [
    {"clok": {}},
    {"clock": {"periodd": 1}},
    {"devices": {"NOPE": {}}},
    {"devices": {"PTM_HP_N": {"kind": "x"}}},
    {"clock": {"gap": 0.0}},
    {"bench": {"bounds": ["middle"]}},
    {"thresholds": {"NWRAM_10T": {"v_high_ok": 0.1, "v_low_ok": 0.2, "sense": 0.3}}},
])
def test_bad_configs_rejected(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_unreadable_file(tmp_path):
    bad = tmp_path / "x.toml"
    bad.write_text("not = [toml")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
