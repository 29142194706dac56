import csv
import json

import pytest

from nwram.bench.metrics import Thresholds
from nwram.bench.suite import (
    Metrics,
    ScenarioError,
    SuiteConfig,
    check_ratio_consistency,
    measure_cell,
    ratios_for,
    run_benchmark,
)
from nwram.netlist import CellKind

NW, HP8 = CellKind.NWRAM_10T, CellKind.SRAM_8T_HP


@pytest.fixture(scope="module")
def report():
    return run_benchmark(SuiteConfig(cells=(NW, HP8), bounds=("lower",), retention=False))


def test_report_shape_and_consistency(report):
    m = report.metrics["lower"]
    assert set(m) == {NW.value, HP8.value}
    assert m[NW.value].max_restore_interval is None
    assert check_ratio_consistency(report) == []
    r = report.ratios["lower"]
    assert set(r) == {"write_time:SRAM_8T_HP/NWRAM_10T", "read_time:SRAM_8T_HP/NWRAM_10T",
                      "leakage_power:SRAM_8T_HP/NWRAM_10T",
                      "active_power_read:NWRAM_10T/SRAM_8T_HP"}
    assert "read_power_window" in report.meta


def test_report_files(report, tmp_path):
    paths = report.write(tmp_path)
    assert [p.name for p in paths] == ["report.json", "metrics.csv", "ratios.csv"]
    rows = list(csv.DictReader((tmp_path / "metrics.csv").open()))
    assert rows[0]["max_restore_interval"] == ""
    assert set(rows[0]) == {"bound", "cell"} | set(Metrics.__dataclass_fields__)
    js = json.loads((tmp_path / "report.json").read_text())
    assert js["metrics"]["lower"][NW.value]["area_low"] == pytest.approx(0.032e-12)


def test_ratio_quotients():
    a = Metrics(1.0, 2.0, 3.0, 4.0, None, 1.0, 2.0)
    b = Metrics(2.0, 2.0, 6.0, 40.0, None, 1.0, 2.0)
    r = ratios_for({NW.value: a, HP8.value: b})
    assert r["write_time:SRAM_8T_HP/NWRAM_10T"] == 2.0
    assert r["active_power_read:NWRAM_10T/SRAM_8T_HP"] == 0.5
    assert r["leakage_power:SRAM_8T_HP/NWRAM_10T"] == 10.0


def test_scenario_failure_is_attributed():
    # a sense level above the rail means no node ever changes state
    cfg = SuiteConfig(cells=(NW,), bounds=("lower",), retention=False,
                      thresholds={NW: Thresholds(1.2, 0.1, 1.1)})
    with pytest.raises(ScenarioError) as exc:
        measure_cell(cfg, NW, "lower")
    rec = exc.value.record()
    assert rec["cell"] == NW.value and rec["scenario"] == "write"


def test_unknown_bound():
    with pytest.raises(ValueError):
        SuiteConfig(bounds=("middle",))


def test_nwram_only_suite_has_no_ratios():
    rep = run_benchmark(SuiteConfig(cells=(NW,), bounds=("lower",), retention=False))
    assert rep.ratios == {"lower": {}}
    assert rep.metrics["lower"][NW.value].write_time > 0
