"""Full benchmark: every cell at both pitch-bound parasitic sets."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..device import DeviceConfig
from ..engine import SimConfig
from ..layout import (
    PITCH_MAX,
    PITCH_MIN,
    CellGeometry,
    WireModel,
    cell_area_bounds,
    cell_parasitics,
)
from ..netlist import CellKind, SramSizing
from ..stimulus import ClockScheme
from .metrics import MeasurementError, Thresholds
from .retention import find_max_restore_interval
from .scenarios import CellSetup, active_read_power, leakage_power, read_time, write_time

NWRAM = CellKind.NWRAM_10T
BOUNDS = {"lower": PITCH_MIN, "upper": PITCH_MAX}

# (metric, numerator) -- "sram" means SRAM / NWRAM, "nwram" the inverse
RATIO_SPECS = (
    ("write_time", "sram"),
    ("read_time", "sram"),
    ("leakage_power", "sram"),
    ("active_power_read", "nwram"),
)

READ_WINDOW_NOTE = ("active_power_read: bitline source energy from the start of the "
                    "floating read slot to half a slot after the bitline is re-driven, "
                    "divided by that window")


class ScenarioError(RuntimeError):
    def __init__(self, cell: str, bound: str, scenario: str, message: str):
        super().__init__(f"{cell}/{bound}/{scenario}: {message}")
        self.cell, self.bound, self.scenario, self.message = cell, bound, scenario, message

    def record(self) -> dict:
        return {"error": type(self).__name__, "cell": self.cell, "bound": self.bound,
                "scenario": self.scenario, "message": self.message}


@dataclass(frozen=True)
class SuiteConfig:
    cells: tuple[CellKind, ...] = tuple(CellKind)
    bounds: tuple[str, ...] = ("lower", "upper")
    devices: DeviceConfig = field(default_factory=DeviceConfig)
    sizing: SramSizing = field(default_factory=SramSizing)
    scheme: ClockScheme = field(default_factory=ClockScheme)
    sim: SimConfig = field(default_factory=SimConfig)
    wire: WireModel = field(default_factory=WireModel)
    geometry: dict[CellKind, CellGeometry] = field(default_factory=dict)
    boosted: bool = False
    thresholds: dict[CellKind, Thresholds] = field(default_factory=dict)
    retention: bool = True
    retention_rel_tol: float = 0.05
    leakage_idle: float | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(CellKind(c) for c in self.cells))
        for b in self.bounds:
            if b not in BOUNDS:
                raise ValueError(f"unknown bound {b!r}; expected one of {sorted(BOUNDS)}")

    def setup(self, kind: CellKind, bound: str) -> CellSetup:
        return CellSetup(
            kind=kind, devices=self.devices, sizing=self.sizing,
            parasitics=cell_parasitics(kind, BOUNDS[bound], self.wire,
                                       self.geometry.get(CellKind(kind))),
            scheme=self.scheme, sim=self.sim, boosted=self.boosted,
            thresholds=self.thresholds.get(CellKind(kind)),
        )


@dataclass
class Metrics:
    write_time: float
    read_time: float
    active_power_read: float
    leakage_power: float
    max_restore_interval: float | None   # None for static cells or when skipped
    area_low: float
    area_high: float


@dataclass
class Report:
    metrics: dict[str, dict[str, Metrics]]     # bound -> cell -> metrics
    ratios: dict[str, dict[str, float]]        # bound -> "metric:A/B" -> value
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "metrics": {b: {c: asdict(m) for c, m in cells.items()}
                        for b, cells in self.metrics.items()},
            "ratios": self.ratios,
            "meta": self.meta,
        }

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        js = out / "report.json"
        js.write_text(json.dumps(self.to_json(), indent=2))
        mcsv = out / "metrics.csv"
        cols = list(Metrics.__dataclass_fields__)
        with mcsv.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bound", "cell"] + cols)
            for b, cells in self.metrics.items():
                for c, m in cells.items():
                    w.writerow([b, c] + ["" if getattr(m, k) is None else f"{getattr(m, k):.6e}"
                                         for k in cols])
        rcsv = out / "ratios.csv"
        with rcsv.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bound", "ratio", "value"])
            for b, rs in self.ratios.items():
                for k, v in rs.items():
                    w.writerow([b, k, f"{v:.6g}"])
        return [js, mcsv, rcsv]


def _guard(kind, bound, name, fn):
    try:
        return fn()
    except (MeasurementError, ValueError, RuntimeError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(kind.value, bound, name, str(exc)) from exc


def measure_cell(cfg: SuiteConfig, kind: CellKind, bound: str) -> Metrics:
    s = cfg.setup(kind, bound)
    g = lambda name, fn: _guard(kind, bound, name, fn)
    wt = max(g("write", lambda: write_time(s, 1)), g("write", lambda: write_time(s, 0)))
    rt = g("read", lambda: read_time(s))
    pw = g("active_power_read", lambda: active_read_power(s))
    lk = g("leakage", lambda: leakage_power(s, cfg.leakage_idle)[0])
    ret = None
    if kind is NWRAM and cfg.retention:
        ret = g("retention", lambda: find_max_restore_interval(
            s, rel_tol=cfg.retention_rel_tol).t_star)
    lo, hi = cell_area_bounds(kind, cfg.geometry.get(kind))
    return Metrics(wt, rt, pw, lk, ret, lo, hi)


def ratios_for(cells: dict[str, Metrics]) -> dict[str, float]:
    out = {}
    if NWRAM.value not in cells:
        return out
    nw = cells[NWRAM.value]
    for name, m in cells.items():
        if name == NWRAM.value:
            continue
        for metric, num in RATIO_SPECS:
            a, b = getattr(m, metric), getattr(nw, metric)
            if num == "sram":
                out[f"{metric}:{name}/{NWRAM.value}"] = a / b
            else:
                out[f"{metric}:{NWRAM.value}/{name}"] = b / a
    return out


def _job(args):
    cfg, kind, bound = args
    return bound, kind.value, measure_cell(cfg, kind, bound)


def run_benchmark(cfg: SuiteConfig | None = None) -> Report:
    cfg = cfg or SuiteConfig()
    jobs = [(cfg, k, b) for b in cfg.bounds for k in cfg.cells]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            results = list(ex.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    metrics: dict[str, dict[str, Metrics]] = {b: {} for b in cfg.bounds}
    for bound, cell, m in results:
        metrics[bound][cell] = m
    ratios = {b: ratios_for(cells) for b, cells in metrics.items()}
    meta = {
        "bounds_pitch_m": {b: BOUNDS[b] for b in cfg.bounds},
        "clock": asdict(cfg.scheme),
        "boosted_clocks": cfg.boosted,
        "method": cfg.sim.method.value,
        "read_power_window": READ_WINDOW_NOTE,
        "write_time": "worst of both polarities; from the start of the final evaluate "
                      "(NWRAM) or word-line pulse (SRAM) to the last sense crossing",
        "read_time": "stored-0 read; read control 50% crossing to sensed line at 0.5*Vdd",
        "leakage_power": "worst stored value; all sources over one idle clock period",
    }
    return Report(metrics, ratios, meta)


def check_ratio_consistency(rep: Report, rel: float = 1e-12) -> list[str]:
    """Ratio fields that disagree with the quotient of their metric fields."""
    bad = []
    for b, rs in rep.ratios.items():
        expect = ratios_for(rep.metrics[b])
        for k, v in rs.items():
            if not math.isclose(v, expect[k], rel_tol=rel):
                bad.append(f"{b}:{k}")
    return bad
