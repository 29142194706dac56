"""TOML configuration for the CLI and benchmark suite.

Every table is optional; unknown tables or keys are rejected so typos do
not silently fall back to defaults.  Schema::

    [devices.<KIND>]        ion, ioff, vdd_nominal, vth, length, width
    [caps]                  c_gate, c_drain, c_source, scale_with_geometry
    [sizing]                pass_mult, pulldown_mult, pullup_mult
    [clock]                 period, phase_width, gap, rise_fall, v_low, boosted
    [sim]                   method, dt_max, sample_interval, stability_factor, leakage
    [thresholds.<CELL>]     v_high_ok, v_low_ok, sense
    [wire]                  sheet_resistance, cap_per_length
    [geometry.<CELL>]       tracks_x, tracks_y     (NWRAM_10T, SRAM_8T_HP/LP)
    [bench]                 cells, bounds, retention, retention_rel_tol,
                            leakage_idle, workers
"""

from __future__ import annotations

import sys
from dataclasses import fields, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .bench.metrics import Thresholds
from .bench.suite import SuiteConfig
from .device import CapConfig, DeviceConfig, DeviceKind, PRESETS, DeviceParams
from .engine import SimConfig
from .layout import CellGeometry, WireModel
from .netlist import CellKind, SramSizing
from .stimulus import ClockScheme


class ConfigError(ValueError):
    pass


def _names(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def _check(table: dict, allowed: set[str], where: str) -> dict:
    if not isinstance(table, dict):
        raise ConfigError(f"[{where}] must be a table")
    extra = set(table) - allowed
    if extra:
        raise ConfigError(f"[{where}] unknown keys: {sorted(extra)}")
    return table


def _enum_keys(table: dict, enum_cls, where: str) -> dict:
    out = {}
    for k, v in _check(table, {e.value for e in enum_cls}, where).items():
        out[enum_cls(k)] = v
    return out


def load_config(path: str | Path | None) -> SuiteConfig:
    if path is None:
        return SuiteConfig()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return config_from_dict(data)


def config_from_dict(data: dict[str, Any]) -> SuiteConfig:
    _check(data, {"devices", "caps", "sizing", "clock", "sim", "thresholds", "wire",
                  "geometry", "bench"}, "top level")
    try:
        return _build(data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _build(data: dict[str, Any]) -> SuiteConfig:
    params = dict(PRESETS)
    param_keys = _names(DeviceParams) - {"kind"}
    for kind, over in _enum_keys(data.get("devices", {}), DeviceKind, "devices").items():
        _check(over, param_keys, f"devices.{kind.value}")
        params[kind] = replace(params[kind], **{k: float(v) for k, v in over.items()})
    caps = CapConfig(**_check(data.get("caps", {}), _names(CapConfig), "caps"))
    devices = DeviceConfig(params=params, caps=caps)

    sizing = SramSizing(**_check(data.get("sizing", {}), _names(SramSizing), "sizing"))

    clock = dict(_check(data.get("clock", {}),
                        _names(ClockScheme) - {"v_high"} | {"boosted"}, "clock"))
    boosted = bool(clock.pop("boosted", False))
    scheme = ClockScheme(**clock)

    sim = SimConfig(**_check(data.get("sim", {}), _names(SimConfig) - {"t_end"}, "sim"))

    thresholds = {
        kind: Thresholds(**_check(t, _names(Thresholds), f"thresholds.{kind.value}"))
        for kind, t in _enum_keys(data.get("thresholds", {}), CellKind, "thresholds").items()
    }
    wire = WireModel(**_check(data.get("wire", {}), _names(WireModel), "wire"))
    geometry = {
        kind: CellGeometry(**_check(g, _names(CellGeometry), f"geometry.{kind.value}"))
        for kind, g in _enum_keys(data.get("geometry", {}), CellKind, "geometry").items()
    }
    bench = dict(_check(data.get("bench", {}), {"cells", "bounds", "retention",
                                                "retention_rel_tol", "leakage_idle",
                                                "workers"}, "bench"))
    for key in ("cells", "bounds"):
        if key in bench:
            bench[key] = tuple(bench[key])
    return SuiteConfig(devices=devices, sizing=sizing, scheme=scheme, sim=sim, wire=wire,
                       geometry=geometry, boosted=boosted, thresholds=thresholds, **bench)
