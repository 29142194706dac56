"""Metric extraction, scenarios and the benchmark harness."""

from .metrics import (
    MeasurementError,
    PowerKind,
    Thresholds,
    crossings,
    measure_power,
    measure_read_time,
    measure_write_time,
)
from .retention import ProtocolError, RetentionResult, find_max_restore_interval, readback_ok
from .scenarios import CellSetup, run_ops
from .suite import Metrics, Report, ScenarioError, SuiteConfig, measure_cell, run_benchmark

__all__ = [
    "CellSetup", "MeasurementError", "Metrics", "PowerKind", "ProtocolError", "Report",
    "RetentionResult", "ScenarioError", "SuiteConfig", "Thresholds", "crossings",
    "find_max_restore_interval", "measure_cell", "measure_power", "measure_read_time",
    "measure_write_time", "readback_ok", "run_benchmark", "run_ops",
]
