import numpy as np
import pytest

from nwram.bench.metrics import (
    MeasurementError,
    PowerKind,
    Thresholds,
    crossings,
    measure_power,
    measure_read_time,
    measure_write_time,
)
from nwram.engine import TransientResult

TH = Thresholds(0.72, 0.08, 0.4)


def trace(t, **nodes):
    names = list(nodes)
    V = np.column_stack([np.asarray(nodes[n], float) for n in names])
    return TransientResult(np.asarray(t, float), names, V, {}, {}, {})


def test_write_time_from_ramps():
    t = np.linspace(0, 4e-9, 4001)
    out = np.clip((t - 1e-9) / 1e-9, 0, 1) * 0.8          # crosses 0.4 at 1.5 ns
    nout = 0.8 - np.clip((t - 1.5e-9) / 1e-9, 0, 1) * 0.8  # crosses 0.4 at 2.0 ns
    r = trace(t, out=out, nout=nout)
    assert measure_write_time(r, ("out", "nout"), TH, 1e-9) == pytest.approx(1.0e-9, rel=1e-6)


def test_write_time_ignores_holding_node_and_rejects_glitch():
    t = np.linspace(0, 2e-9, 2001)
    hold = np.full_like(t, 0.02)
    rise = np.clip(t / 1e-9, 0, 1) * 0.8
    r = trace(t, a=rise, b=hold)
    assert measure_write_time(r, ("a", "b"), TH, 0.0) == pytest.approx(0.5e-9, rel=1e-6)
    glitch = 0.6 * np.exp(-((t - 1e-9) / 1e-10) ** 2)
    with pytest.raises(MeasurementError):
        measure_write_time(trace(t, a=glitch, b=hold), ("a", "b"), TH, 0.0)
    with pytest.raises(MeasurementError):
        measure_write_time(trace(t, a=hold, b=hold), ("a", "b"), TH, 0.0)


def test_read_time_synthetic():
    t = np.linspace(0, 1e-9, 10001)
    rd = np.clip((t - 100e-12) / 50e-12, 0, 1) * 0.8          # 50% at 125 ps
    bl = 0.8 - np.clip((t - 125e-12) / 240e-12, 0, 1) * 0.8  # 0.4 at 245 ps
    r = trace(t, read=rd, bit=bl)
    assert measure_read_time(r, "read", "bit", TH) == pytest.approx(120e-12, rel=1e-4)
    with pytest.raises(MeasurementError):
        measure_read_time(trace(t, read=rd, bit=np.full_like(t, 0.8)), "read", "bit", TH)


def test_power_of_constant_current():
    t = np.linspace(0, 1e-9, 101)
    r = TransientResult(t, ["VDD"], np.full((101, 1), 0.8), {},
                        {"VDD": np.full(101, 1.56e-9)}, {"VDD": np.full(101, 0.8)})
    assert measure_power(r, "VDD", (0, 1e-9), PowerKind.LEAKAGE) == pytest.approx(1.248e-9)
    with pytest.raises(MeasurementError):
        measure_power(r, "VDD", (1e-9, 0))
    with pytest.raises(MeasurementError):
        measure_power(r, "VDD", (0, 2e-9))


def test_thresholds():
    with pytest.raises(ValueError):
        Thresholds(0.3, 0.1, 0.5)
    d = Thresholds.default(0.8, 0.27)
    assert d.v_high_ok == pytest.approx(0.48) and d.sense == pytest.approx(0.4)
    assert Thresholds.default(0.7).v_high_ok == pytest.approx(0.63)
    assert (d.logic(0.6), d.logic(0.05), d.logic(0.3)) == (1, 0, None)


def test_crossings_interpolate():
    t = np.array([0.0, 1.0, 2.0])
    v = np.array([0.0, 1.0, 0.0])
    assert crossings(t, v, 0.25) == [(0.25, 1), (1.75, -1)]
