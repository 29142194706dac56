"""Timing and power extraction from transient results.

All functions are pure in the :class:`TransientResult` they read.  Crossing
instants are linearly interpolated between samples.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..engine import TransientResult, supply_energy


class MeasurementError(RuntimeError):
    """A metric could not be extracted (node never settled, line never moved)."""


@dataclass(frozen=True)
class Thresholds:
    v_high_ok: float
    v_low_ok: float
    sense: float

    def __post_init__(self):
        if not self.v_low_ok < self.sense < self.v_high_ok:
            raise ValueError(
                f"need v_low_ok < sense < v_high_ok, got {self.v_low_ok:g}, "
                f"{self.sense:g}, {self.v_high_ok:g}")

    @classmethod
    def default(cls, vdd: float, vth: float | None = None, boosted: bool = False) -> "Thresholds":
        """``vth`` given means the storage nodes are precharged through an N device."""
        if vth is None or boosted:
            hi = 0.9 * vdd
        else:
            hi = vdd - vth - 0.05
        return cls(v_high_ok=hi, v_low_ok=0.1 * vdd, sense=0.5 * vdd)

    def logic(self, v: float) -> int | None:
        """1 / 0 when beyond the ok levels, None in the forbidden band."""
        if v >= self.v_high_ok:
            return 1
        if v <= self.v_low_ok:
            return 0
        return None


def crossings(t: np.ndarray, v: np.ndarray, level: float) -> list[tuple[float, int]]:
    """(time, direction) of every crossing of ``level``; +1 rising, -1 falling."""
    above = v >= level
    idx = np.flatnonzero(above[1:] != above[:-1])
    out = []
    for k in idx:
        v0, v1 = v[k], v[k + 1]
        frac = (level - v0) / (v1 - v0) if v1 != v0 else 0.0
        out.append((float(t[k] + frac * (t[k + 1] - t[k])), 1 if v1 > v0 else -1))
    return out


def _window(r: TransientResult, t0: float, t1: float | None):
    t1 = r.times[-1] if t1 is None else t1
    if t1 <= t0:
        raise MeasurementError(f"empty window [{t0:g}, {t1:g}]")
    sel = (r.times >= t0 - 1e-18) & (r.times <= t1 + 1e-18)
    if sel.sum() < 2:
        raise MeasurementError(f"window [{t0:g}, {t1:g}] holds fewer than two samples")
    return sel


def measure_write_time(r: TransientResult, nodes: Sequence[str], th: Thresholds,
                       phase_start: float, t_end: float | None = None) -> float:
    """Delay from ``phase_start`` until every storage node has settled.

    A node that ends on the other side of ``sense`` from where it started
    settles at its last crossing.  A node that crosses but ends where it
    started never completed its transition, which is a failure; a node
    that never crosses holds its value and does not constrain the delay.
    At least one node must transition.
    """
    sel = _window(r, phase_start, t_end)
    t = r.times[sel]
    settle = []
    for name in nodes:
        v = r.v(name)[sel]
        cx = crossings(t, v, th.sense)
        start_hi, end_hi = v[0] >= th.sense, v[-1] >= th.sense
        if start_hi == end_hi:
            if cx:
                raise MeasurementError(f"{name} crossed sense and returned (non-settling)")
            continue
        settle.append(cx[-1][0])
    if not settle:
        raise MeasurementError(f"no storage node among {list(nodes)} changed state")
    return max(settle) - phase_start


def measure_read_time(r: TransientResult, read_port: str, bit_port: str, th: Thresholds,
                      t0: float = 0.0, t1: float | None = None) -> float:
    """Delay from the first rising 50% crossing of ``read_port`` to the first
    downward ``sense`` crossing of ``bit_port`` after it."""
    sel = _window(r, t0, t1)
    t = r.times[sel]
    rd = r.v(read_port)[sel]
    mid = 0.5 * (rd.min() + rd.max())
    if rd.max() - rd.min() <= 0:
        raise MeasurementError(f"{read_port} never switches in the window")
    rise = [x for x, d in crossings(t, rd, mid) if d > 0]
    if not rise:
        raise MeasurementError(f"{read_port} never rises through 50%")
    t_read = rise[0]
    bl = r.v(bit_port)[sel]
    fall = [x for x, d in crossings(t, bl, th.sense) if d < 0 and x >= t_read]
    if not fall:
        raise MeasurementError(f"{bit_port} never falls through sense after the read edge")
    return fall[0] - t_read


class PowerKind(str, enum.Enum):
    ACTIVE_READ = "ACTIVE_READ"
    LEAKAGE = "LEAKAGE"


def measure_power(r: TransientResult, sources: str | Iterable[str],
                  window: tuple[float, float], kind: PowerKind = PowerKind.LEAKAGE) -> float:
    """Average power drawn from ``sources`` over ``window``."""
    kind = PowerKind(kind)
    t0, t1 = window
    if t1 <= t0:
        raise MeasurementError(f"empty window [{t0:g}, {t1:g}]")
    try:
        e = supply_energy(r, sources, window)
    except ValueError as exc:
        raise MeasurementError(str(exc)) from None
    return e / (t1 - t0)
