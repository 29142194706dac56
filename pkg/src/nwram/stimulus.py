"""Piecewise-linear stimulus for the memory protocols.

Every operation except ``Idle`` lasts one clock period, split into four
equal slots.  A clock pulse is centred in its slot, so data-line edges at
slot boundaries fall inside the dead time between pulses.  Each operation
starts and ends with all lines at their rest level, which makes lowering a
sequence identical to concatenating the lowered operations.
"""

from __future__ import annotations

import bisect
import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

NWRAM_PHASES = ("pre_0", "eva_0", "pre_1", "eva_1")
WRITE1_ORDER = ("pre_0", "eva_0", "pre_1", "eva_1")
WRITE0_ORDER = ("pre_1", "eva_1", "pre_0", "eva_0")
RESTORE_ORDER = WRITE1_ORDER


class StimulusError(ValueError):
    pass


class OverlapError(StimulusError):
    """Clock timing would let two phases assert at once."""


@dataclass(frozen=True)
class Waveform:
    """PWL voltage; linear between breakpoints, held outside them.

    ``hiz`` lists half-open ``[start, end)`` intervals during which the
    driver is disconnected and the net floats.
    """

    breakpoints: tuple[tuple[float, float], ...]
    hiz: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.breakpoints:
            raise StimulusError("waveform needs at least one breakpoint")
        times = [t for t, _ in self.breakpoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise StimulusError("breakpoint times must be strictly increasing")

    @property
    def times(self) -> list[float]:
        return [t for t, _ in self.breakpoints]

    @property
    def volts(self) -> list[float]:
        return [v for _, v in self.breakpoints]

    def is_driven(self, t: float) -> bool:
        return not any(a <= t < b for a, b in self.hiz)

    def shifted(self, dt: float) -> "Waveform":
        return Waveform(
            tuple((t + dt, v) for t, v in self.breakpoints),
            tuple((a + dt, b + dt) for a, b in self.hiz),
        )


def sample(w: Waveform, t: float) -> float:
    """Voltage of ``w`` at time ``t`` (ignores high-impedance intervals)."""
    times = w.times
    if t <= times[0]:
        return w.breakpoints[0][1]
    if t >= times[-1]:
        return w.breakpoints[-1][1]
    k = bisect.bisect_right(times, t)
    (t0, v0), (t1, v1) = w.breakpoints[k - 1], w.breakpoints[k]
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0)


@dataclass(frozen=True)
class ClockScheme:
    """Four non-overlapping phases per period, one per quarter-period slot."""

    period: float = 4e-9
    phase_width: float = 0.8e-9
    gap: float = 0.2e-9
    rise_fall: float = 50e-12
    v_high: float = 0.8
    v_low: float = 0.0

    def __post_init__(self):
        if self.gap <= 0:
            raise OverlapError(f"gap must be positive, got {self.gap:g}")
        if 4 * self.phase_width + 4 * self.gap > self.period * (1 + 1e-12):
            raise OverlapError("4*phase_width + 4*gap exceeds the period")
        if not 0 < self.rise_fall < self.phase_width:
            raise StimulusError("rise_fall must lie in (0, phase_width)")
        if 2 * self.rise_fall > self.phase_width:
            raise StimulusError("rise and fall edges do not fit inside one phase")
        # data lines switch at slot boundaries, inside the inter-phase gap
        if self.rise_fall > 0.5 * self.gap:
            raise OverlapError("need rise_fall <= gap/2")
        if self.v_high <= self.v_low:
            raise StimulusError("v_high must exceed v_low")

    @property
    def slot(self) -> float:
        return self.period / 4

    def pulse_bounds(self, slot_start: float) -> tuple[float, float]:
        t0 = slot_start + 0.5 * (self.slot - self.phase_width)
        return t0, t0 + self.phase_width


def make_clock_scheme(period: float = 4e-9, phase_width: float = 0.8e-9,
                      gap: float = 0.2e-9, rise_fall: float = 50e-12,
                      v_high: float = 0.8, v_low: float = 0.0) -> ClockScheme:
    return ClockScheme(period, phase_width, gap, rise_fall, v_high, v_low)


@dataclass(frozen=True)
class Write:
    bit: int
    row: int = 0
    cols: tuple[int, ...] | None = None   # None: every column

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise StimulusError(f"bit must be 0 or 1, got {self.bit}")


@dataclass(frozen=True)
class Read:
    row: int = 0


@dataclass(frozen=True)
class Restore:
    row: int | None = None   # None: every row


@dataclass(frozen=True)
class Idle:
    duration: float

    def __post_init__(self):
        if self.duration <= 0:
            raise StimulusError("idle duration must be positive")


Op = Union[Write, Read, Restore, Idle]


@dataclass(frozen=True)
class OperationSequence:
    ops: tuple[Op, ...]

    def __post_init__(self):
        if not self.ops:
            raise StimulusError("operation sequence is empty")

    @classmethod
    def of(cls, *ops: Op) -> "OperationSequence":
        return cls(tuple(ops))

    def __add__(self, other: "OperationSequence") -> "OperationSequence":
        return OperationSequence(self.ops + other.ops)


def op_duration(op: Op, scheme: ClockScheme) -> float:
    return op.duration if isinstance(op, Idle) else scheme.period


@dataclass(frozen=True)
class OpWindow:
    op: Op
    start: float
    end: float
    slot: float
    # phase name -> (pulse start, pulse end) for clocked ops
    pulses: dict[str, tuple[float, float]] = field(default_factory=dict)

    def slot_start(self, k: int) -> float:
        return self.start + k * self.slot


def schedule(seq: OperationSequence | Sequence[Op], scheme: ClockScheme) -> list[OpWindow]:
    """Absolute timing of every operation and of the pulses inside it."""
    ops = seq.ops if isinstance(seq, OperationSequence) else tuple(seq)
    out, t = [], 0.0
    for op in ops:
        dur = op_duration(op, scheme)
        pulses = {}
        if isinstance(op, Write):
            order = WRITE1_ORDER if op.bit == 1 else WRITE0_ORDER
            pulses = {ph: scheme.pulse_bounds(t + k * scheme.slot) for k, ph in enumerate(order)}
            pulses["wl"] = scheme.pulse_bounds(t + scheme.slot)
        elif isinstance(op, Restore):
            pulses = {ph: scheme.pulse_bounds(t + k * scheme.slot)
                      for k, ph in enumerate(RESTORE_ORDER)}
        elif isinstance(op, Read):
            pulses = {"read": scheme.pulse_bounds(t + scheme.slot)}
        out.append(OpWindow(op, t, t + dur, scheme.slot, pulses))
        t += dur
    return out


class _Track:
    """Builds one port's waveform from level changes and releases."""

    def __init__(self, rest: float, rf: float):
        self.rest = rest
        self.rf = rf
        self.level = rest
        self.points: list[tuple[float, float]] = [(0.0, rest)]
        self.hiz: list[tuple[float, float]] = []
        self._released_at: float | None = None

    def _add(self, t: float, v: float):
        last_t, last_v = self.points[-1]
        if t < last_t - 1e-21:
            raise StimulusError("level change scheduled in the past")
        if abs(t - last_t) <= 1e-21:
            if last_v != v:
                raise StimulusError("conflicting breakpoints")
            return
        self.points.append((t, v))

    def set(self, t: float, v: float):
        if v == self.level:
            return
        self._add(t, self.level)
        self._add(t + self.rf, v)
        self.level = v

    def pulse(self, t0: float, t1: float, v: float):
        base = self.level
        self.set(t0, v)
        self._add(t1 - self.rf, v)
        self._add(t1, base)
        self.level = base

    def release(self, t: float):
        if self._released_at is None:
            self._released_at = t

    def drive(self, t: float):
        if self._released_at is not None:
            self.hiz.append((self._released_at, t))
            self._released_at = None

    def finish(self, t_end: float) -> Waveform:
        self.drive(t_end)
        pts = self.points
        if pts[-1][0] < t_end:
            pts = pts + [(t_end, self.level)]
        return Waveform(tuple(pts), tuple(self.hiz))


_ROW_CLOCK = re.compile(r"^W_(\d+)_(pre|eva)_([01])$")
_INDEXED = re.compile(r"^(bit|read)_(\d+)$")
SRAM_LINES = ("wl", "bl", "blb", "rwl", "rbl")


def _classify(ports: Iterable[str]):
    rows, cols, sram = set(), set(), set()
    for p in ports:
        m = _ROW_CLOCK.match(p)
        if m:
            rows.add(int(m.group(1)))
            continue
        m = _INDEXED.match(p)
        if m:
            (cols if m.group(1) == "bit" else rows).add(int(m.group(2)))
            continue
        if p in SRAM_LINES:
            sram.add(p)
            continue
        raise StimulusError(f"unknown port {p!r}")
    if sram and (rows or cols):
        raise StimulusError("ports mix NWRAM and SRAM nets")
    return sorted(rows), sorted(cols), sram


def lower(seq: OperationSequence | Sequence[Op], scheme: ClockScheme,
          ports: Iterable[str], v_data: float | None = None) -> dict[str, Waveform]:
    """Waveform for every driven port of an NWRAM array/cell or SRAM cell.

    ``v_data`` is the driven level of data/bit lines; it defaults to the
    clock high level and differs only under boosted clocks.
    """
    ports = list(ports)
    ops = seq.ops if isinstance(seq, OperationSequence) else tuple(seq)
    if not ops:
        raise StimulusError("operation sequence is empty")
    rows, cols, sram = _classify(ports)
    windows = schedule(ops, scheme)
    t_end = windows[-1].end
    if sram:
        tracks = _lower_sram(windows, scheme, sram, v_data)
    else:
        tracks = _lower_nwram(windows, scheme, rows, cols, v_data)
    return {p: tracks[p].finish(t_end) for p in ports}


def _lower_nwram(windows, s: ClockScheme, rows, cols, v_data):
    vd = s.v_high if v_data is None else v_data
    lo, rf = s.v_low, s.rise_fall
    tracks = {f"W_{r}_{ph}": _Track(lo, rf) for r in rows for ph in NWRAM_PHASES}
    tracks.update({f"read_{r}": _Track(lo, rf) for r in rows})
    tracks.update({f"bit_{c}": _Track(lo, rf) for c in cols})
    bits = [tracks[f"bit_{c}"] for c in cols]

    for w in windows:
        op = w.op
        if isinstance(op, Idle):
            continue
        row = getattr(op, "row", None)
        if row is not None and row not in rows:
            raise StimulusError(f"row {row} not in ports")
        end_ramp = w.end - rf
        if isinstance(op, Write):
            sel = set(cols if op.cols is None else op.cols)
            if not sel <= set(cols):
                raise StimulusError(f"columns {sorted(sel - set(cols))} not in ports")
            for ph, (a, b) in w.pulses.items():
                if ph != "wl":
                    tracks[f"W_{op.row}_{ph}"].pulse(a, b, s.v_high)
            for c, tr in zip(cols, bits):
                if c in sel:
                    tr.set(w.slot_start(2), vd)
                else:
                    tr.set(w.start, vd)
        elif isinstance(op, Restore):
            targets = rows if op.row is None else [op.row]
            for r in targets:
                for ph, (a, b) in w.pulses.items():
                    tracks[f"W_{r}_{ph}"].pulse(a, b, s.v_high)
            for tr in bits:
                tr.set(w.start, vd)
        elif isinstance(op, Read):
            a, b = w.pulses["read"]
            tracks[f"read_{op.row}"].pulse(a, b, s.v_high)
            for tr in bits:
                tr.set(w.start, vd)
                tr.release(w.slot_start(1))
                tr.drive(w.slot_start(3))
        for tr in bits:
            tr.set(end_ramp, lo)
    return tracks


def _lower_sram(windows, s: ClockScheme, lines, v_data):
    vd = s.v_high if v_data is None else v_data
    lo, rf = s.v_low, s.rise_fall
    rest = {"wl": lo, "rwl": lo, "bl": vd, "blb": vd, "rbl": vd}
    tracks = {p: _Track(rest[p], rf) for p in lines}
    has_8t = "rwl" in lines
    for w in windows:
        op = w.op
        if isinstance(op, (Idle, Restore)):
            continue
        if getattr(op, "row", 0) not in (0, None):
            raise StimulusError("SRAM cells have a single row")
        if isinstance(op, Write):
            tracks["bl"].set(w.start, vd if op.bit else lo)
            tracks["blb"].set(w.start, lo if op.bit else vd)
            a, b = w.pulses["wl"]
            tracks["wl"].pulse(a, b, s.v_high)
            tracks["bl"].set(w.slot_start(2), vd)
            tracks["blb"].set(w.slot_start(2), vd)
        elif isinstance(op, Read):
            a, b = w.pulses["read"]
            if has_8t:
                tracks["rwl"].pulse(a, b, s.v_high)
                lines_read = [tracks["rbl"]]
            else:
                tracks["wl"].pulse(a, b, s.v_high)
                lines_read = [tracks["bl"], tracks["blb"]]
            for tr in lines_read:
                tr.release(w.slot_start(1))
                tr.drive(w.slot_start(3))
    return tracks


def clock_overlap_violations(waves: dict[str, Waveform], scheme: ClockScheme,
                             step: float = 1e-12) -> list[float]:
    """Times at which two phases of one NWRAM row exceed 10% of the swing."""
    thr = scheme.v_low + 0.1 * (scheme.v_high - scheme.v_low)
    by_row: dict[str, list[Waveform]] = {}
    for p, w in waves.items():
        m = _ROW_CLOCK.match(p)
        if m:
            by_row.setdefault(m.group(1), []).append(w)
    t_end = max(w.times[-1] for w in waves.values())
    bad = []
    n = int(t_end / step) + 1
    for k in range(n):
        t = k * step
        for ws in by_row.values():
            if sum(sample(w, t) > thr for w in ws) > 1:
                bad.append(t)
                break
    return bad


def write_waveforms_csv(waves: dict[str, Waveform], out_dir: str | Path) -> list[Path]:
    """One ``<port>.csv`` (time_s, volts) per port; ``<port>.hiz.csv`` when
    the port has floating intervals (start_s, end_s)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for port, w in waves.items():
        path = out_dir / f"{port}.csv"
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["time_s", "volts"])
            wr.writerows((f"{t:.6e}", f"{v:.6g}") for t, v in w.breakpoints)
        written.append(path)
        if w.hiz:
            hpath = out_dir / f"{port}.hiz.csv"
            with hpath.open("w", newline="") as fh:
                wr = csv.writer(fh)
                wr.writerow(["start_s", "end_s"])
                wr.writerows((f"{a:.6e}", f"{b:.6e}") for a, b in w.hiz)
            written.append(hpath)
    return written
