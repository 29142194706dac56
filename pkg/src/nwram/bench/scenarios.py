"""Per-cell protocol scenarios feeding the metrics.

Every scenario writes the cell through its own protocol (no hand-set
initial storage voltages), so stacked internal nodes start from a
physically reachable state.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from ..device import DeviceConfig, DeviceKind
from ..engine import SimConfig, TransientResult, run_transient
from ..netlist import Circuit, CellKind, SramSizing, build_cell
from ..stimulus import (
    ClockScheme,
    Idle,
    Op,
    OperationSequence,
    OpWindow,
    Read,
    Restore,
    Write,
    lower,
    schedule,
)
from .metrics import (
    MeasurementError,
    PowerKind,
    Thresholds,
    measure_power,
    measure_read_time,
    measure_write_time,
)

STORAGE = ("out", "nout")


@dataclass(frozen=True)
class CellSetup:
    kind: CellKind
    devices: DeviceConfig = field(default_factory=DeviceConfig)
    sizing: SramSizing = field(default_factory=SramSizing)
    parasitics: Mapping = field(default_factory=dict)
    scheme: ClockScheme = field(default_factory=ClockScheme)
    sim: SimConfig = field(default_factory=SimConfig)
    boosted: bool = False
    thresholds: Thresholds | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", CellKind(self.kind))

    @property
    def vdd(self) -> float:
        return self.devices.params[self.kind.n_kind].vdd_nominal

    @property
    def vth(self) -> float:
        return self.devices.params[self.kind.n_kind].vth

    def cell_scheme(self) -> ClockScheme:
        """Clock/word-line swing follows the cell's own supply."""
        hi = self.vdd + (self.vth if self.boosted else 0.0)
        return replace(self.scheme, v_high=hi)

    def th(self) -> Thresholds:
        if self.thresholds is not None:
            return self.thresholds
        dynamic = self.kind is CellKind.NWRAM_10T
        return Thresholds.default(self.vdd, self.vth if dynamic else None, self.boosted)

    def circuit(self) -> Circuit:
        return build_cell(self.kind, self.devices, self.sizing, self.parasitics)


@dataclass
class Run:
    circuit: Circuit
    result: TransientResult
    windows: list[OpWindow]


def run_ops(setup: CellSetup, ops: Sequence[Op], circuit: Circuit | None = None) -> Run:
    c = circuit or setup.circuit()
    scheme = setup.cell_scheme()
    seq = OperationSequence(tuple(ops))
    waves = lower(seq, scheme, sorted(c.driven), v_data=setup.vdd)
    windows = schedule(seq, scheme)
    cfg = replace(setup.sim, t_end=windows[-1].end)
    return Run(c, run_transient(c, waves, {}, cfg), windows)


def _final_phase(w: OpWindow, kind: CellKind) -> float:
    if kind is CellKind.NWRAM_10T:
        phase = "eva_1" if w.op.bit == 1 else "eva_0"
        return w.pulses[phase][0]
    return w.pulses["wl"][0]


def write_time(setup: CellSetup, bit: int) -> float:
    """Flip the cell from ``1 - bit`` (settled by a restore cycle) to ``bit``."""
    run = run_ops(setup, [Write(1 - bit), Restore(), Write(bit)])
    w = run.windows[-1]
    return measure_write_time(run.result, STORAGE, setup.th(), _final_phase(w, setup.kind), w.end)


def read_lines(kind: CellKind) -> tuple[str, str, tuple[str, ...]]:
    """(read control, line that discharges on read-0, bitline sources)."""
    if kind is CellKind.NWRAM_10T:
        return "read_0", "bit_0", ("bit_0",)
    if kind.is_8t:
        return "rwl", "rbl", ("rbl",)
    return "wl", "bl", ("bl", "blb")


def read_run(setup: CellSetup, bit: int) -> Run:
    return run_ops(setup, [Write(bit), Restore(), Read()])


def read_time(setup: CellSetup) -> float:
    """Read of a stored 0, the case that discharges the sensed line."""
    run = read_run(setup, 0)
    w = run.windows[-1]
    ctrl, line, _ = read_lines(setup.kind)
    # sense only while the line floats; the re-drive and rest ramps are not reads
    return measure_read_time(run.result, ctrl, line, setup.th(), w.start, w.slot_start(3))


def read_window(w: OpWindow) -> tuple[float, float]:
    """Floating-discharge slots plus the re-drive edge that pays for them.

    Stops half a slot after the re-drive so the end-of-op return to the
    rest level (low for NWRAM bit lines) is not credited against the read.
    """
    return w.slot_start(1), w.slot_start(3) + 0.5 * w.slot


def active_read_power(setup: CellSetup) -> float:
    run = read_run(setup, 0)
    _, _, sources = read_lines(setup.kind)
    return measure_power(run.result, sources, read_window(run.windows[-1]), PowerKind.ACTIVE_READ)


def read_value(run: Run, setup: CellSetup) -> int:
    """Bit sensed at the end of the floating read interval."""
    w = run.windows[-1]
    _, line, _ = read_lines(setup.kind)
    v = run.result.at(line, w.slot_start(3) - setup.sim.sample_interval)
    # the line discharges for a stored 0 (NWRAM gates nout, SRAM senses bl/rbl)
    return 1 if v >= setup.th().sense else 0


def leakage_power(setup: CellSetup, idle: float | None = None) -> tuple[float, dict[int, float]]:
    """Worst case over both stored values of total supply power while idle."""
    idle = idle or setup.scheme.period
    per_bit = {}
    for bit in (0, 1):
        run = run_ops(setup, [Write(bit), Restore(), Idle(idle)])
        w = run.windows[-1]
        sources = list(run.result.supply_current)
        per_bit[bit] = measure_power(run.result, sources, (w.start, w.end), PowerKind.LEAKAGE)
    return max(per_bit.values()), per_bit


def storage_state(r: TransientResult, t: float, th: Thresholds,
                  out: str = "out", nout: str = "nout") -> int | None:
    """Stored bit if both nodes sit beyond their ok levels, else None."""
    a, b = th.logic(r.at(out, t)), th.logic(r.at(nout, t))
    if a is None or b is None or a == b:
        return None
    return a


def storage_bit(r: TransientResult, t: float, out: str = "out", nout: str = "nout") -> int:
    """Stored bit by comparing the complementary nodes."""
    return 1 if r.at(out, t) > r.at(nout, t) else 0


__all__ = [
    "CellSetup", "MeasurementError", "Run", "STORAGE", "active_read_power",
    "leakage_power", "read_lines", "read_run", "read_time", "read_value", "read_window",
    "run_ops", "storage_bit", "storage_state", "write_time",
]
