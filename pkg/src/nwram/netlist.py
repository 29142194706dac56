"""Circuit graph and cell/array builders.

A :class:`Circuit` is a flat list of N-/P-type transistors, grounded
capacitors and resistors over named nodes.  Builders attach device terminal
capacitances and lumped wire capacitance per net so that every undriven node
has well-defined dynamics.
"""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from .device import (
    CalibratedDevice,
    CapConfig,
    DeviceConfig,
    DeviceKind,
    device_caps,
)

VDD = "VDD"
VSS = "VSS"
NWRAM_CLOCKS = ("pre_0", "eva_0", "pre_1", "eva_1")


class CellKind(str, enum.Enum):
    NWRAM_10T = "NWRAM_10T"
    SRAM_6T_HP = "SRAM_6T_HP"
    SRAM_6T_LP = "SRAM_6T_LP"
    SRAM_8T_HP = "SRAM_8T_HP"
    SRAM_8T_LP = "SRAM_8T_LP"

    @property
    def is_sram(self) -> bool:
        return self is not CellKind.NWRAM_10T

    @property
    def is_8t(self) -> bool:
        return self in (CellKind.SRAM_8T_HP, CellKind.SRAM_8T_LP)

    @property
    def n_kind(self) -> DeviceKind:
        if self is CellKind.NWRAM_10T:
            return DeviceKind.XNWFET_2C
        if self.value.endswith("HP"):
            return DeviceKind.PTM_HP_N
        return DeviceKind.PTM_LP_N

    @property
    def p_kind(self) -> DeviceKind | None:
        if self is CellKind.NWRAM_10T:
            return None
        return DeviceKind.PTM_HP_P if self.value.endswith("HP") else DeviceKind.PTM_LP_P


class NetlistError(ValueError):
    pass


class WireRC(NamedTuple):
    ohms: float
    farads: float


@dataclass(frozen=True)
class SramSizing:
    pass_mult: float = 1.4
    pulldown_mult: float = 1.7
    pullup_mult: float = 1.0

    def __post_init__(self):
        if min(self.pass_mult, self.pulldown_mult, self.pullup_mult) <= 0:
            raise NetlistError("SRAM width multipliers must be positive")


@dataclass(frozen=True)
class Transistor:
    name: str
    kind: DeviceKind
    gate: str
    drain: str
    source: str
    width_mult: float = 1.0

    @property
    def terminals(self) -> tuple[str, str, str]:
        return (self.gate, self.drain, self.source)


@dataclass(frozen=True)
class Capacitor:
    name: str
    node: str
    farads: float


@dataclass(frozen=True)
class Resistor:
    name: str
    a: str
    b: str
    ohms: float


@dataclass(frozen=True)
class Circuit:
    name: str
    nodes: tuple[str, ...]
    rails: Mapping[str, float]
    transistors: tuple[Transistor, ...] = ()
    capacitors: tuple[Capacitor, ...] = ()
    resistors: tuple[Resistor, ...] = ()
    ports: tuple[tuple[str, str], ...] = ()
    devices: Mapping[DeviceKind, CalibratedDevice] = field(default_factory=dict)
    caps: CapConfig = field(default_factory=CapConfig)
    # Ports expected to carry a stimulus (clocks, word lines, bit lines).
    driven: frozenset[str] = frozenset()
    # Wire resistance per net, kept for reporting; not instantiated as elements.
    wire_r: Mapping[str, float] = field(default_factory=dict)

    @property
    def port_map(self) -> dict[str, str]:
        return dict(self.ports)

    def port(self, name: str) -> str:
        for p, node in self.ports:
            if p == name:
                return node
        raise KeyError(f"{self.name}: no port {name!r}")

    @property
    def vdd(self) -> float:
        return self.rails.get(VDD, 0.0)

    def node_capacitance(self) -> dict[str, float]:
        """Wire capacitance plus attached device terminal capacitance."""
        total = {n: 0.0 for n in self.nodes}
        for c in self.capacitors:
            total[c.node] = total.get(c.node, 0.0) + c.farads
        for t in self.transistors:
            dc = device_caps(self.devices[t.kind], t.width_mult, self.caps)
            total[t.gate] = total.get(t.gate, 0.0) + dc.c_gate
            total[t.drain] = total.get(t.drain, 0.0) + dc.c_drain
            total[t.source] = total.get(t.source, 0.0) + dc.c_source
        for r in self.rails:
            total.pop(r, None)
        return total

    def driven_nodes(self) -> set[str]:
        pm = self.port_map
        return {pm[p] for p in self.driven}


def validate(c: Circuit) -> list[str]:
    """Structural diagnostics; an empty list means the circuit is usable."""
    problems: list[str] = []
    known = set(c.nodes)
    for r in c.rails:
        if r not in known:
            problems.append(f"missing node: rail {r}")
    uses: Counter[str] = Counter()
    for t in c.transistors:
        if t.kind not in c.devices:
            problems.append(f"uncalibrated device kind {t.kind.value} in {t.name}")
        for term in t.terminals:
            if term not in known:
                problems.append(f"missing node: {term} ({t.name})")
            uses[term] += 1
    for cap in c.capacitors:
        if cap.node not in known:
            problems.append(f"missing node: {cap.node} ({cap.name})")
        if cap.farads < 0:
            problems.append(f"negative capacitance in {cap.name}")
        uses[cap.node] += 1
    for res in c.resistors:
        for term in (res.a, res.b):
            if term not in known:
                problems.append(f"missing node: {term} ({res.name})")
            uses[term] += 1
        if res.ohms <= 0:
            problems.append(f"non-positive resistance in {res.name}")
    seen: set[str] = set()
    for name, node in c.ports:
        if name in seen:
            problems.append(f"duplicate port: {name}")
        seen.add(name)
        if node not in known:
            problems.append(f"missing node: {node} (port {name})")
    for p in c.driven:
        if p not in seen:
            problems.append(f"driven port {p} not declared")
    if problems:
        return problems

    driven = c.driven_nodes()
    cap = c.node_capacitance()
    for n in c.nodes:
        if n in c.rails:
            continue
        if uses[n] == 0 and n not in driven:
            problems.append(f"dangling node: {n}")
        elif n not in driven and cap.get(n, 0.0) <= 0.0:
            problems.append(f"undefined dynamics: {n} has zero capacitance")
    return problems


class _Builder:
    def __init__(self, name: str, cfg: DeviceConfig, vdd: float):
        self.name = name
        self.cfg = cfg
        self.nodes: dict[str, None] = {VDD: None, VSS: None}
        self.rails = {VDD: vdd, VSS: 0.0}
        self.transistors: list[Transistor] = []
        self.capacitors: list[Capacitor] = []
        self.ports: list[tuple[str, str]] = []
        self.driven: set[str] = set()
        self.wire_c: dict[str, float] = defaultdict(float)
        self.wire_r: dict[str, float] = defaultdict(float)

    def node(self, n: str) -> str:
        self.nodes.setdefault(n, None)
        return n

    def fet(self, name: str, kind: DeviceKind, g: str, d: str, s: str, mult: float = 1.0):
        for n in (g, d, s):
            self.node(n)
        self.transistors.append(Transistor(name, kind, g, d, s, mult))

    def port(self, name: str, node: str, driven: bool = False):
        self.node(node)
        self.ports.append((name, node))
        if driven:
            self.driven.add(name)

    def wire(self, node: str, rc: WireRC | None):
        if rc is None:
            return
        if rc.ohms < 0 or rc.farads < 0:
            raise NetlistError(f"negative parasitic on {node}")
        self.wire_c[node] += rc.farads
        self.wire_r[node] += rc.ohms

    def build(self) -> Circuit:
        kinds = {t.kind for t in self.transistors}
        caps = tuple(
            Capacitor(f"Cw_{n}", n, c) for n, c in self.wire_c.items() if c > 0
        )
        return Circuit(
            name=self.name,
            nodes=tuple(self.nodes),
            rails=dict(self.rails),
            transistors=tuple(self.transistors),
            capacitors=caps,
            ports=tuple(self.ports),
            devices={k: self.cfg.calibrated(k) for k in sorted(kinds, key=lambda k: k.value)},
            caps=self.cfg.caps,
            driven=frozenset(self.driven),
            wire_r={n: r for n, r in self.wire_r.items() if r > 0},
        )


def _as_rc(value) -> WireRC:
    if isinstance(value, WireRC):
        return value
    if isinstance(value, (int, float)):
        return WireRC(0.0, float(value))
    ohms, farads = value
    return WireRC(float(ohms), float(farads))


def _check_parasitics(parasitics: Mapping | None, allowed: Iterable[str]) -> dict[str, WireRC]:
    out = {k: _as_rc(v) for k, v in (parasitics or {}).items()}
    unknown = set(out) - set(allowed)
    if unknown:
        raise NetlistError(f"parasitics for unknown nets: {sorted(unknown)}")
    for k, rc in out.items():
        if rc.ohms < 0 or rc.farads < 0:
            raise NetlistError(f"negative parasitic on {k}")
    return out


NWRAM_NETS = ("out", "nout", "bit_0", "read_0") + tuple(f"W_0_{c}" for c in NWRAM_CLOCKS)
SRAM_NETS = ("q", "qb", "bl", "blb", "wl", "rbl", "rwl")


def _nwram_cell(b: _Builder, row: int, col: int, tag: str, par: dict[str, WireRC]):
    """One 10T cell: two cross-coupled dynamic NANDs plus a 2-stack read path."""
    n = DeviceKind.XNWFET_2C
    out, nout = b.node(f"out{tag}"), b.node(f"nout{tag}")
    bit, read = f"bit_{col}", f"read_{row}"
    w = {c: f"W_{row}_{c}" for c in NWRAM_CLOCKS}
    for side, (node, other, pre, eva) in {
        "a": (out, nout, w["pre_0"], w["eva_0"]),
        "b": (nout, out, w["pre_1"], w["eva_1"]),
    }.items():
        x1, x2 = b.node(f"x{side}1{tag}"), b.node(f"x{side}2{tag}")
        b.fet(f"Mpre{side}{tag}", n, pre, VDD, node)
        b.fet(f"Mbit{side}{tag}", n, bit, node, x1)
        b.fet(f"Mx{side}{tag}", n, other, x1, x2)
        b.fet(f"Meva{side}{tag}", n, eva, x2, VSS)
    r1 = b.node(f"r1{tag}")
    b.fet(f"Mrd{tag}", n, nout, bit, r1)
    b.fet(f"Mrs{tag}", n, read, r1, VSS)

    b.wire(out, par.get("out"))
    b.wire(nout, par.get("nout"))
    b.wire(bit, par.get("bit_0"))
    b.wire(read, par.get("read_0"))
    for c in NWRAM_CLOCKS:
        b.wire(w[c], par.get(f"W_0_{c}"))


def _nwram_row_ports(b: _Builder, row: int):
    b.port(f"read_{row}", f"read_{row}", driven=True)
    for c in NWRAM_CLOCKS:
        b.port(f"W_{row}_{c}", f"W_{row}_{c}", driven=True)


def _sram_cell(b: _Builder, kind: CellKind, s: SramSizing, par: dict[str, WireRC]):
    nk, pk = kind.n_kind, kind.p_kind
    for node, other, bl in (("q", "qb", "bl"), ("qb", "q", "blb")):
        b.fet(f"Mpu_{node}", pk, other, node, VDD, s.pullup_mult)
        b.fet(f"Mpd_{node}", nk, other, node, VSS, s.pulldown_mult)
        b.fet(f"Mpg_{node}", nk, "wl", bl, node, s.pass_mult)
    ports = [("out", "q", False), ("nout", "qb", False), ("q", "q", False), ("qb", "qb", False),
             ("bl", "bl", True), ("blb", "blb", True), ("wl", "wl", True)]
    if kind.is_8t:
        b.fet("Mrwl", nk, "rwl", "rbl", "rn", s.pass_mult)
        b.fet("Mrdrv", nk, "qb", "rn", VSS, s.pulldown_mult)
        ports += [("rbl", "rbl", True), ("rwl", "rwl", True)]
    for name, node, driven in ports:
        b.port(name, node, driven)
    for net, rc in par.items():
        if net in b.nodes:
            b.wire(net, rc)


def build_cell(kind: CellKind, dev_config: DeviceConfig | None = None,
               sizing: SramSizing | None = None,
               parasitics: Mapping | None = None) -> Circuit:
    """Single memory cell with named ports.

    ``parasitics`` maps net names to a :class:`WireRC` (or bare farads).
    NWRAM nets: out, nout, bit_0, read_0, W_0_<clock>.  SRAM nets: q, qb,
    bl, blb, wl and, for 8T cells, rbl, rwl.
    """
    kind = CellKind(kind)
    cfg = dev_config or DeviceConfig()
    vdd = cfg.params[kind.n_kind].vdd_nominal
    b = _Builder(kind.value, cfg, vdd)
    if kind is CellKind.NWRAM_10T:
        par = _check_parasitics(parasitics, NWRAM_NETS)
        _nwram_cell(b, 0, 0, "", par)
        b.port("out", "out")
        b.port("nout", "nout")
        b.port("bit_0", "bit_0", driven=True)
        _nwram_row_ports(b, 0)
    else:
        par = _check_parasitics(parasitics, SRAM_NETS)
        _sram_cell(b, kind, sizing or SramSizing(), par)
    return b.build()


def build_nwram_array(rows: int, cols: int, dev_config: DeviceConfig | None = None,
                      parasitics: Mapping | None = None) -> Circuit:
    """rows x cols NWRAM array.

    Every row shares one clock set and one read line; every column shares one
    bit line, which accumulates each cell's per-cell bit-line wire segment.
    Storage ports are named ``out_<row>_<col>`` / ``nout_<row>_<col>``.
    """
    if rows < 1 or cols < 1:
        raise NetlistError(f"array dimensions must be >= 1, got {rows}x{cols}")
    cfg = dev_config or DeviceConfig()
    par = _check_parasitics(parasitics, NWRAM_NETS)
    b = _Builder(f"NWRAM_{rows}x{cols}", cfg, cfg.params[DeviceKind.XNWFET_2C].vdd_nominal)
    # Shared lines accumulate one wire segment per attached cell.
    for i in range(rows):
        for j in range(cols):
            _nwram_cell(b, i, j, f"_{i}_{j}", par)
    for i in range(rows):
        _nwram_row_ports(b, i)
    for j in range(cols):
        b.port(f"bit_{j}", f"bit_{j}", driven=True)
    for i in range(rows):
        for j in range(cols):
            b.port(f"out_{i}_{j}", f"out_{i}_{j}")
            b.port(f"nout_{i}_{j}", f"nout_{i}_{j}")
    if rows == 1 and cols == 1:
        b.port("out", "out_0_0")
        b.port("nout", "nout_0_0")
    return b.build()


def transistor_count(c: Circuit) -> int:
    return len(c.transistors)


def to_text(c: Circuit) -> str:
    """Human-readable netlist, one element per line.

    Line formats::

        .rail <node> <volts>
        M <name> <kind> <gate> <drain> <source> <width_mult>
        C <name> <node> <farads>
        R <name> <a> <b> <ohms>
        .port <name> <node> [driven]
    """
    lines = [f"* {c.name}"]
    lines += [f".rail {n} {v:g}" for n, v in c.rails.items()]
    lines += [
        f"M {t.name} {t.kind.value} {t.gate} {t.drain} {t.source} {t.width_mult:g}"
        for t in c.transistors
    ]
    lines += [f"C {x.name} {x.node} {x.farads:.6g}" for x in c.capacitors]
    lines += [f"R {r.name} {r.a} {r.b} {r.ohms:.6g}" for r in c.resistors]
    for name, node in c.ports:
        lines.append(f".port {name} {node}" + (" driven" if name in c.driven else ""))
    return "\n".join(lines) + "\n"
