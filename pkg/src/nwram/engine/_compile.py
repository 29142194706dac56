"""Flatten a Circuit plus stimuli into the arrays the kernels consume."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..netlist import Circuit
from ..stimulus import Waveform

METHOD_EXPLICIT = 0
METHOD_TRAPEZOIDAL = 1


@dataclass
class Problem:
    names: list[str]
    cap: np.ndarray          # (n,) farads, zero for rails
    is_rail: np.ndarray      # (n,) uint8
    v_rail: np.ndarray       # (n,) rail voltage (unused elsewhere)
    # transistors
    tg: np.ndarray
    td: np.ndarray
    ts: np.ndarray
    tpol: np.ndarray         # +1 N-type, -1 P-type
    tk: np.ndarray           # k * width_mult
    tvth: np.ndarray
    tnvt: np.ndarray
    # resistors
    ra: np.ndarray
    rb: np.ndarray
    rg: np.ndarray
    # waveforms: node, breakpoints [off[m], off[m+1]), hiz intervals likewise
    wf_node: np.ndarray
    wf_off: np.ndarray
    wf_t: np.ndarray
    wf_v: np.ndarray
    hz_off: np.ndarray
    hz_a: np.ndarray
    hz_b: np.ndarray
    events: np.ndarray       # sorted breakpoint/hiz times
    v0: np.ndarray
    src_nodes: np.ndarray    # nodes whose supplied charge is recorded
    src_names: list[str]


def _order_nodes(c: Circuit) -> list[str]:
    """Low-degree nodes first so LU fill stays inside each cell."""
    nbrs: dict[str, set[str]] = {n: set() for n in c.nodes}
    for t in c.transistors:
        for a in t.terminals:
            for b in t.terminals:
                if a != b:
                    nbrs[a].add(b)
    for r in c.resistors:
        nbrs[r.a].add(r.b)
        nbrs[r.b].add(r.a)
    pos = {n: i for i, n in enumerate(c.nodes)}
    return sorted(c.nodes, key=lambda n: (len(nbrs[n]), pos[n]))


def compile_problem(c: Circuit, stimuli: dict[str, Waveform], init: dict[str, float],
                    leakage: bool = True) -> Problem:
    names = _order_nodes(c)
    idx = {n: i for i, n in enumerate(names)}
    n = len(names)

    cap_map = c.node_capacitance()
    cap = np.array([cap_map.get(x, 0.0) for x in names], dtype=np.float64)
    is_rail = np.array([x in c.rails for x in names], dtype=np.uint8)
    v_rail = np.array([c.rails.get(x, 0.0) for x in names], dtype=np.float64)

    tg, td, ts, tpol, tk, tvth, tnvt = ([] for _ in range(7))
    for t in c.transistors:
        dev = c.devices[t.kind]
        tg.append(idx[t.gate])
        td.append(idx[t.drain])
        ts.append(idx[t.source])
        tpol.append(float(dev.polarity))
        tk.append(dev.k * t.width_mult)
        tvth.append(dev.params.vth)
        tnvt.append(dev.n_vt if leakage else 0.0)

    ports = c.port_map
    wf_node, wf_off, wf_t, wf_v = [], [0], [], []
    hz_off, hz_a, hz_b = [0], [], []
    events: set[float] = set()
    for port, w in stimuli.items():
        node = ports.get(port, port)
        if node not in idx:
            raise KeyError(f"stimulus for unknown port {port!r}")
        if node in c.rails:
            raise ValueError(f"cannot drive rail {node}")
        wf_node.append(idx[node])
        wf_t.extend(w.times)
        wf_v.extend(w.volts)
        wf_off.append(len(wf_t))
        events.update(w.times)
        for a, b in w.hiz:
            hz_a.append(a)
            hz_b.append(b)
            events.update((a, b))
        hz_off.append(len(hz_a))

    v0 = v_rail.copy()
    for name, v in init.items():
        node = ports.get(name, name)
        if node not in idx:
            raise KeyError(f"initial condition for unknown node {name!r}")
        if node not in c.rails:
            v0[idx[node]] = v

    src = [i for i in range(n) if is_rail[i]] + list(wf_node)
    src_names = []
    node_to_port = {}
    for port, w in stimuli.items():
        node_to_port.setdefault(ports.get(port, port), port)
    for i in src:
        src_names.append(names[i] if is_rail[i] else node_to_port[names[i]])

    f64 = lambda a: np.ascontiguousarray(a, dtype=np.float64)
    i32 = lambda a: np.ascontiguousarray(a, dtype=np.int32)
    return Problem(
        names=names, cap=cap, is_rail=is_rail, v_rail=v_rail,
        tg=i32(tg), td=i32(td), ts=i32(ts), tpol=f64(tpol), tk=f64(tk),
        tvth=f64(tvth), tnvt=f64(tnvt),
        ra=i32([idx[r.a] for r in c.resistors]), rb=i32([idx[r.b] for r in c.resistors]),
        rg=f64([1.0 / r.ohms for r in c.resistors]),
        wf_node=i32(wf_node), wf_off=i32(wf_off), wf_t=f64(wf_t), wf_v=f64(wf_v),
        hz_off=i32(hz_off), hz_a=f64(hz_a), hz_b=f64(hz_b),
        events=f64(sorted(events)), v0=f64(v0),
        src_nodes=i32(src), src_names=src_names,
    )
