"""Transient nodal simulation of switch-level memory circuits.

Undriven nodes integrate ``C dV/dt = sum(I)``; rails are ideal sources and
stimulated ports follow their waveforms except inside high-impedance
intervals, where they float like any other node.  The hot loop lives in a
compiled extension (``_ckernel``) with a numpy fallback of identical
semantics (``_pykernel``); set ``NWRAM_PURE_PYTHON=1`` to force the latter.
"""

from __future__ import annotations

import csv
import enum
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.integrate import trapezoid

from ..netlist import Circuit, validate
from ..stimulus import Waveform
from . import _pykernel
from ._compile import METHOD_EXPLICIT, METHOD_TRAPEZOIDAL, compile_problem
from ._pykernel import StepUnderflow

if os.environ.get("NWRAM_PURE_PYTHON"):
    _ckernel = None
else:
    try:
        from . import _ckernel
    except ImportError:  # extension not built
        _ckernel = None

KERNEL = "compiled" if _ckernel is not None else "python"


class SimulationError(RuntimeError):
    pass


class Method(str, enum.Enum):
    EXPLICIT_SUBSTEP = "EXPLICIT_SUBSTEP"
    TRAPEZOIDAL = "TRAPEZOIDAL"


@dataclass(frozen=True)
class SimConfig:
    t_end: float = 4e-9
    dt_max: float = 1e-12
    method: Method = Method.EXPLICIT_SUBSTEP
    sample_interval: float = 5e-12
    stability_factor: float = 0.2
    # False swaps the subthreshold tail for a hard cutoff (Ioff = 0)
    leakage: bool = True

    def __post_init__(self):
        if not 0 < self.dt_max <= self.sample_interval * (1 + 1e-12):
            raise ValueError("need 0 < dt_max <= sample_interval")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.stability_factor <= 0.5:
            raise ValueError("stability_factor must lie in (0, 0.5]")
        object.__setattr__(self, "method", Method(self.method))


@dataclass
class TransientResult:
    times: np.ndarray
    node_names: list[str]
    voltages: np.ndarray                  # (samples, nodes)
    ports: dict[str, str]
    supply_current: dict[str, np.ndarray]  # mean current over the preceding interval
    supply_voltage: dict[str, np.ndarray]
    flags: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self._col = {n: i for i, n in enumerate(self.node_names)}

    def v(self, name: str) -> np.ndarray:
        node = self.ports.get(name, name)
        try:
            return self.voltages[:, self._col[node]]
        except KeyError:
            raise KeyError(f"no node or port {name!r}") from None

    def at(self, name: str, t: float) -> float:
        return float(np.interp(t, self.times, self.v(name)))

    def final(self, name: str) -> float:
        return float(self.v(name)[-1])

    def to_csv(self, path: str | Path, names: Sequence[str] | None = None) -> Path:
        """Columns: time_s, then one voltage column per requested node/port."""
        names = list(names) if names is not None else [
            n for n in self.node_names if n not in ("VDD", "VSS")
        ]
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        cols = [self.v(n) for n in names]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s"] + [f"{n}_V" for n in names])
            for k, t in enumerate(self.times):
                w.writerow([f"{t:.6e}"] + [f"{c[k]:.6g}" for c in cols])
        return path


def _kernel():
    return _ckernel if _ckernel is not None else _pykernel


def run_transient(c: Circuit, stimuli: Mapping[str, Waveform],
                  init: Mapping[str, float] | None = None,
                  cfg: SimConfig | None = None, kernel=None) -> TransientResult:
    """Simulate ``c`` from ``t = 0`` to ``cfg.t_end``.

    ``init`` gives initial voltages by node or port name (default 0 V).
    Raises :class:`SimulationError` for structural problems and
    :class:`StepUnderflow` when the required step collapses below 1e-18 s.
    """
    cfg = cfg or SimConfig()
    problems = validate(c)
    if problems:
        raise SimulationError(f"{c.name}: invalid circuit: " + "; ".join(problems))
    missing = sorted(set(c.driven) - set(stimuli))
    if missing:
        raise SimulationError(f"{c.name}: no waveform for driven ports {missing}")
    prob = compile_problem(c, dict(stimuli), dict(init or {}), leakage=cfg.leakage)
    method = METHOD_EXPLICIT if cfg.method is Method.EXPLICIT_SUBSTEP else METHOD_TRAPEZOIDAL
    k = kernel or _kernel()
    times, V, Q, E, stats = k.run(prob, method, cfg.t_end, cfg.dt_max,
                                  cfg.sample_interval, cfg.stability_factor)
    if not np.all(np.isfinite(V)):
        raise SimulationError(f"{c.name}: non-finite node voltage")
    si = cfg.sample_interval
    currents, volts = {}, {}
    for j, (name, node) in enumerate(zip(prob.src_names, prob.src_nodes)):
        currents[name] = Q[:, j] / si
        volts[name] = V[:, node].copy()
    flags = []
    if stats.get("newton_cuts"):
        flags.append(f"newton_step_cuts={stats['newton_cuts']}")
    if stats.get("stability_limited"):
        flags.append(f"stability_limited_steps={stats['stability_limited']}")
    ports = dict(c.ports)
    return TransientResult(np.asarray(times), list(prob.names), V, ports, currents, volts,
                           flags, dict(stats))


def _window_index(r: TransientResult, t0: float, t1: float) -> np.ndarray:
    if t1 <= t0:
        raise ValueError(f"empty window [{t0:g}, {t1:g}]")
    eps = 1e-6 * (r.times[1] - r.times[0]) if len(r.times) > 1 else 0.0
    if t0 < r.times[0] - eps or t1 > r.times[-1] + eps:
        raise ValueError("window outside simulated span")
    sel = np.flatnonzero((r.times >= t0 - eps) & (r.times <= t1 + eps))
    if len(sel) < 2:
        raise ValueError(f"window [{t0:g}, {t1:g}] holds fewer than two samples")
    return sel


def supply_energy(r: TransientResult, source: str | Iterable[str],
                  window: tuple[float, float]) -> float:
    """Trapezoidal integral of V*I for one source (or the sum over several)."""
    names = [source] if isinstance(source, str) else list(source)
    sel = _window_index(r, *window)
    total = 0.0
    for name in names:
        if name not in r.supply_current:
            raise KeyError(f"unknown source {name!r}")
        p = r.supply_voltage[name][sel] * r.supply_current[name][sel]
        total += float(trapezoid(p, r.times[sel]))
    return total


__all__ = [
    "KERNEL", "Method", "SimConfig", "SimulationError", "StepUnderflow",
    "TransientResult", "run_transient", "supply_energy",
]
