"""Longest idle interval that a restore cycle still recovers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..netlist import CellKind
from ..stimulus import Idle, Read, Restore, Write
from .metrics import Thresholds
from .scenarios import CellSetup, read_value, run_ops


class ProtocolError(RuntimeError):
    """Write -> restore -> read fails even without an idle period."""


@dataclass
class RetentionResult:
    t_star: float                 # longest interval known to pass
    t_fail: float                 # shortest interval known to fail
    evaluations: list[tuple[float, bool]] = field(default_factory=list)


def readback_ok(setup: CellSetup, idle: float) -> bool:
    """Both stored values survive write -> idle -> restore -> read."""
    for bit in (0, 1):
        ops = [Write(bit), Restore()]
        if idle > 0:
            ops.append(Idle(idle))
        ops += [Restore(), Read()]
        if read_value(run_ops(setup, ops), setup) != bit:
            return False
    return True


def find_max_restore_interval(setup: CellSetup, th: Thresholds | None = None,
                              t_start: float = 1e-9, t_limit: float = 1e-3,
                              rel_tol: float = 0.05) -> RetentionResult:
    """Bisect the idle interval between restores down to ``rel_tol``.

    The bracket grows geometrically from ``t_start`` until a failure is
    seen; ``t_limit`` bounds the search for cells that never fail.
    """
    if setup.kind is not CellKind.NWRAM_10T:
        raise ValueError("restore intervals apply to the dynamic NWRAM cell only")
    if setup.devices.params[setup.kind.n_kind].ioff <= 0 or not setup.sim.leakage:
        raise ValueError("retention needs a leaking device model")
    if th is not None:
        setup = replace(setup, thresholds=th)
    evals: list[tuple[float, bool]] = []

    def ok(t: float) -> bool:
        res = readback_ok(setup, t)
        evals.append((t, res))
        return res

    if not ok(0.0):
        raise ProtocolError("write -> restore -> read fails with no idle time")
    lo, hi = 0.0, t_start
    while ok(hi):
        lo = hi
        hi *= 4
        if hi > t_limit:
            raise ProtocolError(f"no retention failure up to {t_limit:g} s")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi) if lo > 0 else hi / 4
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return RetentionResult(lo, hi, evals)
