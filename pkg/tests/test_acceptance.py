"""Acceptance criteria 1-6, one PASS/FAIL line each.

Runs under pytest (lines are printed even with capture on) or directly:
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import replace

import numpy as np
import pytest

from nwram.bench.retention import find_max_restore_interval, readback_ok
from nwram.bench.scenarios import CellSetup, run_ops, storage_bit
from nwram.bench.suite import SuiteConfig, run_benchmark
from nwram.device import PRESETS, DeviceKind, calibrate, drain_current
from nwram.engine import SimConfig, run_transient
from nwram.layout import (
    AREA_16NM_UM2,
    NM,
    RULE_FACTORS,
    RULES_16NM_NM,
    UM2,
    cell_area_bounds,
    cell_parasitics,
    reference_rules,
    scale_area,
    scale_rules,
    scaling_scenarios,
)
from nwram.netlist import Capacitor, CellKind, Circuit, Resistor, build_nwram_array
from nwram.stimulus import WRITE0_ORDER, Idle, Read, Restore, Write, schedule

NW = CellKind.NWRAM_10T


def _line(n: int, ok: bool, detail: str) -> str:
    return f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}"


# 1 -------------------------------------------------------------------------

def criterion_1():
    worst = 0.0
    for kind, p in PRESETS.items():
        dev = calibrate(p)
        s = -1 if kind.is_p else 1
        ion = s * drain_current(dev, s * p.vdd_nominal, s * p.vdd_nominal, 0.0)
        ioff = s * drain_current(dev, 0.0, s * p.vdd_nominal, 0.0)
        worst = max(worst, abs(ion / p.ion - 1), abs(ioff / p.ioff - 1))
    return worst < 1e-3, f"worst Ion/Ioff error over 5 presets {worst:.2e} (< 1e-3)"


# 2 -------------------------------------------------------------------------

def criterion_2():
    rails = {"VDD": 0.8, "VSS": 0.0}
    rc = Circuit("rc", ("VDD", "VSS", "a"), rails, capacitors=(Capacitor("C", "a", 1e-15),),
                 resistors=(Resistor("R", "a", "VSS", 1e5),))
    tau = 1e-10
    r = run_transient(rc, {}, {"a": 0.8}, SimConfig(t_end=3 * tau))
    e_rc = abs(r.at("a", tau) / (0.8 * math.exp(-1)) - 1)

    sh = Circuit("share", ("VDD", "VSS", "a", "b"), rails,
                 capacitors=(Capacitor("Ca", "a", 1e-15), Capacitor("Cb", "b", 1e-15)),
                 resistors=(Resistor("R", "a", "b", 1e4),))
    r = run_transient(sh, {}, {"a": 0.8}, SimConfig(t_end=0.5e-9))
    e_sh = abs(r.final("b") / 0.4 - 1)

    par = cell_parasitics(NW)
    s = CellSetup(NW, parasitics=par, sim=SimConfig(leakage=False))
    run = run_ops(s, [Write(1), Restore(), Idle(100e-9)])
    w = run.windows[-1]
    drift = max(abs(run.result.at(n, w.end) - run.result.at(n, w.start + 0.1e-9))
                for n in ("out", "nout"))

    full = [Write(1), Restore(), Read(), Write(0), Restore(), Read()]
    base = CellSetup(NW, parasitics=par)
    a = run_ops(base, full).result
    b = run_ops(replace(base, sim=replace(base.sim, dt_max=base.sim.dt_max / 2)), full).result
    halving = float(np.max(np.abs(a.voltages - b.voltages)))

    ok = e_rc < 0.01 and e_sh < 0.005 and drift < 10e-6 and halving < 1e-3
    return ok, (f"RC err {e_rc:.2e}, sharing err {e_sh:.2e}, drift {drift * 1e6:.3f} uV, "
                f"dt-halving {halving * 1e3:.3f} mV")


# 3 -------------------------------------------------------------------------

ROWS = COLS = 4


def _array_sequence():
    """(op, expected bits of the read row or None)."""
    seq, state = [], np.full((ROWS, COLS), -1)
    for bit in (1, 0):
        for r in range(ROWS):
            seq.append(Write(bit, r))
            state[r, :] = bit
            seq.append(Read(r))
    # column-selective writes leave half-selected cells in the row alone
    for r in range(ROWS):
        seq.append(Write(1, r, (r,)))
        state[r, r] = 1
    for r in range(ROWS):
        seq.append(Read(r))
    return seq


def criterion_3():
    setup = CellSetup(NW, parasitics=cell_parasitics(NW))
    th = setup.th()
    circ = build_nwram_array(ROWS, COLS, setup.devices, setup.parasitics)
    ops = _array_sequence()
    run = run_ops(setup, ops, circ)
    r = run.result
    expect = np.full((ROWS, COLS), -1)
    read_errors, disturb, weak, checked = 0, 0, [], 0
    for w in run.windows:
        op = w.op
        if isinstance(op, Write):
            cols = range(COLS) if op.cols is None else op.cols
            for i in range(ROWS):
                for j in range(COLS):
                    if (i == op.row and j in cols) or expect[i, j] < 0:
                        continue
                    o, n = f"out_{i}_{j}", f"nout_{i}_{j}"
                    if storage_bit(r, w.end, o, n) != expect[i, j]:
                        disturb += 1
            for j in cols:
                expect[op.row, j] = op.bit
        elif isinstance(op, Read):
            t_s = w.slot_start(3) - setup.sim.sample_interval
            for j in range(COLS):
                checked += 1
                got = 1 if r.at(f"bit_{j}", t_s) >= th.sense else 0
                if got != expect[op.row, j]:
                    read_errors += 1
                hi = f"out_{op.row}_{j}" if expect[op.row, j] else f"nout_{op.row}_{j}"
                lo = f"nout_{op.row}_{j}" if expect[op.row, j] else f"out_{op.row}_{j}"
                vh, vl = r.at(hi, t_s), r.at(lo, t_s)
                if vh < th.v_high_ok or vl > th.v_low_ok:
                    weak.append(vh)
    w0 = schedule([Write(0)], setup.scheme)[0].pulses
    order = tuple(sorted(WRITE0_ORDER, key=lambda ph: w0[ph][0]))
    reversed_ok = order == ("pre_1", "eva_1", "pre_0", "eva_0")
    ok = read_errors == 0 and disturb == 0 and not weak and reversed_ok
    detail = (f"{checked} cell reads, {read_errors} wrong bits, {disturb} disturbed cells, "
              f"write-0 order {'reversed' if reversed_ok else 'NOT reversed'}; "
              f"{len(weak)} reads with a storage node inside the "
              f"[{th.v_low_ok:.2f}, {th.v_high_ok:.2f}] V band")
    if weak:
        detail += f" (lowest high node {min(weak):.3f} V)"
    return ok, detail


def criterion_3_restored():
    """Supplementary: the same threshold check when a restore precedes the read."""
    setup = CellSetup(NW, parasitics=cell_parasitics(NW))
    th = setup.th()
    worst = []
    for bit in (0, 1):
        run = run_ops(setup, [Write(bit), Restore(), Read()])
        w = run.windows[-1]
        t_s = w.slot_start(3) - setup.sim.sample_interval
        hi, lo = ("out", "nout") if bit else ("nout", "out")
        worst.append((run.result.at(hi, t_s), run.result.at(lo, t_s)))
    vh = min(h for h, _ in worst)
    vl = max(l for _, l in worst)
    return vh >= th.v_high_ok and vl <= th.v_low_ok, (
        f"write->restore->read: high node >= {vh:.3f} V, low node <= {vl:.3f} V")


# 4 -------------------------------------------------------------------------

def criterion_4():
    setup = CellSetup(NW, parasitics=cell_parasitics(NW))
    res = find_max_restore_interval(setup, rel_tol=0.05)
    ts = res.t_star
    below = [0.0, 0.25 * ts, 0.5 * ts, 0.9 * ts, ts]
    above = [1.06 * ts, 1.5 * ts, 2.0 * ts]
    pass_below = all(readback_ok(setup, t) for t in below)
    fail_above = not any(readback_ok(setup, t) for t in above)
    run = run_ops(setup, [Write(1), Restore(), Idle(ts)])
    w = run.windows[-1]
    t = run.result.times
    v = run.result.v("out")[(t > w.start + 0.2e-9) & (t <= w.end)]
    monotone = bool(np.all(v - np.minimum.accumulate(v) < 1e-6))
    ok = pass_below and fail_above and monotone
    return ok, (f"T* = {ts * 1e9:.1f} ns (first failure {res.t_fail * 1e9:.1f} ns), "
                f"pass below {pass_below}, fail above 1.05 T* {fail_above}, "
                f"monotone decay {monotone}")


# 5 -------------------------------------------------------------------------

_REPORT = {}


def _report():
    if "r" not in _REPORT:
        _REPORT["r"] = run_benchmark(SuiteConfig(retention=False))
    return _REPORT["r"]


def criterion_5():
    rep = _report()
    parts, ok = [], True
    checks = [
        ("write_time:SRAM_8T_HP/NWRAM_10T", lambda x: x >= 1.5, ">= 1.5"),
        ("read_time:SRAM_6T_LP/NWRAM_10T", lambda x: x >= 2.0, ">= 2"),
        ("leakage_power:SRAM_6T_HP/NWRAM_10T", lambda x: x >= 10.0, ">= 10"),
    ] + [
        (f"active_power_read:NWRAM_10T/{c.value}", lambda x: 1.2 <= x <= 3.0, "in [1.2, 3]")
        for c in CellKind if c is not NW
    ]
    for key, pred, target in checks:
        vals = [rep.ratios[b][key] for b in ("lower", "upper")]
        good = all(pred(v) for v in vals)
        ok &= good
        parts.append(f"{key.split(':')[0]} {key.split(':')[1]} = "
                     f"{vals[0]:.2f}/{vals[1]:.2f} ({target}) {'ok' if good else 'MISS'}")
    return ok, "; ".join(parts)


# 6 -------------------------------------------------------------------------

def criterion_6():
    areas_ok = all(
        round(scale_area(s.ref_area, s.area_factor) / UM2, 6) == target
        for col, rows in zip(scaling_scenarios(), AREA_16NM_UM2)
        for s, target in zip(col, rows)
    )
    rules_ok = True
    for c, f in enumerate(RULE_FACTORS):
        for row in range(3):
            r = scale_rules(reference_rules(c, row), f)
            got = (r.m1_half_pitch, r.np_spacing, r.via_spacing)
            rules_ok &= all(round(g / NM, 6) == RULES_16NM_NM[c][i][row]
                            for i, g in enumerate(got))
    hp = round(scale_rules(reference_rules(1), 1.42).m1_half_pitch / NM, 6)
    lo, hi = cell_area_bounds(NW)
    ratio_ok = math.isclose(hi / lo, 2.25, rel_tol=1e-12)
    ok = areas_ok and rules_ok and hp == 24.5 and ratio_ok
    return ok, (f"12 area cells exact {areas_ok}, 36 rule cells exact {rules_ok}, "
                f"M1 half-pitch @1.42 = {hp} nm, NWRAM bounds {lo / UM2:.3f}/{hi / UM2:.3f} um2 "
                f"(ratio {hi / lo:.4f})")


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6}


def _emit(text: str, capsys=None):
    if capsys is None:
        print(text)
        return
    with capsys.disabled():
        print("\n" + text)


@pytest.mark.slow
@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n]()
    _emit(_line(n, ok, detail), capsys)
    if n == 3:
        sup_ok, sup = criterion_3_restored()
        _emit(f"  supplementary: {sup} ({'beyond' if sup_ok else 'inside'} thresholds)", capsys)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        results.append(ok)
        print(_line(n, ok, detail), flush=True)
        if n == 3:
            sup_ok, sup = criterion_3_restored()
            print(f"  supplementary: {sup} ({'beyond' if sup_ok else 'inside'} thresholds)")
    sys.exit(0 if all(results) else 1)
