"""Compiled vs pure-Python kernel: wall time and waveform agreement.

    python3 benchmarks/bench_kernels.py [--method TRAPEZOIDAL] [--repeat 3]

The pure-Python kernel runs one to two hundred times slower than the
compiled one, so a default run takes about a minute.
"""

from __future__ import annotations

import argparse
import time
from dataclasses import replace

import numpy as np

from nwram.bench.scenarios import CellSetup
from nwram.engine import Method, SimConfig, _ckernel, _pykernel, run_transient
from nwram.layout import cell_parasitics
from nwram.netlist import CellKind
from nwram.stimulus import Read, Write, lower, schedule


def _case(kind: CellKind, method: Method):
    setup = CellSetup(kind, parasitics=cell_parasitics(kind), sim=SimConfig(method=method))
    ops = [Write(1), Read(), Write(0), Read()]
    c = setup.circuit()
    waves = lower(ops, setup.cell_scheme(), sorted(c.driven), v_data=setup.vdd)
    cfg = replace(setup.sim, t_end=schedule(ops, setup.scheme)[-1].end)
    return c, waves, cfg


def _time(kernel, c, waves, cfg, repeat):
    best, res = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = run_transient(c, waves, {}, cfg, kernel=kernel)
        best = min(best, time.perf_counter() - t0)
    return best, res


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--method", choices=[m.value for m in Method], default="EXPLICIT_SUBSTEP")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--cells", nargs="*", default=["NWRAM_10T", "SRAM_6T_HP"])
    args = ap.parse_args(argv)
    if _ckernel is None:
        raise SystemExit("compiled kernel not built; run pip install -e . --no-build-isolation")
    method = Method(args.method)
    print(f"{'cell':<12} {'method':<17} {'compiled_s':>10} {'python_s':>10} "
          f"{'speedup':>8} {'max_dv_V':>10}")
    for name in args.cells:
        c, waves, cfg = _case(CellKind(name), method)
        tc, rc = _time(_ckernel, c, waves, cfg, args.repeat)
        tp, rp = _time(_pykernel, c, waves, cfg, 1)
        dv = float(np.max(np.abs(rc.voltages - rp.voltages)))
        print(f"{name:<12} {method.value:<17} {tc:10.3f} {tp:10.3f} {tp / tc:8.1f} {dv:10.2e}")


if __name__ == "__main__":
    main()
