"""Command line entry point: ``nwram {simulate,bench,area,retention}``."""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from dataclasses import replace
from pathlib import Path

from . import layout
from .bench.retention import find_max_restore_interval
from .bench.scenarios import run_ops
from .bench.suite import BOUNDS, ScenarioError, run_benchmark
from .config import load_config
from .engine import KERNEL
from .netlist import CellKind, build_nwram_array, to_text
from .stimulus import Idle, Read, Restore, Write, lower, write_waveforms_csv

_OP = re.compile(r"^(W[01]|R|RS|I=(?P<dur>[0-9.eE+-]+))(?:@(?P<row>\d+)(?::(?P<cols>[\d|]+))?)?$")


def parse_ops(text: str):
    """``W1,W0@2:0|3,R@2,RS,I=5e-9`` -> operation list.

    ``@row`` selects an array row and ``:c|c`` restricts a write to columns.
    """
    ops = []
    for tok in (t.strip() for t in text.split(",") if t.strip()):
        m = _OP.match(tok.upper() if not tok.startswith("I=") else tok)
        if not m:
            raise ValueError(f"bad operation {tok!r}")
        head, row, cols = m.group(1), m.group("row"), m.group("cols")
        row = int(row) if row is not None else None
        if cols is not None and not head.startswith("W"):
            raise ValueError(f"column selection only applies to writes: {tok!r}")
        if head.startswith("W"):
            ops.append(Write(int(head[1]), row or 0,
                             tuple(int(c) for c in cols.split("|")) if cols else None))
        elif head == "R":
            ops.append(Read(row or 0))
        elif head == "RS":
            ops.append(Restore(row))
        else:
            if row is not None:
                raise ValueError(f"idle takes no row: {tok!r}")
            ops.append(Idle(float(m.group("dur"))))
    if not ops:
        raise ValueError("empty operation sequence")
    return ops


def _cmd_simulate(args, cfg, out: Path) -> dict:
    kind = CellKind(args.cell)
    setup = cfg.setup(kind, args.bound)
    ops = parse_ops(args.ops)
    circuit = None
    if args.rows > 1 or args.cols > 1:
        if kind is not CellKind.NWRAM_10T:
            raise ValueError("arrays are only built for NWRAM_10T")
        circuit = build_nwram_array(args.rows, args.cols, cfg.devices, setup.parasitics)
    run = run_ops(setup, ops, circuit)
    c = run.circuit
    waves = lower(ops, setup.cell_scheme(), sorted(c.driven), v_data=setup.vdd)
    files = [run.result.to_csv(out / "waveforms.csv", [p for p, _ in c.ports])]
    files += write_waveforms_csv(waves, out / "stimulus")
    (out / "netlist.txt").write_text(to_text(c))
    summary = {
        "cell": kind.value, "bound": args.bound, "circuit": c.name,
        "ops": args.ops, "t_end_s": run.windows[-1].end, "kernel": KERNEL,
        "flags": run.result.flags,
        "final_v": {p: run.result.final(p) for p, _ in c.ports},
    }
    (out / "simulate.json").write_text(json.dumps(summary, indent=2))
    return {"files": [str(f) for f in files]}


def _cmd_bench(args, cfg, out: Path) -> dict:
    rep = run_benchmark(cfg)
    rep.meta["kernel"] = KERNEL
    return {"files": [str(p) for p in rep.write(out)]}


def _cmd_area(args, cfg, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    area = out / "area.csv"
    with area.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell", "area_lower_um2", "area_upper_um2"])
        for kind in CellKind:
            lo, hi = layout.cell_area_bounds(kind, cfg.geometry.get(kind))
            w.writerow([kind.value, f"{lo / layout.UM2:.6g}", f"{hi / layout.UM2:.6g}"])
    scen = out / "area_scaling.csv"
    with scen.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["column", "cell", "area_factor", "ref_area_um2", "area_16nm_um2"])
        for c, col in enumerate(layout.scaling_scenarios()):
            for k, s in enumerate(col):
                w.writerow([c, k, f"{s.area_factor:g}", f"{s.ref_area / layout.UM2:.6g}",
                            f"{layout.scale_area(s.ref_area, s.area_factor) / layout.UM2:.6g}"])
    rules = out / "rule_scaling.csv"
    with rules.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["column", "row", "rule_factor", "m1_half_pitch_nm", "np_spacing_nm",
                    "via_spacing_nm"])
        for c, f in enumerate(layout.RULE_FACTORS):
            for row in range(3):
                r = layout.scale_rules(layout.reference_rules(c, row), f)
                w.writerow([c, row, f"{f:g}"] + [
                    f"{x / layout.NM:.6g}" for x in (r.m1_half_pitch, r.np_spacing, r.via_spacing)])
    return {"files": [str(area), str(scen), str(rules)]}


def _cmd_retention(args, cfg, out: Path) -> dict:
    kind = CellKind.NWRAM_10T
    setup = cfg.setup(kind, args.bound)
    try:
        res = find_max_restore_interval(setup, rel_tol=args.rel_tol)
    except (RuntimeError, ValueError) as exc:
        raise ScenarioError(kind.value, args.bound, "retention", str(exc)) from exc
    out.mkdir(parents=True, exist_ok=True)
    path = out / "retention.json"
    path.write_text(json.dumps({
        "cell": kind.value, "bound": args.bound, "t_star_s": res.t_star,
        "t_fail_s": res.t_fail, "rel_tol": args.rel_tol,
        "evaluations": [{"idle_s": t, "ok": ok} for t, ok in res.evaluations],
    }, indent=2))
    return {"files": [str(path)], "t_star_s": res.t_star}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nwram", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML configuration file")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate an operation sequence")
    s.add_argument("cell", choices=[k.value for k in CellKind])
    s.add_argument("ops", help="comma list: W0, W1, R, RS, I=<seconds>, with optional @row[:c|c]")
    s.add_argument("--bound", choices=sorted(BOUNDS), default="lower")
    s.add_argument("--rows", type=int, default=1)
    s.add_argument("--cols", type=int, default=1)
    s.set_defaults(fn=_cmd_simulate)

    b = sub.add_parser("bench", parents=[common], help="full benchmark suite")
    b.add_argument("--workers", type=int, help="parallel worker processes")
    b.add_argument("--no-retention", action="store_true", help="skip the restore search")
    b.set_defaults(fn=_cmd_bench)

    a = sub.add_parser("area", parents=[common], help="cell area bounds and scaling tables")
    a.set_defaults(fn=_cmd_area)

    r = sub.add_parser("retention", parents=[common], help="longest restore interval")
    r.add_argument("--bound", choices=sorted(BOUNDS), default="lower")
    r.add_argument("--rel-tol", type=float, default=0.05)
    r.set_defaults(fn=_cmd_retention)
    return p


def _error_record(exc: BaseException) -> dict:
    if isinstance(exc, ScenarioError):
        return exc.record()
    return {"error": type(exc).__name__, "message": str(exc)}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = load_config(args.config)
        if args.command == "bench":
            over = {}
            if args.workers:
                over["workers"] = args.workers
            if args.no_retention:
                over["retention"] = False
            cfg = replace(cfg, **over)
        out.mkdir(parents=True, exist_ok=True)
        result = args.fn(args, cfg, out)
    except Exception as exc:  # every failure becomes a machine-readable record
        rec = _error_record(exc)
        rec["command"] = args.command
        text = json.dumps(rec)
        print(text, file=sys.stderr)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(text + "\n")
        except OSError:
            pass
        return 1
    print(json.dumps({"command": args.command, "status": "ok", **result}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
