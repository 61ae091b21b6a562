#!/usr/bin/env python3
"""Run one scenario and write every artifact for it.

Example:
    python3 scripts/run_single.py --class ertPS --seed 42 --out out/single
"""
import argparse
import dataclasses
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from qsched.config import ScenarioConfig
from qsched.outputs import format_report
from qsched.simulation import run_scenario


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--class", dest="qos_class", default="ertPS",
                    choices=["UGS", "ertPS", "rtPS", "nrtPS", "BE"])
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--time", type=float, default=100.0, help="seconds")
    ap.add_argument("--nodes", type=int, default=10)
    ap.add_argument("--out", type=Path, default=Path("out/single"))
    args = ap.parse_args()

    cfg = dataclasses.replace(ScenarioConfig(), qos_class=args.qos_class,
                              master_seed=args.seed, sim_time_s=args.time,
                              nodes=args.nodes)
    report = run_scenario(cfg, args.out, emit_trace=True, emit_grants=True,
                          emit_positions=True)
    print(format_report(report))
    print(f"artifacts in {args.out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
