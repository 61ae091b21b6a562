#!/usr/bin/env python3
"""Reproduce the headline experiment: all five service classes side by side.

Every class replays identical mobility and traffic per seed (named RNG
substreams), so the delay/jitter/throughput spread is the scheduling policy
alone.  Writes comparison.csv and compare.txt, prints the ordering checks.

Example:
    python3 scripts/run_comparison.py --seeds 5 --out out/comparison
"""
import argparse
import dataclasses
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from qsched.compare import compare_classes, format_comparison
from qsched.config import ScenarioConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5,
                    help="number of paired seeds, counting up from --first")
    ap.add_argument("--first", type=int, default=42)
    ap.add_argument("--time", type=float, default=100.0, help="seconds")
    ap.add_argument("--nodes", type=int, default=10)
    ap.add_argument("--out", type=Path, default=Path("out/comparison"))
    args = ap.parse_args()

    cfg = dataclasses.replace(ScenarioConfig(), sim_time_s=args.time,
                              nodes=args.nodes)
    seeds = list(range(args.first, args.first + args.seeds))
    report = compare_classes(cfg, seeds, args.out)
    print(format_comparison(report))
    print(f"artifacts in {args.out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
