"""Side-by-side runs of all five service classes over shared seeds.

For each seed, the same mobility and traffic realizations are replayed under
every class (named rng substreams make this exact, and the run digests prove
it), so differences in delay, jitter, and loss come from scheduling policy
alone.  The expected picture: UGS and ertPS keep delay lowest, rtPS pays one
poll cycle, BE pays contention, and nrtPS's slow poll cycle dominates its
delay; jitter is smallest for ertPS and largest for nrtPS.
"""
from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import ScenarioConfig
from .scheduler import PRIORITY_ORDER, ServiceClass
from .simulation import RunReport, run_scenario

DELAY_ORDER = (ServiceClass.UGS, ServiceClass.ERTPS, ServiceClass.RTPS,
               ServiceClass.BE, ServiceClass.NRTPS)


@dataclass
class SeedOutcome:
    seed: int
    by_class: dict[ServiceClass, RunReport]
    delay_order_ok: bool
    jitter_min_ok: bool       # ertPS has the smallest mean jitter
    jitter_max_ok: bool       # nrtPS has the largest mean jitter
    digests_match: bool       # mobility+traffic identical across classes


@dataclass
class CompareReport:
    cfg: ScenarioConfig
    seeds: list[int]
    outcomes: list[SeedOutcome]
    rows: list[dict] = field(default_factory=list)
    wall_s: float = 0.0
    paths: dict[str, Path] = field(default_factory=dict)

    def seeds_with_delay_order(self) -> int:
        return sum(1 for o in self.outcomes if o.delay_order_ok)

    def seeds_with_jitter_extremes(self) -> int:
        return sum(1 for o in self.outcomes if o.jitter_min_ok and o.jitter_max_ok)


def _check_seed(seed: int, by_class: dict[ServiceClass, RunReport]) -> SeedOutcome:
    delays = {c: by_class[c].network.mean_delay_us for c in PRIORITY_ORDER}
    jitters = {c: by_class[c].network.mean_jitter_us for c in PRIORITY_ORDER}
    ordered = [delays[c] for c in DELAY_ORDER]
    delay_ok = all(a < b for a, b in zip(ordered, ordered[1:]))
    jit_min = min(jitters.values())
    jit_max = max(jitters.values())
    mob = {by_class[c].mobility_digest for c in PRIORITY_ORDER}
    tra = {by_class[c].traffic_digest for c in PRIORITY_ORDER}
    return SeedOutcome(
        seed=seed, by_class=by_class, delay_order_ok=delay_ok,
        jitter_min_ok=jitters[ServiceClass.ERTPS] == jit_min,
        jitter_max_ok=jitters[ServiceClass.NRTPS] == jit_max,
        digests_match=len(mob) == 1 and len(tra) == 1)


def compare_classes(cfg: ScenarioConfig, seeds: list[int],
                    out_dir: Path | str | None = None) -> CompareReport:
    """Run every class under every seed and collect ordering checks."""
    t0 = time.perf_counter()
    outcomes: list[SeedOutcome] = []
    rows: list[dict] = []
    for seed in seeds:
        by_class: dict[ServiceClass, RunReport] = {}
        for cls in PRIORITY_ORDER:
            run_cfg = dataclasses.replace(
                cfg, master_seed=seed, qos_class=cls.display)
            by_class[cls] = run_scenario(run_cfg)
        outcomes.append(_check_seed(seed, by_class))
        for cls in PRIORITY_ORDER:
            net = by_class[cls].network
            rows.append({
                "seed": seed, "class": cls.display,
                "delivered": net.delivered, "dropped": net.dropped,
                "throughput_mbps": net.throughput_mbps,
                "mean_delay_us": net.mean_delay_us,
                "mean_jitter_us": net.mean_jitter_us,
            })
    report = CompareReport(cfg=cfg, seeds=list(seeds), outcomes=outcomes,
                           rows=rows, wall_s=time.perf_counter() - t0)
    if out_dir is not None:
        from . import outputs
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        comment = f"seeds={','.join(str(s) for s in seeds)}"
        report.paths["comparison"] = outputs.write_comparison(
            out / "comparison.csv", rows, comment)
        report.paths["compare_txt"] = (out / "compare.txt")
        report.paths["compare_txt"].write_text(format_comparison(report))
    return report


def format_comparison(report: CompareReport) -> str:
    lines = [f"{'seed':>6}  {'class':<6}  {'delivered':>9}  {'dropped':>7}  "
             f"{'Mb/s':>8}  {'delay_ms':>9}  {'jitter_ms':>9}"]
    for row in report.rows:
        lines.append(
            f"{row['seed']:>6}  {row['class']:<6}  {row['delivered']:>9}  "
            f"{row['dropped']:>7}  {row['throughput_mbps']:>8.4f}  "
            f"{row['mean_delay_us'] / 1000:>9.3f}  "
            f"{row['mean_jitter_us'] / 1000:>9.3f}")
    lines.append("")
    n = len(report.outcomes)
    lines.append(f"delay order UGS<ertPS<rtPS<BE<nrtPS: "
                 f"{report.seeds_with_delay_order()}/{n} seeds")
    lines.append(f"jitter extremes (ertPS min, nrtPS max): "
                 f"{report.seeds_with_jitter_extremes()}/{n} seeds")
    lines.append(f"paired mobility/traffic digests: "
                 f"{sum(1 for o in report.outcomes if o.digests_match)}/{n} seeds")
    lines.append(f"wall time {report.wall_s:.1f}s for {5 * n} runs")
    return "\n".join(lines) + "\n"
