"""CSV and text emitters with stable, diff-friendly formatting.

Every file starts with a single ``#`` comment line naming the seed and class,
then a header row.  Numeric formatting is fixed (throughput to six decimals,
delays to three) so identical runs produce byte-identical files.
"""
from __future__ import annotations

import csv
from pathlib import Path

from .metrics import PacketRecord, SummaryRow
from .scheduler import AuditRow


def _open_writer(path: Path, comment: str):
    fh = path.open("w", newline="")
    fh.write(f"# {comment}\n")
    return fh, csv.writer(fh)


def write_trace(path: Path, records: list[PacketRecord], comment: str) -> Path:
    fh, w = _open_writer(path, comment)
    with fh:
        w.writerow(["pkt_id", "flow", "node", "class", "size_B",
                    "t_gen_us", "t_st_us", "t_rx_us", "disposition"])
        for r in records:
            w.writerow([r.pkt_id, r.flow, r.node, r.svc_class.display, r.size,
                        r.t_gen,
                        "" if r.t_st is None else r.t_st,
                        "" if r.t_rx is None else r.t_rx,
                        r.disposition.value])
    return path


def write_summary(path: Path, rows: list[SummaryRow], comment: str) -> Path:
    fh, w = _open_writer(path, comment)
    with fh:
        w.writerow(["class", "node", "flows", "delivered", "dropped",
                    "throughput_mbps", "mean_delay_us", "mean_jitter_us"])
        for r in rows:
            w.writerow([r.svc_class, r.node, r.flows, r.delivered, r.dropped,
                        f"{r.throughput_mbps:.6f}",
                        f"{r.mean_delay_us:.3f}",
                        f"{r.mean_jitter_us:.3f}"])
    return path


def write_grants(path: Path, rows: list[AuditRow], comment: str) -> Path:
    fh, w = _open_writer(path, comment)
    with fh:
        w.writerow(["frame_idx", "cid", "class",
                    "requested_B", "granted_B", "queue_B"])
        for r in rows:
            w.writerow([r.frame_idx, r.cid, r.svc_class.display,
                        r.requested_bytes, r.granted_bytes, r.queue_bytes])
    return path


def write_positions(path: Path, rows: list[tuple[int, int, float, float]],
                    comment: str) -> Path:
    fh, w = _open_writer(path, comment)
    with fh:
        w.writerow(["time_us", "node", "x_m", "y_m"])
        for t, node, x, y in rows:
            w.writerow([t, node, f"{x:.3f}", f"{y:.3f}"])
    return path


def write_comparison(path: Path, rows: list[dict], comment: str) -> Path:
    fh, w = _open_writer(path, comment)
    with fh:
        w.writerow(["seed", "class", "delivered", "dropped",
                    "throughput_mbps", "mean_delay_us", "mean_jitter_us"])
        for r in rows:
            w.writerow([r["seed"], r["class"], r["delivered"], r["dropped"],
                        f"{r['throughput_mbps']:.6f}",
                        f"{r['mean_delay_us']:.3f}",
                        f"{r['mean_jitter_us']:.3f}"])
    return path


def write_report_text(path: Path, report) -> Path:
    path.write_text(format_report(report))
    return path


def format_report(report) -> str:
    """Human-readable single-run summary."""
    cfg = report.cfg
    net = report.network
    lines = [
        f"class {report.svc_class.display}  seed {cfg.master_seed}  "
        f"nodes {cfg.nodes}  sim {cfg.sim_time_s:g}s",
        f"frames {report.frames}  events {report.events}  "
        f"wall {report.wall_s:.2f}s",
        f"packets: generated {report.generated}  delivered {report.delivered}  "
        f"dropped {report.dropped}  queued-at-end {report.leftover}",
        f"network throughput {net.throughput_mbps:.4f} Mb/s "
        f"({net.throughput_pps:.1f} pkt/s)",
        f"mean end-to-end delay {net.mean_delay_us / 1000:.3f} ms   "
        f"mean jitter {net.mean_jitter_us / 1000:.3f} ms   "
        f"mean air time {net.mean_tx_delay_us:.0f} us",
        "",
        f"{'node':>4}  {'delivered':>9}  {'dropped':>7}  {'Mb/s':>8}  "
        f"{'delay_ms':>9}  {'jitter_ms':>9}",
    ]
    for row in report.node_rows:
        lines.append(
            f"{row.node:>4}  {row.delivered:>9}  {row.dropped:>7}  "
            f"{row.throughput_mbps:>8.4f}  {row.mean_delay_us / 1000:>9.3f}  "
            f"{row.mean_jitter_us / 1000:>9.3f}")
    return "\n".join(lines) + "\n"
