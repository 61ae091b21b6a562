"""Command-line front end.

Two subcommands::

    qsched run      one scenario; writes summary.csv (+ optional traces)
    qsched compare  all five classes over a set of shared seeds

Configuration precedence is defaults < --config file < --set overrides; the
convenience flags --class/--seed/--time are shorthand for --set.  Output goes
to --out, else $QSCHED_OUT, else ./out.  Exit codes: 0 success, 1 bad
configuration or usage, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .compare import compare_classes, format_comparison
from .config import ConfigError, ParseError, load_config
from .outputs import format_report
from .scheduler import ServiceClass
from .simulation import run_scenario

_CLASS_CHOICES = [c.display for c in ServiceClass]


class _UsageError(ParseError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; bad usage is a validation failure
    # here, so surface it as exit code 1 instead.
    def error(self, message: str):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qsched", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser) -> None:
        p.add_argument("--config", metavar="FILE",
                       help="JSON or key=value config file")
        p.add_argument("--set", dest="overrides", action="append",
                       default=[], metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (default $QSCHED_OUT or ./out)")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--time", type=float, metavar="SECONDS",
                       help="simulated duration")
        p.add_argument("--quiet", action="store_true",
                       help="suppress the text report on stdout")

    run_p = sub.add_parser("run", help="run one scenario")
    common(run_p)
    run_p.add_argument("--class", dest="svc_class", choices=_CLASS_CHOICES,
                       help="service class for every flow")
    run_p.add_argument("--trace", action="store_true",
                       help="also write the per-packet trace.csv")
    run_p.add_argument("--grants", action="store_true",
                       help="also write the allocator audit grants.csv")
    run_p.add_argument("--positions", action="store_true",
                       help="also write node positions at each refresh")

    cmp_p = sub.add_parser("compare", help="run all five classes per seed")
    common(cmp_p)
    cmp_p.add_argument("--seeds", type=int, default=5, metavar="N",
                       help="number of seeds, master_seed..master_seed+N-1")
    cmp_p.add_argument("--seed-list", metavar="S1,S2,...",
                       help="explicit comma-separated seeds (overrides --seeds)")
    return parser


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get("QSCHED_OUT")
    return Path(env) if env else Path("out")


def _load(args):
    overrides = list(args.overrides)
    if getattr(args, "svc_class", None):
        overrides.append(f"qos_class={args.svc_class}")
    if args.seed is not None:
        overrides.append(f"master_seed={args.seed}")
    if args.time is not None:
        overrides.append(f"sim_time_s={args.time}")
    return load_config(args.config, overrides)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"qsched: error: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"qsched: config error: {exc}", file=sys.stderr)
        return 1
    try:
        out = _out_dir(args)
        if args.command == "run":
            report = run_scenario(cfg, out, emit_trace=args.trace,
                                  emit_grants=args.grants,
                                  emit_positions=args.positions)
            if not args.quiet:
                print(format_report(report), end="")
                print(f"\nwrote {', '.join(str(p) for p in report.paths.values())}")
        else:
            if args.seed_list:
                try:
                    seeds = [int(s) for s in args.seed_list.split(",") if s.strip()]
                except ValueError:
                    print("qsched: config error: --seed-list expects integers",
                          file=sys.stderr)
                    return 1
                if not seeds:
                    print("qsched: config error: --seed-list is empty",
                          file=sys.stderr)
                    return 1
            else:
                if args.seeds < 1:
                    print("qsched: config error: --seeds must be >= 1",
                          file=sys.stderr)
                    return 1
                seeds = [cfg.master_seed + i for i in range(args.seeds)]
            report = compare_classes(cfg, seeds, out)
            if not args.quiet:
                print(format_comparison(report), end="")
                print(f"\nwrote {', '.join(str(p) for p in report.paths.values())}")
        return 0
    except ConfigError as exc:
        print(f"qsched: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"qsched: runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
