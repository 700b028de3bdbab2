"""Command-line interface.

Subcommands: ``run``, ``compare``, ``convergence``, ``characteristics``.
Every subcommand takes ``--config`` (a scenario JSON file) and ``--out``
(output directory, default: alongside the configured paths).  Exit code 0 on
success, 1 with a message on stderr otherwise.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import JunctionFlowError
from .harness import (
    characteristics_command,
    compare_command,
    convergence_command,
    run_command,
    write_comparison,
    write_convergence,
)
from .scenario_io import parse_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="junctionflow",
        description="Simulate a 1-to-1 road junction with a buffer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", default=None, help="output directory")

    p_run = sub.add_parser("run", help="run one scenario, write CSV outputs")
    add_common(p_run)

    p_cmp = sub.add_parser(
        "compare",
        help="run the look-ahead model per eta against reference models",
    )
    add_common(p_cmp)
    p_cmp.add_argument("--eta", action="append", type=float, required=True,
                       help="look-ahead range (repeatable)")
    p_cmp.add_argument("--reference", action="append", required=True,
                       help="reference model (repeatable; first one is the "
                            "L1 reference)")
    p_cmp.add_argument("--interval", nargs=2, type=float, default=None,
                       metavar=("XLO", "XHI"),
                       help="road-1 interval for the L1 distance")
    p_cmp.add_argument("--sort", choices=("asc", "desc"), default="desc",
                       help="row order by eta")

    p_cnv = sub.add_parser(
        "convergence", help="grid-refinement study for one scenario"
    )
    add_common(p_cnv)
    p_cnv.add_argument("--dx", action="append", type=float, required=True,
                       help="cell width (repeatable)")

    p_chr = sub.add_parser(
        "characteristics", help="trace characteristic curves through a run"
    )
    add_common(p_chr)
    p_chr.add_argument("--seed-x", action="append", type=float, required=True,
                       help="seed position (repeatable; negative on road 1)")
    p_chr.add_argument("--seed-t", type=float, default=0.0,
                       help="seed time (default 0)")
    p_chr.add_argument("--tracer-dt", type=float, default=None,
                       help="Euler step for tracing (default: the run's dt)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = parse_scenario(args.config)
        if args.command == "run":
            paths = run_command(scenario, out_dir=args.out)
        elif args.command == "compare":
            report = compare_command(
                scenario, args.eta, args.reference,
                interval=tuple(args.interval) if args.interval else None,
                sort=args.sort,
            )
            out = Path(args.out or ".") / "comparison.csv"
            paths = [write_comparison(report, out)]
        elif args.command == "convergence":
            rows = convergence_command(scenario, args.dx)
            out = Path(args.out or ".") / "convergence.csv"
            paths = [write_convergence(rows, out)]
        else:
            paths = characteristics_command(
                scenario, args.seed_x, tracer_dt=args.tracer_dt,
                seed_t=args.seed_t, out_dir=args.out,
            )
    except JunctionFlowError as exc:
        print(f"junctionflow: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
