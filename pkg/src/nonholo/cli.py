"""Command-line front end: `nonholo run <scenario>` and `nonholo geometry <system>`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import NonholoError
from .scenarios import (EXIT_INPUT, EXIT_NUMERIC, _grid_points,
                        geometry_report, run_scenario)
from .systems import SYSTEM_REGISTRY


def build_parser():
    parser = argparse.ArgumentParser(prog="nonholo",
                                     description="Nonholonomic dynamics toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file")
    run.add_argument("scenario", help="path to a TOML scenario file")
    run.add_argument("--out", default=None, help="output directory for artifacts")
    run.add_argument("--tolerance", type=float, default=None,
                     help="override the scenario's default tolerance")
    run.add_argument("--seed", type=int, default=None,
                     help="seed for randomized verification grids")

    geo = sub.add_parser("geometry", help="print a geometry report for a registered system")
    geo.add_argument("system", help="registered system name")
    geo.add_argument("--grid-min", type=float, nargs="+", default=None)
    geo.add_argument("--grid-max", type=float, nargs="+", default=None)
    geo.add_argument("--grid-counts", type=int, nargs="+", default=None)
    geo.add_argument("--out", default=None, help="write the report to this directory")
    return parser


def _cmd_run(args) -> int:
    return run_scenario(args.scenario, out_dir=args.out,
                        tolerance=args.tolerance, seed=args.seed)


def _cmd_geometry(args) -> int:
    if args.system not in SYSTEM_REGISTRY:
        print(f"input error: unknown system {args.system!r}; "
              f"registered: {sorted(SYSTEM_REGISTRY)}")
        return EXIT_INPUT
    sys_def = SYSTEM_REGISTRY[args.system]()
    n = sys_def.n
    table = {}
    if args.grid_min is not None:
        table["grid_min"] = args.grid_min
    if args.grid_max is not None:
        table["grid_max"] = args.grid_max
    if args.grid_counts is not None:
        table["grid_counts"] = args.grid_counts
    try:
        points = _grid_points(table, n)
        text = geometry_report(sys_def, points)
    except NonholoError as exc:
        print(f"numeric error: {exc}")
        return EXIT_NUMERIC
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "geometry.txt").write_text(text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_geometry(args)


if __name__ == "__main__":
    sys.exit(main())
