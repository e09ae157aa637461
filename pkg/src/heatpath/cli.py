"""Command line entry point: ``heatpath <subcommand> [options]``.

Exit status: 0 on success, 1 on a structural input error, 2 on an internal error.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config, set_option
from .pipeline import InputError, format_summary, read_per_trip, run, summarize

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2

INPUT_FLAGS = ("gtfs", "trips", "weather", "grid", "workrest", "frostbite", "catalog", "categories",
               "trajectories")


def build_parser():
    parser = argparse.ArgumentParser(prog="heatpath", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "route": "plan and trace every trip (trajectories.jsonl)",
        "expose": "route, then simulate heat and chill exposure (per_trip.csv, ledgers.csv)",
        "score": "expose, then asset resilience scores (asset_scores.csv/.geojson)",
        "compare": "expose, then the additive baseline comparison (compare.csv)",
        "run": "everything",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="flat key = value config file")
        for flag in INPUT_FLAGS:
            p.add_argument(f"--{flag}")
        p.add_argument("--out")
        p.add_argument("--workers", type=int)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any config key, e.g. speed.walk=1.3")
    p = sub.add_parser("summarize", help="weighted flagged shares by month and hour")
    p.add_argument("per_trip", nargs="?", help="per_trip.csv (default: <out>/per_trip.csv)")
    p.add_argument("--out", default="out")
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")
    return parser


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for flag in INPUT_FLAGS + ("out",):
        v = getattr(args, flag)
        if v is not None:
            setattr(cfg, flag, v)
    if args.workers is not None:
        cfg.workers = args.workers
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        set_option(cfg, key.strip(), raw.strip())
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "summarize":
            path = Path(args.per_trip) if args.per_trip else Path(args.out) / "per_trip.csv"
            try:
                rows = read_per_trip(path)
            except OSError as exc:
                raise InputError(str(exc)) from None
            s = summarize(rows)
            print(json.dumps(s, indent=1, sort_keys=True) if args.json else format_summary(s))
            return EXIT_OK
        cfg = config_from_args(args)
        manifest = run(cfg, args.command)
        c = manifest["counts"]
        print(f"{args.command}: {c['records']} records, {c['ok']} ok, {c['failed']} failed, "
              f"{c['flagged']} heat-flagged -> {cfg.out}")
        return EXIT_OK
    except (InputError, ConfigError) as exc:
        print(f"heatpath: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:
        logging.getLogger("heatpath").debug("internal error", exc_info=True)
        print(f"heatpath: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
