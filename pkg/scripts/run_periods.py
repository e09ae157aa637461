"""Run one batch per network period and merge the per-trip results.

The periods file is a CSV with ``gtfs,start,end`` (ISO dates, end inclusive).
Trips are split by departure date; each slice runs against its own feed with
the shared config, then per_trip.csv files are concatenated and summarized.
"""
import argparse
import csv
import json
import sys
from datetime import date
from pathlib import Path

from heatpath.config import load_config
from heatpath.pipeline import run, summarize
from heatpath.records import TRIP_COLUMNS


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="shared config; its gtfs key is replaced per period")
    ap.add_argument("--periods", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    base = load_config(args.config)
    with open(args.periods, newline="") as fh:
        periods = [(r["gtfs"], date.fromisoformat(r["start"]), date.fromisoformat(r["end"]))
                   for r in csv.DictReader(fh)]
    with open(base.trips, newline="") as fh:
        trips = list(csv.DictReader(fh))
    out = Path(args.out)
    merged, header = [], None
    unassigned = len(trips)
    for i, (gtfs, start, end) in enumerate(periods):
        rows = [r for r in trips if start <= date.fromisoformat(r["depart"][:10]) <= end]
        unassigned -= len(rows)
        if not rows:
            continue
        d = out / f"period_{i:02d}"
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "trips.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, TRIP_COLUMNS, extrasaction="ignore", lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        cfg = load_config(args.config)
        gtfs_path = Path(gtfs)
        cfg.gtfs = str(gtfs_path if gtfs_path.is_absolute() else Path(args.periods).parent / gtfs_path)
        cfg.trips, cfg.out, cfg.workers = str(d / "trips.csv"), str(d), args.workers
        m = run(cfg, "run")
        print(f"period {i} {start}..{end}: {m['counts']['records']} records, {m['counts']['flagged']} flagged")
        with open(d / "per_trip.csv", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            merged.extend(reader)
    if header is None:
        print("no trips fell inside any period", file=sys.stderr)
        return 1
    with open(out / "per_trip.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(sorted(merged, key=lambda r: r[0]))
    summary = summarize([dict(zip(header, r)) for r in merged])
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    if unassigned:
        print(f"{unassigned} trips outside every period were skipped", file=sys.stderr)
    print(f"merged {len(merged)} trips, {summary['flagged_pct']:.2f}% weighted flagged -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
