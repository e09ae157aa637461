"""Batch orchestration: route, trace, simulate, score, compare, report.

Every trip record is processed independently (optionally in worker
processes); per-record failures become status rows. Outputs are sorted by
trip id and written with fixed column order and 6-decimal floats, so reruns
are byte-identical whatever the worker count.
"""
import csv
import hashlib
import json
import logging
import math
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .activity import Demographic, MetCatalog, UnsupportedActivity
from .baseline import (CategoryError, ComparisonEntry, HeatCategoryTable, additive_exposure, baseline_trajectory,
                       compare_report, dijkstra_route, static_graph, write_compare_csv)
from .exposure import (ExposureError, FrostbiteTable, TableError, WorkRestTable, simulate_chill,
                       simulate_heat)
from .field import FieldError, load_field
from .records import RecordError, parse_record, read_trip_rows
from .resilience import TripImpact, accumulate, prioritize, write_asset_csv, write_asset_geojson
from .thermal import WeatherInputError
from .transit.network import GTFSError, Projection, load_gtfs
from .transit.raptor import NoItinerary, RoutingError, plan_trip
from .transit.trace import TraceError, Trajectory, trace_trajectory

log = logging.getLogger(__name__)

STAGES = ("route", "expose", "score", "compare", "run")

PER_TRIP_COLUMNS = ("trip_id", "status", "message", "weight", "demographic", "depart", "arrive",
                    "total_time_min", "n_rides", "wait_min", "out_of_vehicle_min", "in_vehicle_min",
                    "e_hi", "p_max", "r_hi", "continued_min", "flag_onset", "e_wc", "r_wc")
LEDGER_COLUMNS = ("trip_id", "period", "kind", "mode", "start", "t_min", "level", "hi_mean", "rho", "eta",
                  "p", "P", "e", "D", "flag", "wc_mean", "tau", "eps", "chill_flag")


class InputError(Exception):
    """Structural problem with the run inputs (exit status 1)."""


@dataclass
class Context:
    net: object
    field: object
    catalog: MetCatalog
    workrest: WorkRestTable
    frostbite: FrostbiteTable
    categories: HeatCategoryTable
    cfg: object
    trajectories: dict = None
    graph: dict = None


def _needs(cfg, stage):
    need = ["trips"]
    if stage != "route":
        need += ["weather", "grid"]
    if stage != "expose" or cfg.trajectories is None:
        need.append("gtfs")
    return need


def load_context(cfg, stage) -> Context:
    try:
        cfg.validate(_needs(cfg, stage))
        net = None
        if cfg.gtfs is not None:
            proj = Projection(cfg.lat0, cfg.lon0) if cfg.lat0 is not None else None
            net = load_gtfs(cfg.gtfs, cfg.footpath_radius_m, proj)
        tfield = None
        if stage != "route":
            tfield = load_field(cfg.weather, cfg.grid, cfg.center, cfg.grid_is_offsets)
        trajs = None
        if cfg.trajectories is not None:
            trajs = read_trajectories(cfg.trajectories)
        ctx = Context(net, tfield, MetCatalog.from_csv(cfg.catalog), WorkRestTable.from_csv(cfg.workrest),
                      FrostbiteTable.from_csv(cfg.frostbite), HeatCategoryTable.from_csv(cfg.categories),
                      cfg, trajs)
        if net is not None:
            ctx.graph = static_graph(net, cfg.routing)
        return ctx
    except (GTFSError, FieldError, TableError, CategoryError, WeatherInputError, OSError,
            KeyError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def read_trajectories(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                t = Trajectory.from_dict(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: bad trajectory: {exc}") from None
            out[t.trip_id] = t
    return out


@dataclass
class TripOutcome:
    trip_id: str
    status: str
    message: str = ""
    record: object = None
    trajectory: Trajectory = None
    heat: object = None
    chill: object = None
    compare: ComparisonEntry = None


def travel_modes(record):
    """Access, egress and transfer modes; wheelchair users wheel instead of walking."""
    wheel = record.demographic is Demographic.WHEELCHAIR_USER

    def fix(mode):
        return "wheelchair" if wheel and mode == "walk" else mode

    return fix(record.access_mode), fix(record.egress_mode), "wheelchair" if wheel else "walk"


def process_record(ctx: Context, row, stage) -> TripOutcome:
    tid = (row.get("trip_id") or "").strip()
    try:
        rec = parse_record(row)
    except RecordError as exc:
        return TripOutcome(tid, "invalid_record", str(exc))
    cfg = ctx.cfg
    access, egress, transfer = travel_modes(rec)
    out = TripOutcome(rec.trip_id, "ok", record=rec)
    try:
        if ctx.trajectories is not None:
            traj = ctx.trajectories.get(rec.trip_id)
            if traj is None:
                return TripOutcome(rec.trip_id, "no_trajectory", "trip not in trajectories file", rec)
        else:
            it = plan_trip(ctx.net, rec.origin, rec.dest, rec.depart, access, egress, transfer, cfg.routing)
            traj = trace_trajectory(ctx.net, it, rec.trip_id)
        out.trajectory = traj
        if stage == "route":
            return out
        out.heat = simulate_heat(traj, rec.demographic, ctx.field, ctx.catalog, ctx.workrest, cfg.posture,
                                 cfg.nws_adjustments)
        out.chill = simulate_chill(traj, ctx.field, ctx.frostbite)
        if stage == "compare" or (stage == "run" and cfg.compare):
            out.compare = _compare_entry(ctx, rec, traj, out.heat, access, egress, transfer)
    except NoItinerary as exc:
        return TripOutcome(rec.trip_id, "no_itinerary", str(exc), rec)
    except (RoutingError, TraceError) as exc:
        return TripOutcome(rec.trip_id, "routing_error", str(exc), rec)
    except (ExposureError, FieldError) as exc:
        return TripOutcome(rec.trip_id, "out_of_span", str(exc), rec)
    except UnsupportedActivity as exc:
        return TripOutcome(rec.trip_id, "unsupported_activity", str(exc), rec)
    except Exception as exc:  # isolate one bad record from the batch
        log.exception("trip %s failed", rec.trip_id)
        return TripOutcome(rec.trip_id, "error", f"{type(exc).__name__}: {exc}", rec)
    return out


def _compare_entry(ctx, rec, traj, heat, access, egress, transfer):
    st = additive_exposure(traj, ctx.field, ctx.categories, ctx.cfg.nws_adjustments)
    if ctx.net is None:
        raise RoutingError("comparison needs a network")
    path = dijkstra_route(ctx.net, rec.origin, rec.dest, access, egress, transfer, ctx.cfg.routing,
                          graph=ctx.graph if transfer == "walk" else None)
    btraj = baseline_trajectory(path, rec.depart, rec.trip_id)
    base = additive_exposure(btraj, ctx.field, ctx.categories, ctx.cfg.nws_adjustments)
    return ComparisonEntry(rec.trip_id, rec.weight, traj.duration_s / 60.0, heat.e_hi, heat.r_hi,
                           st.total, btraj.duration_s / 60.0, base.total)


_WORKER = {}


def _init_worker(cfg, stage):
    _WORKER["ctx"] = load_context(cfg, stage)
    _WORKER["stage"] = stage


def _work(row):
    return process_record(_WORKER["ctx"], row, _WORKER["stage"])


def process_all(cfg, stage, rows, ctx=None):
    if cfg.workers <= 1 or len(rows) < 2:
        ctx = ctx or load_context(cfg, stage)
        outcomes = [process_record(ctx, r, stage) for r in rows]
    else:
        chunk = max(1, len(rows) // (cfg.workers * 4))
        with ProcessPoolExecutor(cfg.workers, initializer=_init_worker, initargs=(cfg, stage)) as pool:
            outcomes = list(pool.map(_work, rows, chunksize=chunk))
    # Stable sort keeps input order among duplicate ids.
    return sorted(outcomes, key=lambda o: o.trip_id)


def f6(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.6f}"


def per_trip_row(o: TripOutcome):
    rec, traj = o.record, o.trajectory
    row = dict.fromkeys(PER_TRIP_COLUMNS, "")
    row.update(trip_id=o.trip_id, status=o.status, message=o.message)
    if rec is not None:
        row.update(weight=f6(rec.weight), demographic=rec.demographic.value, depart=rec.depart.isoformat())
    if traj is not None:
        wait = sum(p.duration_s for p in traj.periods if p.kind == "wait")
        inside = sum(p.duration_s for p in traj.periods if p.conditioned)
        row.update(arrive=traj.arrive.isoformat(), total_time_min=f6(traj.duration_s / 60.0),
                   n_rides=str(sum(1 for p in traj.periods if p.kind == "ride")),
                   wait_min=f6(wait / 60.0), in_vehicle_min=f6(inside / 60.0),
                   out_of_vehicle_min=f6((traj.duration_s - wait - inside) / 60.0))
    if o.heat is not None:
        h = o.heat
        row.update(e_hi=f6(h.e_hi), p_max=f6(h.p_max), r_hi=f6(h.r_hi), continued_min=f6(h.continued_min),
                   flag_onset=h.flag_onset.isoformat() if h.flag_onset else "")
    if o.chill is not None:
        row.update(e_wc=f6(o.chill.e_wc), r_wc=f6(o.chill.r_wc))
    return [row[c] for c in PER_TRIP_COLUMNS]


def ledger_rows(o: TripOutcome):
    h, c = o.heat, o.chill
    for p, cp in zip(h.periods, c.periods):
        yield [o.trip_id, str(p.index), p.kind, p.mode, p.start.isoformat() if p.start else "",
               f6(p.duration_min), p.level.label, f6(p.hi_mean), f6(p.rho), f6(p.eta), f6(p.burden_inc),
               f6(p.burden), f6(p.exposure), f6(p.deficit), f6(p.flag), f6(cp.wc_mean), f6(cp.tau),
               f6(cp.dose), ""]
    total_t = sum(p.duration_min for p in h.periods)
    yield [o.trip_id, "total", "", "", "", f6(total_t), "", "", "", "", "", f6(h.p_max), f6(h.e_hi),
           "", f6(h.r_hi), "", "", f6(c.e_wc), f6(c.r_wc)]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def summarize(rows):
    """Weighted flagged shares by month and departure hour plus deficit statistics.

    ``rows`` are per-trip dicts (as read from per_trip.csv); only rows with
    status ``ok`` and a heat result count.
    """
    items = []
    for r in rows:
        if r.get("status") != "ok" or r.get("e_hi") in (None, ""):
            continue
        items.append((datetime.fromisoformat(r["depart"]), float(r["weight"]), float(r["r_hi"]) >= 1,
                      float(r["e_hi"])))
    total_w = sum(w for _, w, _, _ in items)

    def group(keyf):
        acc = defaultdict(lambda: [0.0, 0.0, 0])
        for t, w, flag, _ in items:
            a = acc[keyf(t)]
            a[0] += w
            a[1] += w if flag else 0.0
            a[2] += 1
        return [{"key": k, "trips": a[2], "weight": a[0], "flagged_weight": a[1],
                 "flagged_pct": 100.0 * a[1] / a[0] if a[0] > 0 else 0.0} for k, a in sorted(acc.items())]

    flagged_w = sum(w for _, w, f, _ in items if f)
    out = {
        "trips": len(items),
        "weight": total_w,
        "flagged_weight": flagged_w,
        "flagged_pct": 100.0 * flagged_w / total_w if total_w > 0 else 0.0,
        "by_month": group(lambda t: t.strftime("%Y-%m")),
        "by_hour": group(lambda t: f"{t.hour:02d}"),
        "deficit": _weighted_stats([(e, w) for _, w, _, e in items]),
    }
    return out


def _weighted_stats(pairs):
    pairs = sorted(p for p in pairs if p[1] > 0)
    total = sum(w for _, w in pairs)
    if total <= 0:
        return {"mean": None, "median": None, "sd": None}
    mean = sum(x * w for x, w in pairs) / total
    var = sum(w * (x - mean) ** 2 for x, w in pairs) / total
    run = 0.0
    median = pairs[-1][0]
    for x, w in pairs:
        run += w
        if run >= total / 2:
            median = x
            break
    return {"mean": mean, "median": median, "sd": math.sqrt(var)}


def format_summary(s):
    lines = [f"trips {s['trips']}  weight {s['weight']:.3f}  flagged {s['flagged_pct']:.2f}%"]
    d = s["deficit"]
    if d["mean"] is not None:
        lines.append(f"rest deficit (min): mean {d['mean']:.3f}  median {d['median']:.3f}  sd {d['sd']:.3f}")
    for name, rows in (("month", s["by_month"]), ("hour", s["by_hour"])):
        if rows:
            lines.append(f"{name:<8}{'trips':>7}{'weight':>12}{'flagged %':>11}")
        for r in rows:
            lines.append(f"{r['key']:<8}{r['trips']:>7}{r['weight']:>12.3f}{r['flagged_pct']:>11.2f}")
    return "\n".join(lines)


def read_per_trip(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run(cfg, stage="run"):
    """Run the batch up to ``stage`` and write its outputs; returns the manifest."""
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    ctx = load_context(cfg, stage)
    try:
        rows = read_trip_rows(cfg.trips)
    except (RecordError, OSError) as exc:
        raise InputError(str(exc)) from exc
    outcomes = process_all(cfg, stage, rows, ctx)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name, writer):
        writer(out / name)
        written.append(name)

    ok = [o for o in outcomes if o.status == "ok"]

    def write_trajs(path):
        with open(path, "w") as fh:
            for o in ok:
                fh.write(json.dumps(o.trajectory.to_dict(), sort_keys=True) + "\n")

    emit("trajectories.jsonl", write_trajs)
    per_trip = [per_trip_row(o) for o in outcomes]
    emit("per_trip.csv", lambda p: _write_csv(p, PER_TRIP_COLUMNS, per_trip))
    summary = None
    if stage != "route":
        emit("ledgers.csv", lambda p: _write_csv(p, LEDGER_COLUMNS, (r for o in ok for r in ledger_rows(o))))
        summary = summarize([dict(zip(PER_TRIP_COLUMNS, r)) for r in per_trip])

        def write_summary(path):
            with open(path, "w") as fh:
                json.dump(summary, fh, indent=1, sort_keys=True)
                fh.write("\n")

        emit("summary.json", write_summary)
    if stage in ("score", "run"):
        stats = accumulate(TripImpact(o.trajectory, o.heat, o.record.weight) for o in ok)
        scores, _, _ = prioritize(stats)
        emit("asset_scores.csv", lambda p: write_asset_csv(stats, scores, p))
        emit("asset_scores.geojson", lambda p: write_asset_geojson(stats, scores, ctx.net, p))
    if stage == "compare" or (stage == "run" and cfg.compare):
        report = compare_report([o.compare for o in ok if o.compare is not None], cfg.quantiles)
        emit("compare.csv", lambda p: write_compare_csv(report, p))

    failures = Counter(o.status for o in outcomes if o.status != "ok")
    manifest = {
        "stage": stage,
        "config_hash": cfg.digest(),
        "counts": {
            "records": len(outcomes),
            "ok": len(ok),
            "failed": sum(failures.values()),
            "failures": dict(sorted(failures.items())),
            "flagged": sum(1 for o in ok if o.heat is not None and o.heat.r_hi),
        },
        "files": {name: _sha256(out / name) for name in written},
    }
    if summary is not None:
        manifest["flagged_pct"] = summary["flagged_pct"]
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest
