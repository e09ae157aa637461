"""Comparison methods: static shortest path and additive heat-category scoring.

The static graph has the origin, the destination and every stop as nodes.
Edges are access/egress legs (same candidate rule as the timetable router),
footpaths, and one ride edge per consecutive stop pair of each stop pattern
costed at the fastest scheduled run time. No timetable is consulted, so the
resulting trajectory has no waits.
"""
import csv
import heapq
import math
from dataclasses import dataclass, field
from datetime import timedelta

import numpy as np

from .activity import CONDITIONED_MODES
from .exposure import DT_MIN, ExposureError, period_samples, read_table_rows
from .thermal import heat_index_f
from .transit.raptor import NoItinerary, RoutingParams
from .transit.trace import Period, Trajectory

ORIGIN = (0, "")
DEST = (2, "")

METHODS = ("dynamic", "spatiotemporal_additive", "baseline_additive")
COMPARE_COLUMNS = ("trip_id", "method", "total_time_min", "score", "flagged")


class CategoryError(ValueError):
    pass


@dataclass(frozen=True)
class StaticLeg:
    kind: str  # access | ride | transfer | egress | direct
    mode: str
    duration_s: int
    path: tuple  # ((offset_s, x, y), ...)
    from_stop: str = None
    to_stop: str = None
    route_id: str = None
    footpath_id: str = None
    length_m: float = 0.0


@dataclass(frozen=True)
class StaticPath:
    legs: tuple

    @property
    def duration_s(self):
        return sum(leg.duration_s for leg in self.legs)


def _stop(s):
    return (1, s)


def static_graph(net, params=None, transfer_mode="walk"):
    """Adjacency for the stop subgraph: node -> [(cost_s, neighbor, edge)]."""
    params = params or RoutingParams()
    adj = {}
    hops = {}
    for pat in net.patterns:
        for pos in range(len(pat.stops) - 1):
            run = min(t.arrivals[pos + 1] - t.departures[pos] for t in pat.trips)
            key = (pat.stops[pos], pat.stops[pos + 1], pat.route_id)
            if key not in hops or run < hops[key]:
                hops[key] = run
    for (a, b, rid), run in sorted(hops.items()):
        adj.setdefault(_stop(a), []).append((run, _stop(b), ("ride", rid)))
    for fp in sorted(net.footpaths.values(), key=lambda f: f.id):
        cost = params.transfer_s(fp, transfer_mode)
        adj.setdefault(_stop(fp.a), []).append((cost, _stop(fp.b), ("foot", fp.id)))
        adj.setdefault(_stop(fp.b), []).append((cost, _stop(fp.a), ("foot", fp.id)))
    return adj


def dijkstra_route(net, origin, dest, access_mode="walk", egress_mode="walk", transfer_mode="walk",
                   params=None, graph=None) -> StaticPath:
    """Static shortest path; equal costs resolve toward the smaller node id."""
    params = params or RoutingParams()
    graph = graph if graph is not None else static_graph(net, params, transfer_mode)
    ox, oy = map(float, origin)
    dx, dy = map(float, dest)
    extra = {ORIGIN: []}
    for s, d in net.nearest_stops(ox, oy, params.access_candidates, params.max_access_m.get(access_mode, math.inf)):
        extra[ORIGIN].append((params.travel_s(access_mode, d), _stop(s), ("access", d)))
    egress = {}
    for s, d in net.nearest_stops(dx, dy, params.access_candidates, params.max_access_m.get(egress_mode, math.inf)):
        egress[_stop(s)] = (params.travel_s(egress_mode, d), DEST, ("egress", d))
    direct = math.hypot(dx - ox, dy - oy)
    if direct <= params.max_access_m.get(access_mode, math.inf):
        extra[ORIGIN].append((params.travel_s(access_mode, direct), DEST, ("direct", direct)))

    dist = {ORIGIN: 0}
    prev = {}
    heap = [(0, ORIGIN)]
    done = set()
    while heap:
        cost, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == DEST:
            break
        edges = extra.get(node) or graph.get(node, ())
        if node in egress:
            edges = list(edges) + [egress[node]]
        for w, nxt, edge in edges:
            c = cost + w
            if c < dist.get(nxt, math.inf):
                dist[nxt] = c
                prev[nxt] = (node, w, edge)
                heapq.heappush(heap, (c, nxt))
    if DEST not in done:
        raise NoItinerary(f"no static path from {origin} to {dest}")

    steps = []
    node = DEST
    while node != ORIGIN:
        p, w, edge = prev[node]
        steps.append((p, node, w, edge))
        node = p
    steps.reverse()
    return StaticPath(tuple(_legs(net, steps, (ox, oy), (dx, dy), access_mode, egress_mode, transfer_mode)))


def _xy(net, node, origin, dest):
    if node == ORIGIN:
        return origin
    if node == DEST:
        return dest
    return net.xy(node[1])


def _legs(net, steps, origin, dest, access_mode, egress_mode, transfer_mode):
    legs = []
    i = 0
    while i < len(steps):
        a, b, w, edge = steps[i]
        xa, xb = _xy(net, a, origin, dest), _xy(net, b, origin, dest)
        kind = edge[0]
        if kind == "ride":
            rid = edge[1]
            path = [(0, *xa), (w, *xb)]
            stops = [a[1], b[1]]
            total = w
            while i + 1 < len(steps) and steps[i + 1][3] == ("ride", rid):
                i += 1
                _, nb, nw, _ = steps[i]
                total += nw
                path.append((total, *net.xy(nb[1])))
                stops.append(nb[1])
            legs.append(StaticLeg("ride", "transit", total, tuple(path), stops[0], stops[-1], route_id=rid))
        else:
            mode = {"access": access_mode, "direct": access_mode, "egress": egress_mode}.get(kind, transfer_mode)
            length = edge[1] if kind != "foot" else net.footpaths[edge[1]].length_m
            legs.append(StaticLeg("transfer" if kind == "foot" else kind, mode, w, ((0, *xa), (w, *xb)),
                                  a[1] if a[0] == 1 else None, b[1] if b[0] == 1 else None,
                                  footpath_id=edge[1] if kind == "foot" else None, length_m=length))
        i += 1
    return legs


def baseline_trajectory(path: StaticPath, depart, trip_id="") -> Trajectory:
    periods = []
    t = depart
    for leg in path.legs:
        if leg.duration_s == 0:
            continue
        asset = (None, None)
        if leg.kind == "transfer":
            asset = ("footpath", leg.footpath_id)
        elif leg.kind == "access":
            asset = ("footpath", f"ingress:{leg.to_stop}")
        elif leg.kind == "egress":
            asset = ("footpath", f"egress:{leg.from_stop}")
        conditioned = leg.kind == "ride" or leg.mode in CONDITIONED_MODES
        periods.append(Period(t, leg.duration_s, leg.mode, conditioned, leg.kind, leg.path,
                              asset[0], asset[1], leg.length_m))
        t += timedelta(seconds=leg.duration_s)
    return Trajectory(trip_id, depart, tuple(periods))


class HeatCategoryTable:
    """Contiguous heat-index bands ``[low, high)`` with a per-minute factor."""

    def __init__(self, rows):
        rows = sorted((float(lo), float(hi), str(cat), float(f)) for lo, hi, cat, f in rows)
        if not rows:
            raise CategoryError("heat category table is empty")
        for a, b in zip(rows, rows[1:]):
            if a[1] != b[0]:
                raise CategoryError(f"category bands not contiguous at {a[1]} F")
            if b[3] < a[3]:
                raise CategoryError("category factors must not decrease with heat index")
        if rows[0][0] != -math.inf or rows[-1][1] != math.inf:
            raise CategoryError("category bands must cover every heat index")
        self.rows = rows
        self._lows = np.array([r[0] for r in rows])
        self._factors = np.array([r[3] for r in rows])

    @classmethod
    def from_csv(cls, path=None):
        return cls([(r["hi_low_f"], r["hi_high_f"], r["category"], r["factor"])
                    for r in read_table_rows(path, "heat_categories.csv")])

    def index_many(self, t_hi):
        return np.searchsorted(self._lows, np.asarray(t_hi, dtype=float), side="right") - 1

    def factors(self, t_hi):
        return self._factors[self.index_many(t_hi)]

    def category(self, t_hi):
        return self.rows[int(self.index_many([t_hi])[0])][2]


@dataclass
class AdditiveScore:
    trip_id: str
    categories: list = field(default_factory=list)
    increments: list = field(default_factory=list)
    total: float = 0.0
    duration_min: float = 0.0


def additive_exposure(traj, tfield, categories: HeatCategoryTable, nws=True) -> AdditiveScore:
    """Per-second category factor summed over unconditioned periods."""
    out = AdditiveScore(traj.trip_id, duration_min=traj.duration_s / 60.0)
    for p in traj.periods:
        if p.conditioned:
            out.categories.append(None)
            out.increments.append(0.0)
            continue
        try:
            temp, rh, _ = period_samples(p, tfield)
        except ValueError as exc:
            raise ExposureError(f"trip {traj.trip_id}: {exc}") from None
        hi = heat_index_f(temp, rh, nws=nws)
        inc = float(np.sum(categories.factors(hi)) * DT_MIN)
        out.categories.append(categories.category(float(np.mean(hi))) if hi.size else None)
        out.increments.append(inc)
    out.total = float(sum(out.increments))
    return out


@dataclass(frozen=True)
class ComparisonEntry:
    trip_id: str
    weight: float
    dynamic_time_min: float
    dynamic_score: float
    dynamic_flagged: bool
    st_score: float
    baseline_time_min: float
    baseline_score: float


@dataclass
class CompareRow:
    trip_id: str
    method: str
    total_time_min: float
    score: float
    flagged: bool


@dataclass
class CompareReport:
    rows: list = field(default_factory=list)
    edges: tuple = ()
    flagged_pct: dict = field(default_factory=dict)
    time_delta_min: dict = field(default_factory=dict)


def quantile_edges(scores, quantiles=(0.25, 0.5, 0.75)):
    if len(scores) == 0:
        return ()
    return tuple(float(v) for v in np.quantile(np.asarray(scores, dtype=float), quantiles))


def risk_level(score, edges):
    """Number of quantile edges at or below the score (0 .. len(edges))."""
    return sum(1 for e in edges if score >= e)


def _additive_flag(score, edges):
    return bool(edges) and score > 0 and risk_level(score, edges) == len(edges)


def compare_report(entries, quantiles=(0.25, 0.5, 0.75)) -> CompareReport:
    """Three-way report. Quantile edges come from the spatio-temporal scores
    and are applied unchanged to the baseline, so both additive methods are
    judged on one scale."""
    entries = sorted(entries, key=lambda e: e.trip_id)
    report = CompareReport()
    if not entries:
        return report
    edges = quantile_edges([e.st_score for e in entries], quantiles)
    report.edges = edges
    flagged_w = dict.fromkeys(METHODS, 0.0)
    total_w = sum(e.weight for e in entries)
    for e in entries:
        triple = (
            CompareRow(e.trip_id, "dynamic", e.dynamic_time_min, e.dynamic_score, bool(e.dynamic_flagged)),
            CompareRow(e.trip_id, "spatiotemporal_additive", e.dynamic_time_min, e.st_score,
                       _additive_flag(e.st_score, edges)),
            CompareRow(e.trip_id, "baseline_additive", e.baseline_time_min, e.baseline_score,
                       _additive_flag(e.baseline_score, edges)),
        )
        for row in triple:
            if row.flagged:
                flagged_w[row.method] += e.weight
        report.rows.extend(triple)
        report.time_delta_min[e.trip_id] = e.dynamic_time_min - e.baseline_time_min
    report.flagged_pct = {m: (100.0 * flagged_w[m] / total_w if total_w > 0 else 0.0) for m in METHODS}
    return report


def write_compare_csv(report, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARE_COLUMNS)
        for r in report.rows:
            w.writerow([r.trip_id, r.method, f"{r.total_time_min:.6f}", f"{r.score:.6f}", int(r.flagged)])
