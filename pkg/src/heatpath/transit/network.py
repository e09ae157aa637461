"""GTFS static feed loading and the in-memory transit network."""
import csv
import io
import math
import zipfile
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path

import numpy as np

EARTH_RADIUS_M = 6371008.8
REQUIRED_FILES = ("stops.txt", "routes.txt", "trips.txt", "stop_times.txt")


class GTFSError(ValueError):
    def __init__(self, message, file=None, line=None):
        where = ""
        if file:
            where = f"{file}:{line}: " if line is not None else f"{file}: "
        super().__init__(where + message)
        self.file = file
        self.line = line


@dataclass(frozen=True)
class Projection:
    """Local equirectangular projection about (lat0, lon0), meters."""

    lat0: float
    lon0: float

    def forward(self, lat, lon):
        k = math.cos(math.radians(self.lat0))
        x = EARTH_RADIUS_M * math.radians(lon - self.lon0) * k
        y = EARTH_RADIUS_M * math.radians(lat - self.lat0)
        return x, y

    def inverse(self, x, y):
        k = math.cos(math.radians(self.lat0))
        lat = self.lat0 + math.degrees(y / EARTH_RADIUS_M)
        lon = self.lon0 + math.degrees(x / (EARTH_RADIUS_M * k))
        return lat, lon


@dataclass(frozen=True)
class Stop:
    id: str
    name: str
    x: float
    y: float


@dataclass(frozen=True)
class Route:
    id: str
    short_name: str = ""
    route_type: int = 3


@dataclass(frozen=True)
class Trip:
    id: str
    route_id: str
    service_id: str
    stops: tuple
    arrivals: tuple
    departures: tuple


@dataclass(frozen=True)
class Footpath:
    """Undirected walking link between two stops; ``a < b`` lexically."""

    id: str
    a: str
    b: str
    length_m: float
    min_time_s: int = 0


@dataclass
class Service:
    id: str
    start: date = None
    end: date = None
    weekdays: tuple = (False,) * 7
    added: set = field(default_factory=set)
    removed: set = field(default_factory=set)

    def active(self, day: date) -> bool:
        if day in self.removed:
            return False
        if day in self.added:
            return True
        if self.start is None:
            return False
        return self.start <= day <= self.end and self.weekdays[day.weekday()]


@dataclass(frozen=True)
class Pattern:
    """Trips sharing one exact stop sequence."""

    index: int
    route_id: str
    stops: tuple
    trips: tuple


def footpath_id(a, b):
    a, b = sorted((a, b))
    return f"{a}|{b}"


class TransitNetwork:
    def __init__(self, stops, routes, trips, services, footpaths, projection=None):
        self.stops = dict(stops)
        self.routes = dict(routes)
        self.trips = dict(trips)
        self.services = dict(services)
        self.footpaths = dict(footpaths)
        self.projection = projection
        self.stop_ids = tuple(sorted(self.stops))
        self._xy = np.array([[self.stops[s].x, self.stops[s].y] for s in self.stop_ids],
                            dtype=float).reshape(-1, 2)
        self.neighbors = defaultdict(list)
        for fp in sorted(self.footpaths.values(), key=lambda f: f.id):
            self.neighbors[fp.a].append((fp.b, fp))
            self.neighbors[fp.b].append((fp.a, fp))
        groups = defaultdict(list)
        for t in sorted(self.trips.values(), key=lambda t: t.id):
            groups[(t.route_id, t.stops)].append(t)
        self.patterns = []
        for i, key in enumerate(sorted(groups)):
            ts = sorted(groups[key], key=lambda t: (t.departures[0], t.id))
            self.patterns.append(Pattern(i, key[0], key[1], tuple(ts)))
        self.stop_patterns = defaultdict(list)
        for p in self.patterns:
            for pos, s in enumerate(p.stops):
                self.stop_patterns[s].append((p.index, pos))
        self._active_cache = {}

    def active_trip_ids(self, day: date):
        hit = self._active_cache.get(day)
        if hit is None:
            hit = frozenset(t.id for t in self.trips.values()
                            if self.services[t.service_id].active(day))
            self._active_cache[day] = hit
        return hit

    def service_span(self, day: date):
        active = self.active_trip_ids(day)
        if not active:
            return None
        return (min(self.trips[t].departures[0] for t in active),
                max(self.trips[t].arrivals[-1] for t in active))

    def xy(self, stop_id):
        s = self.stops[stop_id]
        return s.x, s.y

    def nearest_stops(self, x, y, k, max_dist=math.inf):
        """Up to ``k`` stops ordered by (distance, stop id)."""
        if not self.stop_ids:
            return []
        d = np.hypot(self._xy[:, 0] - x, self._xy[:, 1] - y)
        order = np.lexsort((np.arange(len(d)), d))
        out = []
        for i in order[:k]:
            if d[i] <= max_dist:
                out.append((self.stop_ids[i], float(d[i])))
        return out

    def distance(self, a, b):
        sa, sb = self.stops[a], self.stops[b]
        return math.hypot(sa.x - sb.x, sa.y - sb.y)


def parse_time(value):
    """GTFS HH:MM:SS (hours may exceed 23) to seconds after midnight."""
    parts = value.strip().split(":")
    if len(parts) != 3:
        raise ValueError(f"bad GTFS time {value!r}")
    h, m, s = (int(p) for p in parts)
    if not (0 <= m < 60 and 0 <= s < 60 and h >= 0):
        raise ValueError(f"bad GTFS time {value!r}")
    return h * 3600 + m * 60 + s


def format_time(seconds):
    seconds = int(seconds)
    return f"{seconds // 3600:02d}:{seconds % 3600 // 60:02d}:{seconds % 60:02d}"


def _parse_date(value):
    return datetime.strptime(value.strip(), "%Y%m%d").date()


class _Feed:
    """Read access to a GTFS directory or zip archive."""

    def __init__(self, path):
        self.path = Path(path)
        self._zip = None
        if self.path.is_file():
            try:
                self._zip = zipfile.ZipFile(self.path)
            except zipfile.BadZipFile:
                raise GTFSError("not a GTFS directory or zip archive", str(path)) from None
            self._names = {Path(n).name: n for n in self._zip.namelist()}
        elif self.path.is_dir():
            self._names = {p.name: p for p in self.path.iterdir()}
        else:
            raise GTFSError("feed path does not exist", str(path))

    def has(self, name):
        return name in self._names

    def rows(self, name):
        if self._zip is not None:
            text = self._zip.read(self._names[name]).decode("utf-8-sig")
        else:
            text = Path(self._names[name]).read_text(encoding="utf-8-sig")
        reader = csv.DictReader(io.StringIO(text))
        for lineno, row in enumerate(reader, start=2):
            yield lineno, {k.strip(): (v or "").strip() for k, v in row.items() if k is not None}


def _require(row, key, name, line):
    v = row.get(key, "")
    if v == "":
        raise GTFSError(f"missing {key}", name, line)
    return v


def synthesize_footpaths(stops, radius_m):
    """Footpaths between every pair of stops within ``radius_m``."""
    ids = sorted(stops)
    if not ids:
        return {}
    xy = np.array([[stops[s].x, stops[s].y] for s in ids])
    out = {}
    for i in range(len(ids)):
        d = np.hypot(xy[i + 1:, 0] - xy[i, 0], xy[i + 1:, 1] - xy[i, 1])
        for j in np.nonzero((d <= radius_m) & (d > 0))[0]:
            a, b = ids[i], ids[i + 1 + j]
            fid = footpath_id(a, b)
            out[fid] = Footpath(fid, a, b, float(d[j]))
    return out


def load_gtfs(path, footpath_radius_m=500.0, projection=None) -> TransitNetwork:
    """Parse and validate a GTFS feed.

    Stop coordinates come from optional ``stop_x``/``stop_y`` columns
    (projected meters) or from ``stop_lat``/``stop_lon`` through
    ``projection`` (default: equirectangular about the mean stop position).
    """
    feed = _Feed(path)
    for name in REQUIRED_FILES:
        if not feed.has(name):
            raise GTFSError("mandatory file missing", name)
    if not (feed.has("calendar.txt") or feed.has("calendar_dates.txt")):
        raise GTFSError("mandatory file missing (calendar.txt or calendar_dates.txt)", "calendar.txt")

    raw_stops = []
    for line, row in feed.rows("stops.txt"):
        sid = _require(row, "stop_id", "stops.txt", line)
        if row.get("location_type", "") not in ("", "0"):
            continue
        try:
            if row.get("stop_x", "") != "" and row.get("stop_y", "") != "":
                raw_stops.append((sid, row.get("stop_name", ""), "xy",
                                  float(row["stop_x"]), float(row["stop_y"]), line))
            else:
                raw_stops.append((sid, row.get("stop_name", ""), "ll",
                                  float(_require(row, "stop_lat", "stops.txt", line)),
                                  float(_require(row, "stop_lon", "stops.txt", line)), line))
        except ValueError as exc:
            raise GTFSError(f"bad coordinate: {exc}", "stops.txt", line) from None
    if projection is None and any(r[2] == "ll" for r in raw_stops):
        lls = [(r[3], r[4]) for r in raw_stops if r[2] == "ll"]
        projection = Projection(sum(a for a, _ in lls) / len(lls), sum(b for _, b in lls) / len(lls))
    stops = {}
    for sid, name, kind, a, b, line in raw_stops:
        if sid in stops:
            raise GTFSError(f"duplicate stop_id {sid}", "stops.txt", line)
        x, y = (a, b) if kind == "xy" else projection.forward(a, b)
        stops[sid] = Stop(sid, name, x, y)

    routes = {}
    for line, row in feed.rows("routes.txt"):
        rid = _require(row, "route_id", "routes.txt", line)
        try:
            rtype = int(row.get("route_type") or 3)
        except ValueError:
            raise GTFSError("bad route_type", "routes.txt", line) from None
        routes[rid] = Route(rid, row.get("route_short_name", ""), rtype)

    services = {}
    if feed.has("calendar.txt"):
        days = ("monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday")
        for line, row in feed.rows("calendar.txt"):
            sid = _require(row, "service_id", "calendar.txt", line)
            try:
                services[sid] = Service(sid, _parse_date(_require(row, "start_date", "calendar.txt", line)),
                                        _parse_date(_require(row, "end_date", "calendar.txt", line)),
                                        tuple(row.get(d, "0") == "1" for d in days))
            except ValueError as exc:
                raise GTFSError(str(exc), "calendar.txt", line) from None
    if feed.has("calendar_dates.txt"):
        for line, row in feed.rows("calendar_dates.txt"):
            sid = _require(row, "service_id", "calendar_dates.txt", line)
            svc = services.setdefault(sid, Service(sid))
            try:
                day = _parse_date(_require(row, "date", "calendar_dates.txt", line))
            except ValueError as exc:
                raise GTFSError(str(exc), "calendar_dates.txt", line) from None
            kind = row.get("exception_type")
            if kind == "1":
                svc.added.add(day)
            elif kind == "2":
                svc.removed.add(day)
            else:
                raise GTFSError(f"bad exception_type {kind!r}", "calendar_dates.txt", line)

    trip_meta = {}
    for line, row in feed.rows("trips.txt"):
        tid = _require(row, "trip_id", "trips.txt", line)
        rid = _require(row, "route_id", "trips.txt", line)
        sid = _require(row, "service_id", "trips.txt", line)
        if rid not in routes:
            raise GTFSError(f"trip {tid} references unknown route_id {rid}", "trips.txt", line)
        if sid not in services:
            raise GTFSError(f"trip {tid} references unknown service_id {sid}", "trips.txt", line)
        trip_meta[tid] = (rid, sid, line)

    stop_times = defaultdict(list)
    for line, row in feed.rows("stop_times.txt"):
        tid = _require(row, "trip_id", "stop_times.txt", line)
        stop = _require(row, "stop_id", "stop_times.txt", line)
        if tid not in trip_meta:
            raise GTFSError(f"unknown trip_id {tid}", "stop_times.txt", line)
        if stop not in stops:
            raise GTFSError(f"unknown stop_id {stop}", "stop_times.txt", line)
        try:
            seq = int(_require(row, "stop_sequence", "stop_times.txt", line))
            arr = parse_time(row["arrival_time"]) if row.get("arrival_time") else None
            dep = parse_time(row["departure_time"]) if row.get("departure_time") else None
        except ValueError as exc:
            raise GTFSError(str(exc), "stop_times.txt", line) from None
        stop_times[tid].append((seq, stop, arr, dep, line))
    if not stop_times:
        raise GTFSError("no timetabled service", "stop_times.txt")

    trips = {}
    for tid, rows in stop_times.items():
        rows.sort()
        trips[tid] = _build_trip(tid, trip_meta[tid][0], trip_meta[tid][1], rows)

    footpaths = {}
    if feed.has("transfers.txt"):
        for line, row in feed.rows("transfers.txt"):
            a = _require(row, "from_stop_id", "transfers.txt", line)
            b = _require(row, "to_stop_id", "transfers.txt", line)
            if a not in stops or b not in stops:
                raise GTFSError(f"transfer references unknown stop {a}/{b}", "transfers.txt", line)
            if a == b or row.get("transfer_type") == "3":
                continue
            length = math.hypot(stops[a].x - stops[b].x, stops[a].y - stops[b].y)
            if not length > 0:
                continue
            t = int(row.get("min_transfer_time") or 0)
            fid = footpath_id(a, b)
            prev = footpaths.get(fid)
            lo, hi = sorted((a, b))
            footpaths[fid] = Footpath(fid, lo, hi, length, max(t, prev.min_time_s if prev else 0))
    else:
        footpaths = synthesize_footpaths(stops, footpath_radius_m)
    return TransitNetwork(stops, routes, trips, services, footpaths, projection)


def _build_trip(tid, route_id, service_id, rows):
    seqs = [r[0] for r in rows]
    if len(set(seqs)) != len(seqs):
        raise GTFSError(f"trip {tid} repeats a stop_sequence", "stop_times.txt", rows[0][4])
    if len(rows) < 2:
        raise GTFSError(f"trip {tid} has fewer than two stops", "stop_times.txt", rows[0][4])
    arr = [r[2] if r[2] is not None else r[3] for r in rows]
    dep = [r[3] if r[3] is not None else r[2] for r in rows]
    if arr[0] is None or arr[-1] is None:
        raise GTFSError(f"trip {tid} lacks times at its first or last stop", "stop_times.txt", rows[0][4])
    # Untimed intermediate stops: interpolate linearly by position.
    known = [i for i, a in enumerate(arr) if a is not None]
    for lo, hi in zip(known, known[1:]):
        for i in range(lo + 1, hi):
            v = dep[lo] + (arr[hi] - dep[lo]) * (i - lo) // (hi - lo)
            arr[i] = dep[i] = v
    for i, r in enumerate(rows):
        if dep[i] < arr[i]:
            raise GTFSError(f"trip {tid}: departure before arrival at stop {r[1]}",
                            "stop_times.txt", r[4])
        if i and arr[i] < dep[i - 1]:
            raise GTFSError(f"trip {tid}: stop_times not monotone at stop {r[1]}",
                            "stop_times.txt", r[4])
    return Trip(tid, route_id, service_id, tuple(r[1] for r in rows), tuple(arr), tuple(dep))


def build_network(stops, trips, footpath_radius_m=500.0, footpaths=None, service_days=None):
    """Assemble a network from plain tables (used by fixtures and tests).

    ``stops``: iterable of (id, x, y); ``trips``: iterable of
    (trip_id, route_id, [(stop_id, arrival_s, departure_s), ...]).
    All trips run on every day unless ``service_days`` (a set of dates) is given.
    """
    stop_map = {sid: Stop(sid, sid, float(x), float(y)) for sid, x, y in stops}
    routes, trip_map = {}, {}
    for tid, rid, times in trips:
        routes.setdefault(rid, Route(rid, rid))
        rows = [(i, s, a, d, i + 2) for i, (s, a, d) in enumerate(times)]
        trip_map[tid] = _build_trip(tid, rid, "all", rows)
    if service_days is None:
        svc = Service("all", date(1900, 1, 1), date(2999, 12, 31), (True,) * 7)
    else:
        svc = Service("all", added=set(service_days))
    if footpaths is None:
        fps = synthesize_footpaths(stop_map, footpath_radius_m)
    else:
        fps = {}
        for a, b, length in footpaths:
            fid = footpath_id(a, b)
            lo, hi = sorted((a, b))
            fps[fid] = Footpath(fid, lo, hi, float(length))
    return TransitNetwork(stop_map, routes, trip_map, {"all": svc}, fps)


def write_gtfs(net: TransitNetwork, directory, start="20190101", end="20191231",
               with_transfers=False):
    """Write a network as a minimal GTFS directory with stop_x/stop_y columns.

    Footpaths go to transfers.txt only with ``with_transfers``; otherwise a
    reader re-synthesizes them from the stop radius.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)

    def dump(name, header, rows):
        with open(d / name, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    dump("agency.txt", ["agency_id", "agency_name", "agency_url", "agency_timezone"],
         [["A", "Fixture Transit", "https://example.org", "America/New_York"]])
    dump("stops.txt", ["stop_id", "stop_name", "stop_lat", "stop_lon", "stop_x", "stop_y"],
         [[s.id, s.name, "", "", repr(s.x), repr(s.y)] for s in sorted(net.stops.values(), key=lambda s: s.id)])
    dump("routes.txt", ["route_id", "route_short_name", "route_type"],
         [[r.id, r.short_name, r.route_type] for r in sorted(net.routes.values(), key=lambda r: r.id)])
    dump("trips.txt", ["route_id", "service_id", "trip_id"],
         [[t.route_id, "all", t.id] for t in sorted(net.trips.values(), key=lambda t: t.id)])
    rows = []
    for t in sorted(net.trips.values(), key=lambda t: t.id):
        for i, s in enumerate(t.stops):
            rows.append([t.id, format_time(t.arrivals[i]), format_time(t.departures[i]), s, i + 1])
    dump("stop_times.txt", ["trip_id", "arrival_time", "departure_time", "stop_id", "stop_sequence"], rows)
    dump("calendar.txt", ["service_id", "monday", "tuesday", "wednesday", "thursday", "friday",
                          "saturday", "sunday", "start_date", "end_date"],
         [["all", 1, 1, 1, 1, 1, 1, 1, start, end]])
    if with_transfers:
        dump("transfers.txt", ["from_stop_id", "to_stop_id", "transfer_type", "min_transfer_time"],
             [[f.a, f.b, 2, f.min_time_s] for f in sorted(net.footpaths.values(), key=lambda f: f.id)])
