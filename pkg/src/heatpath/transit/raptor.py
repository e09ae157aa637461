"""Round-based earliest-arrival routing (RAPTOR) with access, egress and footpaths.

Journeys have the shape::

    access -> (wait -> ride -> [transfer walk])+ -> egress     or     direct

Round k >= 1 holds the best arrival at every stop using between one and k
rides. A transfer walk may only follow a ride, so footpaths never chain.
"""
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta

DEFAULT_SPEEDS = {
    "walk": 1.25,
    "bike": 4.0,
    "wheelchair": 1.0,
    "micromobility": 4.0,
    "auto": 10.0,
}
DEFAULT_MAX_ACCESS_M = {
    "walk": 1000.0,
    "bike": 3000.0,
    "wheelchair": 800.0,
    "micromobility": 3000.0,
    "auto": 15000.0,
}


class RoutingError(ValueError):
    pass


class NoItinerary(RoutingError):
    """No journey reaches the destination under the routing rules."""


@dataclass(frozen=True)
class RoutingParams:
    speeds: dict = field(default_factory=lambda: dict(DEFAULT_SPEEDS))
    max_access_m: dict = field(default_factory=lambda: dict(DEFAULT_MAX_ACCESS_M))
    access_candidates: int = 5
    max_transfers: int = 4

    @property
    def max_rides(self):
        return self.max_transfers + 1

    def travel_s(self, mode, distance_m):
        try:
            speed = self.speeds[mode]
        except KeyError:
            raise RoutingError(f"no speed configured for mode {mode!r}") from None
        if not speed > 0:
            raise RoutingError(f"speed for {mode!r} must be positive")
        return int(math.ceil(distance_m / speed - 1e-9)) if distance_m > 0 else 0

    def transfer_s(self, footpath, mode="walk"):
        return max(self.travel_s(mode, footpath.length_m), footpath.min_time_s)


@dataclass(frozen=True)
class Leg:
    kind: str  # access | wait | ride | transfer | egress | direct
    mode: str
    start_s: int
    end_s: int
    from_xy: tuple
    to_xy: tuple
    from_stop: str = None
    to_stop: str = None
    trip_id: str = None
    board_pos: int = None
    alight_pos: int = None
    footpath_id: str = None
    length_m: float = 0.0

    @property
    def duration_s(self):
        return self.end_s - self.start_s


@dataclass(frozen=True)
class Itinerary:
    service_date: date
    depart_s: int
    arrive_s: int
    legs: tuple

    @property
    def n_rides(self):
        return sum(1 for leg in self.legs if leg.kind == "ride")

    @property
    def n_transfers(self):
        return max(self.n_rides - 1, 0)

    def at(self, seconds) -> datetime:
        return datetime.combine(self.service_date, datetime.min.time()) + timedelta(seconds=seconds)

    @property
    def depart(self):
        return self.at(self.depart_s)

    @property
    def arrive(self):
        return self.at(self.arrive_s)


def seconds_of_day(t: datetime):
    return t.hour * 3600 + t.minute * 60 + t.second


def plan_trip(net, origin, dest, depart: datetime, access_mode="walk", egress_mode="walk",
              transfer_mode="walk", params: RoutingParams = None, max_rides=None) -> Itinerary:
    """Earliest-arrival itinerary; raises :class:`NoItinerary` when none exists.

    Equal arrivals prefer fewer rides, then the lexically smaller egress stop;
    a direct trip wins any tie with transit.
    """
    params = params or RoutingParams()
    rides_cap = params.max_rides if max_rides is None else max_rides
    day = depart.date()
    t0 = seconds_of_day(depart)
    ox, oy = map(float, origin)
    dx, dy = map(float, dest)
    k_near = params.access_candidates

    access = {}
    for s, dist in net.nearest_stops(ox, oy, k_near, params.max_access_m.get(access_mode, math.inf)):
        access[s] = (dist, params.travel_s(access_mode, dist))
    egress = []
    for s, dist in net.nearest_stops(dx, dy, k_near, params.max_access_m.get(egress_mode, math.inf)):
        egress.append((s, dist, params.travel_s(egress_mode, dist)))

    best = None  # (arrive, rides, egress stop)
    direct_dist = math.hypot(dx - ox, dy - oy)
    if direct_dist <= params.max_access_m.get(access_mode, math.inf):
        best = (t0 + params.travel_s(access_mode, direct_dist), 0, "")

    active = net.active_trip_ids(day)
    # labels[k][stop] = (time, rides, source); ride_labels[k][stop] = (time, source)
    labels = [{s: (t0 + dur, 0, ("access",)) for s, (_, dur) in sorted(access.items())}]
    ride_labels = [{}]
    marked = set(labels[0])
    for k in range(1, rides_cap + 1):
        if not marked:
            break
        prev = labels[k - 1]
        # Access labels only seed round 1; later rounds hold ride-based arrivals,
        # so an early walk-in never masks a ride arrival usable for egress.
        cur = {s: (t, n, ("copy",)) for s, (t, n, _) in prev.items()} if k > 1 else {}
        rides = {}
        pidxs = sorted({p for s in marked for p, _ in net.stop_patterns.get(s, ())})
        for pidx in pidxs:
            pat = net.patterns[pidx]
            for ti, trip in enumerate(pat.trips):
                if trip.id not in active:
                    continue
                board = None
                for pos, s in enumerate(pat.stops):
                    if board is not None:
                        arr = trip.arrivals[pos]
                        have = rides.get(s)
                        if have is None or arr < have[0]:
                            rides[s] = (arr, ("ride", pidx, ti, board, pos))
                    else:
                        lab = prev.get(s)
                        if lab is not None and lab[0] <= trip.departures[pos]:
                            board = pos
        marked = set()
        for s in sorted(rides):
            t, src = rides[s]
            if t < cur.get(s, (math.inf,))[0]:
                cur[s] = (t, k, src)
                marked.add(s)
        for s in sorted(rides):
            t = rides[s][0]
            for q, fp in net.neighbors.get(s, ()):
                tq = t + params.transfer_s(fp, transfer_mode)
                if tq < cur.get(q, (math.inf,))[0]:
                    cur[q] = (tq, k, ("foot", s, fp.id))
                    marked.add(q)
        labels.append(cur)
        ride_labels.append(rides)
        for s, _, dur in egress:
            lab = cur.get(s)
            if lab is None:
                continue
            cand = (lab[0] + dur, lab[1], s)
            if best is None or cand < best:
                best = cand

    if best is None:
        raise NoItinerary(f"no itinerary from {origin} to {dest} departing {depart.isoformat()}")
    arrive, n_rides, egress_stop = best
    if n_rides == 0:
        leg = Leg("direct", access_mode, t0, arrive, (ox, oy), (dx, dy), length_m=direct_dist)
        return Itinerary(day, t0, arrive, (leg,))

    legs = _unwind(net, labels, ride_labels, n_rides, egress_stop, (ox, oy), access, access_mode, transfer_mode)
    end = legs[-1].end_s
    dist, dur = next((d, t) for s, d, t in egress if s == egress_stop)
    legs.append(Leg("egress", egress_mode, end, end + dur, net.xy(egress_stop), (dx, dy),
                    from_stop=egress_stop, length_m=dist))
    return Itinerary(day, t0, end + dur, tuple(legs))


def _unwind(net, labels, ride_labels, k, stop, origin_xy, access, access_mode, transfer_mode):
    t, _, src = labels[k][stop]
    while src[0] == "copy":
        k -= 1
        t, _, src = labels[k][stop]
    if src[0] == "access":
        dist, dur = access[stop]
        return [Leg("access", access_mode, t - dur, t, origin_xy, net.xy(stop),
                    to_stop=stop, length_m=dist)]
    if src[0] == "foot":
        from_stop, fid = src[1], src[2]
        legs = _unwind_ride(net, labels, ride_labels, k, ride_labels[k][from_stop][1],
                            origin_xy, access, access_mode, transfer_mode)
        start = legs[-1].end_s
        legs.append(Leg("transfer", transfer_mode, start, t, net.xy(from_stop), net.xy(stop),
                        from_stop=from_stop, to_stop=stop, footpath_id=fid,
                        length_m=net.footpaths[fid].length_m))
        return legs
    return _unwind_ride(net, labels, ride_labels, k, src, origin_xy, access, access_mode, transfer_mode)


def _unwind_ride(net, labels, ride_labels, k, src, origin_xy, access, access_mode, transfer_mode):
    _, pidx, ti, bpos, apos = src
    pat = net.patterns[pidx]
    trip = pat.trips[ti]
    board_stop = pat.stops[bpos]
    legs = _unwind(net, labels, ride_labels, k - 1, board_stop, origin_xy, access, access_mode, transfer_mode)
    ready = legs[-1].end_s
    dep = trip.departures[bpos]
    legs.append(Leg("wait", "wait", ready, dep, net.xy(board_stop), net.xy(board_stop),
                    from_stop=board_stop, to_stop=board_stop))
    legs.append(Leg("ride", "transit", dep, trip.arrivals[apos], net.xy(board_stop),
                    net.xy(pat.stops[apos]), from_stop=board_stop, to_stop=pat.stops[apos],
                    trip_id=trip.id, board_pos=bpos, alight_pos=apos))
    return legs
