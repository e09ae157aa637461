"""Second-by-second trajectories traced from itineraries."""
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from ..activity import CONDITIONED_MODES


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class Period:
    """One activity period of a trajectory.

    ``path`` holds ``(offset_s, x, y)`` breakpoints; positions in between are
    linear, so a wait is a single pinned point and a ride follows its stops.
    """

    start: datetime
    duration_s: int
    mode: str
    conditioned: bool
    kind: str
    path: tuple
    asset_kind: str = None
    asset_id: str = None
    length_m: float = 0.0
    grade_pct: float = 0.0
    transit_trip: str = None

    @property
    def end(self):
        return self.start + timedelta(seconds=self.duration_s)

    @property
    def duration_min(self):
        return self.duration_s / 60.0

    def positions(self, offsets_s):
        ts = np.array([p[0] for p in self.path], dtype=float)
        xs = np.array([p[1] for p in self.path], dtype=float)
        ys = np.array([p[2] for p in self.path], dtype=float)
        offsets_s = np.asarray(offsets_s, dtype=float)
        return np.interp(offsets_s, ts, xs), np.interp(offsets_s, ts, ys)

    def per_second(self):
        """Positions at the start of each whole second of the period."""
        return self.positions(np.arange(self.duration_s))

    def to_dict(self):
        return {
            "start": self.start.isoformat(), "duration_s": self.duration_s, "mode": self.mode,
            "conditioned": self.conditioned, "kind": self.kind,
            "path": [list(p) for p in self.path], "asset_kind": self.asset_kind,
            "asset_id": self.asset_id, "length_m": self.length_m, "grade_pct": self.grade_pct,
            "transit_trip": self.transit_trip,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(datetime.fromisoformat(d["start"]), int(d["duration_s"]), d["mode"],
                   bool(d["conditioned"]), d["kind"], tuple(tuple(p) for p in d["path"]),
                   d.get("asset_kind"), d.get("asset_id"), float(d.get("length_m", 0.0)),
                   float(d.get("grade_pct", 0.0)), d.get("transit_trip"))


@dataclass(frozen=True)
class Trajectory:
    trip_id: str
    depart: datetime
    periods: tuple

    @property
    def arrive(self):
        return self.depart + timedelta(seconds=self.duration_s)

    @property
    def duration_s(self):
        return sum(p.duration_s for p in self.periods)

    def to_dict(self):
        return {"trip_id": self.trip_id, "depart": self.depart.isoformat(),
                "periods": [p.to_dict() for p in self.periods]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["trip_id"], datetime.fromisoformat(d["depart"]),
                   tuple(Period.from_dict(p) for p in d["periods"]))


def simple_period(start, duration_s, mode, xy, kind=None, to_xy=None, asset=(None, None), **kw):
    """Handy constructor: pinned at ``xy`` or straight from ``xy`` to ``to_xy``."""
    end = to_xy if to_xy is not None else xy
    path = ((0, xy[0], xy[1]), (duration_s, end[0], end[1]))
    return Period(start, duration_s, mode, mode in CONDITIONED_MODES, kind or mode, path,
                  asset[0], asset[1], **kw)


def trace_trajectory(net, itinerary, trip_id="") -> Trajectory:
    """One period per leg with non-zero duration."""
    periods = []
    for leg in itinerary.legs:
        if leg.duration_s < 0:
            raise TraceError(f"leg {leg.kind} runs backwards in time")
        if leg.duration_s == 0:
            continue
        start = itinerary.at(leg.start_s)
        for s in (leg.from_stop, leg.to_stop):
            if s is not None and s not in net.stops:
                raise TraceError(f"leg references unknown stop {s}")
        if leg.kind == "ride":
            trip = net.trips.get(leg.trip_id)
            if trip is None:
                raise TraceError(f"leg references unknown trip {leg.trip_id}")
            path = []
            for pos in range(leg.board_pos, leg.alight_pos + 1):
                x, y = net.xy(trip.stops[pos])
                if pos > leg.board_pos:
                    path.append((trip.arrivals[pos] - leg.start_s, x, y))
                if pos < leg.alight_pos:
                    path.append((trip.departures[pos] - leg.start_s, x, y))
            periods.append(Period(start, leg.duration_s, "transit", True, "ride", tuple(path),
                                  transit_trip=trip.id))
            continue
        path = ((0, *leg.from_xy), (leg.duration_s, *leg.to_xy))
        asset = (None, None)
        if leg.kind == "wait":
            asset = ("station", leg.from_stop)
        elif leg.kind == "transfer":
            asset = ("footpath", leg.footpath_id)
        elif leg.kind == "access":
            asset = ("footpath", f"ingress:{leg.to_stop}")
        elif leg.kind == "egress":
            asset = ("footpath", f"egress:{leg.from_stop}")
        periods.append(Period(start, leg.duration_s, leg.mode, leg.mode in CONDITIONED_MODES,
                              leg.kind, path, asset[0], asset[1], leg.length_m))
    traj = Trajectory(trip_id, itinerary.depart, tuple(periods))
    if traj.duration_s != itinerary.arrive_s - itinerary.depart_s:
        raise TraceError("trajectory durations do not cover the itinerary")
    return traj
