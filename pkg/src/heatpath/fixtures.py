"""Synthetic input bundles: the worked heat-exposure trip, a small 3-stop feed,
and random feeds for routing checks.

Coordinates are projected meters. A bundle can be written to disk in the
same layout the CLI reads (GTFS directory, trips CSV, weather CSV, offset
grid).
"""
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .field import Grid, TemperatureField, WeatherSeries, build_offset_grid, write_ascii_grid, write_weather_csv
from .records import TripRecord, write_trips_csv
from .thermal import heat_index_f
from .transit.network import build_network, write_gtfs


@dataclass
class Bundle:
    net: object
    field: TemperatureField
    records: list

    def write(self, directory):
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        write_gtfs(self.net, d / "gtfs")
        write_trips_csv(self.records, d / "trips.csv")
        write_weather_csv(self.field.series, d / "weather.csv")
        write_ascii_grid(self.field.offsets, d / "offsets.asc", fmt="%.9f")
        return {"gtfs": d / "gtfs", "trips": d / "trips.csv", "weather": d / "weather.csv",
                "grid": d / "offsets.asc"}


def temp_for_heat_index(target_f, rh_pct):
    """Air temperature giving heat index ``target_f`` at ``rh_pct``."""
    return brentq(lambda t: float(heat_index_f(t, rh_pct)) - target_f, 60.0, 140.0, xtol=1e-12)


def constant_series(day, hours, temp_f, rh_pct, wind_mph=5.0):
    start = datetime.combine(day, datetime.min.time())
    hs = [start + timedelta(hours=h) for h in range(hours)]
    n = len(hs)
    return WeatherSeries(hs, np.full(n, temp_f), np.full(n, rh_pct), np.full(n, wind_mph))


def hms(h, m, s=0):
    return h * 3600 + m * 60 + s


# Worked trip: bike to S1, wait, ride to S2, walk to S3 through a hot block,
# wait, ride to S4, short walk to the destination.
EXAMPLE_DAY = datetime(2019, 8, 14)
EXAMPLE_DEPART = datetime(2019, 8, 14, 14, 43)
EXAMPLE_Y = 15.0
EXAMPLE_STOPS = (("S1", 0.0, EXAMPLE_Y), ("S2", 8100.0, EXAMPLE_Y), ("S3", 8505.0, EXAMPLE_Y),
                 ("S4", 20505.0, EXAMPLE_Y))
EXAMPLE_ORIGIN = (-288.0, EXAMPLE_Y)
EXAMPLE_DEST = (20565.0, EXAMPLE_Y)
EXAMPLE_SEGMENTS_MIN = (1.2, 15.0, 17.0, 5.4, 10.7, 22.0, 0.8)
EXAMPLE_CENTER_TEMP_F = 85.0
EXAMPLE_RH = 50.0
# Heat index targets per 30 m cell along the walk from S2 (24 s per cell).
EXAMPLE_WALK_HI = (104.0, 113.0, 104.0, 104.0, 104.0, 104.0, 104.0, 104.0,
                   102.2, 102.2, 102.2, 102.2, 102.2, 104.0)
EXAMPLE_BIKE_HI = 96.3
EXAMPLE_S1_HI = 92.5
HOT_ZONE_HI = 101.0
HOT_ZONE_Y = 285.0
HOT_WALKS = (("hot_600", 600.0, 13), ("hot_900", 900.0, 13.5), ("hot_1000", 1000.0, 14))


def _example_trips():
    r1 = [(hms(14, 40), "T1a"), (hms(14, 59, 12), "T1b"), (hms(15, 30), "T1c")]
    r2 = [(hms(15, 5), "T2a"), (hms(15, 32, 18), "T2b"), (hms(16, 5), "T2c")]
    trips = []
    for dep, tid in r1:
        trips.append((tid, "R1", [("S1", dep, dep), ("S2", dep + 1020, dep + 1020)]))
    for dep, tid in r2:
        trips.append((tid, "R2", [("S3", dep, dep), ("S4", dep + 1320, dep + 1320)]))
    return trips


def _example_lst():
    grid = Grid(730, 20, -900.0, -150.0, 30.0, np.full((20, 730), EXAMPLE_CENTER_TEMP_F))
    vals = grid.values
    row, _ = grid.cell_index(0.0, EXAMPLE_Y)

    def put(x, hi):
        _, col = grid.cell_index(x, EXAMPLE_Y)
        vals[row, col] = temp_for_heat_index(hi, EXAMPLE_RH)

    for x in np.arange(-300.0, 0.0, 30.0):
        put(x + 15.0, EXAMPLE_BIKE_HI)
    put(15.0, EXAMPLE_S1_HI)
    for i, hi in enumerate(EXAMPLE_WALK_HI):
        put(8100.0 + 30.0 * i + 15.0, hi)
    hot_row, _ = grid.cell_index(0.0, HOT_ZONE_Y)
    _, c0 = grid.cell_index(2880.0 + 1.0, HOT_ZONE_Y)
    _, c1 = grid.cell_index(4140.0 - 1.0, HOT_ZONE_Y)
    vals[hot_row, c0:c1 + 1] = temp_for_heat_index(HOT_ZONE_HI, EXAMPLE_RH)
    return grid


def worked_example_bundle(with_hot_walks=False):
    """The worked trip; ``with_hot_walks`` adds walk-only trips through a hot block."""
    net = build_network(EXAMPLE_STOPS, _example_trips(), footpath_radius_m=500.0)
    lst = _example_lst()
    center = (10000.0, 400.0)
    offsets = build_offset_grid(lst, center)
    series = constant_series(EXAMPLE_DAY.date(), 24, EXAMPLE_CENTER_TEMP_F, EXAMPLE_RH)
    tfield = TemperatureField(series, offsets, center)
    records = [TripRecord("example", EXAMPLE_ORIGIN, EXAMPLE_DEST, EXAMPLE_DEPART, access_mode="bike")]
    if with_hot_walks:
        for tid, length, hour in HOT_WALKS:
            dep = EXAMPLE_DAY + timedelta(hours=hour)
            records.append(TripRecord(tid, (2900.0, HOT_ZONE_Y), (2900.0 + length, HOT_ZONE_Y), dep))
    return Bundle(net, tfield, records)


THREE_STOP_DAY = datetime(2019, 7, 10)


def three_stop_bundle(temp_f=85.0, rh_pct=40.0):
    stops = (("A", 0.0, 0.0), ("B", 400.0, 0.0), ("C", 800.0, 0.0))
    trips = []
    for i, dep in enumerate(range(hms(6, 0), hms(22, 0), 600)):
        trips.append((f"R{i:03d}", "R", [("A", dep, dep), ("B", dep + 120, dep + 150),
                                          ("C", dep + 270, dep + 270)]))
    net = build_network(stops, trips, footpath_radius_m=500.0)
    grid = Grid(70, 20, -600.0, -300.0, 30.0, np.zeros((20, 70)))
    series = constant_series(THREE_STOP_DAY.date(), 24, temp_f, rh_pct)
    tfield = TemperatureField(series, grid, (0.0, 0.0))
    records = [
        TripRecord("t1", (-700.0, 0.0), (1500.0, 0.0), THREE_STOP_DAY + timedelta(hours=8, minutes=3)),
        TripRecord("t2", (0.0, 100.0), (1400.0, 100.0), THREE_STOP_DAY + timedelta(hours=17, minutes=41)),
    ]
    return Bundle(net, tfield, records)


def random_network(rng, n_stops=10, n_trips=20, box_m=3000.0, footpath_radius_m=600.0):
    """Random timetable: a few routes over random stop sequences, trips spread
    over 06:00-08:00 with random hop and dwell times."""
    n_stops = int(n_stops)
    stops = [(f"s{i}", float(rng.uniform(0, box_m)), float(rng.uniform(0, box_m))) for i in range(n_stops)]
    n_routes = int(rng.integers(2, 5))
    routes = []
    for r in range(n_routes):
        length = int(rng.integers(2, min(5, n_stops) + 1))
        seq = [stops[i][0] for i in rng.choice(n_stops, size=length, replace=False)]
        hops = rng.integers(60, 600, size=length - 1)
        dwell = rng.integers(0, 61, size=length)
        routes.append((f"r{r}", seq, hops, dwell))
    trips = []
    for t in range(int(n_trips)):
        rid, seq, hops, dwell = routes[t % n_routes]
        dep = int(rng.integers(hms(6, 0), hms(8, 0)))
        times = []
        clock = dep
        for i, s in enumerate(seq):
            arr = clock
            leave = arr + int(dwell[i]) if 0 < i < len(seq) - 1 else arr
            times.append((s, arr, leave))
            if i < len(seq) - 1:
                clock = leave + int(hops[i])
        trips.append((f"t{t:02d}", rid, times))
    return build_network(stops, trips, footpath_radius_m=footpath_radius_m)
