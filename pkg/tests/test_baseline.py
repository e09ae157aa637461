from datetime import datetime

import numpy as np
import pytest

from heatpath.activity import Demographic
from heatpath.baseline import (CategoryError, ComparisonEntry, HeatCategoryTable, additive_exposure,
                               baseline_trajectory, compare_report, dijkstra_route, quantile_edges,
                               risk_level, write_compare_csv)
from heatpath.field import Grid, TemperatureField
from heatpath.fixtures import (EXAMPLE_DEPART, EXAMPLE_DEST, EXAMPLE_ORIGIN, HOT_WALKS, constant_series,
                               temp_for_heat_index)
from heatpath.transit import NoItinerary, Trajectory, plan_trip, simple_period, trace_trajectory
from routing_support import QUERY_DAY, feeds, random_queries

CATS = HeatCategoryTable.from_csv()


def flat_field(hi, rh=50.0):
    series = constant_series(datetime(2019, 8, 1), 24, temp_for_heat_index(hi, rh), rh)
    return TemperatureField(series, Grid(10, 10, -500.0, -500.0, 100.0, np.zeros((10, 10))), (0.0, 0.0))


def test_category_bands():
    assert list(CATS.factors([79.99, 80, 89.9, 90, 102.9, 103, 130])) == [0, 1, 1, 2, 2, 3, 3]
    assert CATS.category(104) == "danger"
    with pytest.raises(CategoryError):
        HeatCategoryTable([(-np.inf, 80, "a", 0), (81, np.inf, "b", 1)])
    with pytest.raises(CategoryError):
        HeatCategoryTable([(-np.inf, 80, "a", 2), (80, np.inf, "b", 1)])
    with pytest.raises(CategoryError):
        HeatCategoryTable([(0, 80, "a", 0), (80, np.inf, "b", 1)])


def test_additive_score_per_minute():
    tf = flat_field(95.0)
    walk = simple_period(datetime(2019, 8, 1, 12), 600, "walk", (0, 0), kind="access", to_xy=(100, 0))
    ride = simple_period(walk.end, 600, "transit", (100, 0), kind="ride", to_xy=(200, 0))
    s = additive_exposure(Trajectory("a", walk.start, (walk, ride)), tf, CATS)
    assert s.total == pytest.approx(20.0)
    assert s.increments == [pytest.approx(20.0), 0.0]
    assert s.categories == ["extreme_caution", None]
    assert s.duration_min == 20.0


def test_worked_example_static_path(example):
    it = plan_trip(example.net, EXAMPLE_ORIGIN, EXAMPLE_DEST, EXAMPLE_DEPART, access_mode="bike")
    path = dijkstra_route(example.net, EXAMPLE_ORIGIN, EXAMPLE_DEST, access_mode="bike")
    kinds = [(leg.kind, leg.mode) for leg in path.legs]
    assert kinds == [("access", "bike"), ("ride", "transit"), ("transfer", "walk"), ("ride", "transit"),
                     ("egress", "walk")]
    assert (it.arrive_s - it.depart_s - path.duration_s) / 60 == pytest.approx(15.0 + 10.7)
    traj = baseline_trajectory(path, EXAMPLE_DEPART, "example")
    assert not any(p.kind == "wait" for p in traj.periods)
    assert [p.conditioned for p in traj.periods] == [False, True, False, True, False]
    assert traj.periods[2].asset_id == "S2|S3"


def test_consecutive_hops_merge_into_one_ride():
    from heatpath.transit import build_network
    net = build_network([("a", 0, 0), ("b", 2000, 0), ("c", 4000, 0)],
                        [("t1", "r", [("a", 3600, 3600), ("b", 3700, 3710), ("c", 3800, 3800)])])
    path = dijkstra_route(net, (0, 10), (4000, 10))
    rides = [leg for leg in path.legs if leg.kind == "ride"]
    assert len(rides) == 1 and rides[0].from_stop == "a" and rides[0].to_stop == "c"
    assert rides[0].duration_s == 190  # in-vehicle hop times, dwell excluded
    assert len(rides[0].path) == 3


def test_unreachable_raises():
    from heatpath.transit import build_network
    net = build_network([("a", 0, 0), ("b", 9000, 0)], [("t1", "r", [("a", 3600, 3600), ("b", 3700, 3700)])])
    with pytest.raises(NoItinerary):
        dijkstra_route(net, (50000, 0), (0, 60000))


def test_static_never_slower_than_timetable():
    rng = np.random.default_rng(4)
    checked = 0
    for net, frng in feeds(77, 4):
        for o, d, dep, access in random_queries(frng, 40):
            try:
                it = plan_trip(net, o, d, dep, access_mode=access)
            except NoItinerary:
                continue
            path = dijkstra_route(net, o, d, access_mode=access)
            assert path.duration_s <= it.arrive_s - it.depart_s
            checked += 1
    assert checked > 20


def entry(tid, st, base, dyn_flag=False, w=1.0):
    return ComparisonEntry(tid, w, 30.0, 0.0, dyn_flag, st, 20.0, base)


def test_quantile_edges_and_levels():
    edges = quantile_edges([0, 1, 2, 3, 4])
    assert edges == (1.0, 2.0, 3.0)
    assert [risk_level(v, edges) for v in (0.5, 1, 2.5, 3, 9)] == [0, 1, 2, 3, 3]
    assert quantile_edges([]) == ()


def test_compare_report_shared_edges(tmp_path):
    entries = [entry("a", 0, 0), entry("b", 1, 5), entry("c", 2, 0), entry("d", 3, 0, True), entry("e", 4, 2)]
    rep = compare_report(entries)
    assert rep.edges == (1.0, 2.0, 3.0)
    flagged = {(r.trip_id, r.method) for r in rep.rows if r.flagged}
    assert flagged == {("d", "spatiotemporal_additive"), ("e", "spatiotemporal_additive"),
                       ("b", "baseline_additive"), ("d", "dynamic")}
    assert rep.flagged_pct == {"dynamic": 20.0, "spatiotemporal_additive": 40.0, "baseline_additive": 20.0}
    assert rep.time_delta_min["a"] == 10.0
    write_compare_csv(rep, tmp_path / "c.csv")
    assert len((tmp_path / "c.csv").read_text().splitlines()) == 16


def test_zero_scores_never_flag():
    rep = compare_report([entry("a", 0, 0), entry("b", 0, 0)])
    assert not any(r.flagged for r in rep.rows if r.method != "dynamic")
    assert compare_report([]).rows == []


def test_worked_example_against_hot_walks(example_batch):
    from heatpath.exposure import simulate_heat
    net, tf = example_batch.net, example_batch.field
    entries = []
    for rec in example_batch.records:
        o, d = rec.origin, rec.dest
        it = plan_trip(net, o, d, rec.depart, access_mode=rec.access_mode)
        traj = trace_trajectory(net, it, rec.trip_id)
        led = simulate_heat(traj, Demographic.AVERAGE_ADULT, tf)
        path = dijkstra_route(net, o, d, access_mode=rec.access_mode)
        st = additive_exposure(traj, tf, CATS).total
        base = additive_exposure(baseline_trajectory(path, rec.depart, rec.trip_id), tf, CATS).total
        entries.append(ComparisonEntry(rec.trip_id, 1.0, traj.duration_s / 60, led.e_hi, led.r_hi, st,
                                       path.duration_s / 60, base))
    rep = compare_report(entries)
    by = {(r.trip_id, r.method): r for r in rep.rows}
    assert by[("example", "dynamic")].flagged
    assert by[("example", "spatiotemporal_additive")].flagged
    assert not by[("example", "baseline_additive")].flagged
    for name, _, _ in HOT_WALKS:
        assert not by[(name, "dynamic")].flagged
    assert rep.time_delta_min["example"] > 0
