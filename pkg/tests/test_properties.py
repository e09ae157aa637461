import math
import random
from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heatpath.activity import WorkLevel, default_catalog, intensity
from heatpath.baseline import HeatCategoryTable, additive_exposure, dijkstra_route
from heatpath.exposure import HeatInput, default_frostbite, default_work_rest, integrate_chill, integrate_heat
from heatpath.field import Grid, TemperatureField, WeatherSeries
from heatpath.fixtures import random_network
from heatpath.resilience import TripImpact, accumulate, prioritize
from heatpath.thermal import heat_index_f, wind_chill_f
from heatpath.transit import NoItinerary, Trajectory, plan_trip, simple_period, trace_trajectory
from heatpath.transit.raptor import DEFAULT_SPEEDS
from routing_support import random_queries

WR = default_work_rest()
FB = default_frostbite()
CATS = HeatCategoryTable.from_csv()
T0 = datetime(2019, 8, 1, 10)

levels = st.sampled_from(list(WorkLevel))
his = st.floats(80.0, 118.0)
period = st.tuples(levels, st.integers(1, 1800), his)
periods = st.lists(period, min_size=1, max_size=8)


def inputs(plan):
    return [HeatInput(n, lvl, np.full(n, hi)) for lvl, n, hi in plan]


def rel(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(abs(a), abs(b)) + 1e-12


# thermal


@given(st.integers(40, 100))
def test_heat_index_monotone_in_temperature(rh):
    t = np.arange(80.0, 131.0)
    assert np.all(np.diff(heat_index_f(t, float(rh))) >= 0)


@given(st.floats(-40.0, 50.0))
def test_wind_chill_monotone(t):
    v = np.linspace(3.0, 60.0, 200)
    assert np.all(np.diff(wind_chill_f(t, v)) <= 0)
    temps = np.linspace(-40.0, 50.0, 200)
    assert np.all(np.diff(wind_chill_f(temps, 3.0 + abs(t))) >= 0)


@given(st.floats(-60, 130), st.floats(0, 2.999))
def test_wind_chill_gate_identity(t, v):
    assert wind_chill_f(t, v) == t
    assert wind_chill_f(max(t, 50.0001), 20.0) == max(t, 50.0001)


@given(st.floats(-60, 130), st.floats(0, 100), st.floats(0, 60))
def test_thermal_is_pure(t, rh, v):
    assert heat_index_f(t, rh) == heat_index_f(t, rh)
    assert wind_chill_f(t, v) == wind_chill_f(t, v)


# field


@given(st.lists(st.floats(-10, 10), min_size=6, max_size=6), st.integers(0, 23), st.integers(0, 23))
def test_cell_differences_are_hour_invariant(offs, h1, h2):
    grid = Grid(3, 2, 0.0, 0.0, 10.0, np.array(offs).reshape(2, 3))
    temps = np.linspace(70, 100, 24)
    series = WeatherSeries([T0.replace(hour=0) + timedelta(hours=h) for h in range(24)], temps, np.full(24, 50.0),
                           np.full(24, 5.0))
    tf = TemperatureField(series, grid, (5.0, 5.0))
    a1, b1 = tf.sample(5, 5, T0.replace(hour=h1)).temp_f, tf.sample(25, 15, T0.replace(hour=h1)).temp_f
    a2, b2 = tf.sample(5, 5, T0.replace(hour=h2)).temp_f, tf.sample(25, 15, T0.replace(hour=h2)).temp_f
    assert abs((a1 - temps[h1]) - grid.values[1, 0]) <= 1e-12 * 200
    assert abs((a1 - b1) - (a2 - b2)) <= 1e-12 * 200


# activity


@given(st.floats(0.1, 12.0), st.floats(0.1, 12.0))
def test_intensity_monotone_and_conditioning(m1, m2):
    lo, hi = sorted((m1, m2))
    assert intensity(False, lo) <= intensity(False, hi)
    assert intensity(True, hi) is WorkLevel.REST


# exposure


@given(periods)
def test_deficit_never_negative(plan):
    led = integrate_heat(inputs(plan), WR)
    assert all(p.deficit >= 0 and p.burden >= 0 for p in led.periods)
    assert led.e_hi >= 0 and led.p_max >= 0


@given(periods, st.integers(0, 7), st.floats(0.05, 0.95))
def test_splitting_a_period_changes_nothing(plan, which, frac):
    which %= len(plan)
    lvl, n, hi = plan[which]
    if n < 2:
        return
    k = min(max(1, int(n * frac)), n - 1)
    split = plan[:which] + [(lvl, k, hi), (lvl, n - k, hi)] + plan[which + 1:]
    a, b = integrate_heat(inputs(plan), WR), integrate_heat(inputs(split), WR)
    assert rel(a.p_max, b.p_max) and rel(a.e_hi, b.e_hi)
    wc = [(n, False, np.full(n, -40.0 + 5 * i)) for i, (_, n, _) in enumerate(plan)]
    wc_split = wc[:which] + [(k, False, np.full(k, wc[which][2][0])), (n - k, False, np.full(n - k, wc[which][2][0]))]
    wc_split += wc[which + 1:]
    assert rel(integrate_chill(wc, FB).e_wc, integrate_chill(wc_split, FB).e_wc)


@given(periods, st.integers(0, 7), st.integers(0, 1800), st.floats(0.0, 10.0))
def test_raising_heat_index_dominates(plan, which, second, bump):
    base = inputs(plan)
    arrays = [p.hi + bump / 4 for p in base]
    a_hot = arrays[which % len(arrays)]
    a_hot[second % a_hot.size] += bump
    raised = [HeatInput(p.duration_s, p.level, h) for p, h in zip(base, arrays)]
    a, b = integrate_heat(base, WR), integrate_heat(raised, WR)
    assert b.e_hi >= a.e_hi - 1e-12
    assert b.r_hi or not a.r_hi


@given(st.lists(st.tuples(levels, st.integers(1, 1800), st.floats(60.0, 89.9)), min_size=1, max_size=6),
       st.integers(1, 3600), st.floats(60, 130))
def test_conditioned_period_on_clean_trip_is_neutral(plan, n, hi):
    a = integrate_heat(inputs(plan), WR)
    assert a.periods[-1].deficit == 0.0
    b = integrate_heat(inputs(plan) + [HeatInput(n, WorkLevel.REST, np.full(n, hi))], WR)
    assert (a.e_hi, a.p_max, a.r_hi, a.continued_min) == (b.e_hi, b.p_max, b.r_hi, b.continued_min)


@given(st.lists(st.tuples(st.integers(1, 1800), st.booleans(), st.floats(-70, 20)), min_size=1, max_size=8),
       st.randoms())
def test_chill_dose_ignores_order(plan, rnd):
    items = [(n, c, np.full(n, wc)) for n, c, wc in plan]
    shuffled = items[:]
    rnd.shuffle(shuffled)
    assert rel(integrate_chill(items, FB).e_wc, integrate_chill(shuffled, FB).e_wc, 1e-12)


# routing, resilience and baseline over random feeds


def routed_batch(seed, n_queries=12):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n_stops=int(rng.integers(3, 11)), n_trips=int(rng.integers(2, 21)))
    out = []
    for i, (o, d, dep, access) in enumerate(random_queries(rng, n_queries)):
        try:
            it = plan_trip(net, o, d, dep, access_mode=access)
        except NoItinerary:
            continue
        out.append((net, o, d, dep, access, it, trace_trajectory(net, it, f"q{i:02d}")))
    return out


def fake_ledger(traj, rng):
    from types import SimpleNamespace
    return SimpleNamespace(periods=[SimpleNamespace(exposure=float(rng.uniform(-3, 5))) for _ in traj.periods],
                           r_hi=bool(rng.integers(0, 2)))


@given(st.integers(0, 10 ** 6))
def test_rounds_never_slow_arrival(seed):
    for net, o, d, dep, access, it, _ in routed_batch(seed, 6):
        arrivals = []
        for k in range(1, 5):
            try:
                arrivals.append(plan_trip(net, o, d, dep, access_mode=access, max_rides=k).arrive_s)
            except NoItinerary:
                arrivals.append(math.inf)
        assert all(b <= a for a, b in zip(arrivals, arrivals[1:]))


@given(st.integers(0, 10 ** 6))
def test_trajectory_contiguous_and_continuous(seed):
    for *_, it, traj in routed_batch(seed, 6):
        assert traj.duration_s == it.arrive_s - it.depart_s
        t = traj.depart
        for p in traj.periods:
            assert p.start == t and p.duration_s > 0
            t = p.end
            xs, ys = p.positions(np.arange(p.duration_s + 1))
            step = np.hypot(np.diff(xs), np.diff(ys))
            if p.kind == "ride":
                knots = np.array(p.path, dtype=float)
                seg = np.hypot(np.diff(knots[:, 1]), np.diff(knots[:, 2])) / np.maximum(np.diff(knots[:, 0]), 1)
                limit = seg.max(initial=0.0)
            else:
                limit = DEFAULT_SPEEDS.get(p.mode, 0.0)  # waits stay put
            assert np.all(step <= limit + 1e-6)


@given(st.integers(0, 10 ** 6))
def test_criticality_is_conserved(seed):
    rng = np.random.default_rng(seed)
    impacts = []
    expected = 0.0
    for *_, traj in routed_batch(seed):
        if any(p.kind == "direct" for p in traj.periods):
            continue
        w = float(rng.uniform(0, 5))
        impacts.append(TripImpact(traj, fake_ledger(traj, rng), w))
        expected += w * sum(p.duration_min for p in traj.periods if not p.conditioned)
    total = sum(s.criticality for s in accumulate(impacts).values())
    assert rel(total, expected, 1e-9)


@given(st.integers(0, 10 ** 6), st.floats(0.01, 100.0))
def test_weight_scaling(seed, c):
    rng = np.random.default_rng(seed)
    impacts = [TripImpact(t, fake_ledger(t, rng), float(rng.uniform(0.1, 3))) for *_, t in routed_batch(seed)]
    scaled = [TripImpact(i.trajectory, i.ledger, i.weight * c) for i in impacts]
    a, b = accumulate(impacts), accumulate(scaled)
    sa, ra, rb = prioritize(a)[0], prioritize(a), prioritize(b)
    sb = rb[0]
    assert list(a) == list(b)
    for k in a:
        assert rel(b[k].criticality, c * a[k].criticality) and rel(b[k].incident_count, c * a[k].incident_count)
        assert rel(b[k].exposure, a[k].exposure) and rel(b[k].vulnerability, a[k].vulnerability)
        assert rel(sb[k].mitigation, c * sa[k].mitigation) and rel(sb[k].adaptation, c * sa[k].adaptation)
    assert ra[1] == rb[1] and ra[2] == rb[2]


@given(st.integers(0, 10 ** 6), st.randoms())
def test_ranking_ignores_input_order(seed, rnd):
    rng = np.random.default_rng(seed)
    impacts = [TripImpact(t, fake_ledger(t, rng), float(rng.uniform(0.1, 3))) for *_, t in routed_batch(seed)]
    shuffled = impacts[:]
    rnd.shuffle(shuffled)
    assert prioritize(accumulate(impacts)) == prioritize(accumulate(shuffled))


@given(st.integers(0, 10 ** 6))
def test_static_path_never_longer(seed):
    for net, o, d, dep, access, it, traj in routed_batch(seed):
        assert dijkstra_route(net, o, d, access_mode=access).duration_s <= traj.duration_s


# additive score


def flat_field():
    temps = np.linspace(82, 110, 24)
    series = WeatherSeries([datetime(2019, 8, 1) + timedelta(hours=h) for h in range(24)], temps,
                           np.full(24, 45.0), np.full(24, 5.0))
    offs = np.linspace(-5, 5, 100).reshape(10, 10)
    return TemperatureField(series, Grid(10, 10, 0.0, 0.0, 100.0, offs), (500.0, 500.0))


FIELD = flat_field()
leg = st.tuples(st.integers(1, 1800), st.booleans(), st.integers(0, 9), st.integers(0, 9))


def additive_traj(plan, start=datetime(2019, 8, 1, 6)):
    ps, t = [], start
    for n, cond, cx, cy in plan:
        xy = (cx * 100 + 50, cy * 100 + 50)
        ps.append(simple_period(t, n, "transit" if cond else "walk", xy))
        t += timedelta(seconds=n)
    return Trajectory("a", start, tuple(ps))


@given(st.lists(leg, min_size=1, max_size=6), st.randoms())
def test_additive_permutation_and_conditioned_append(plan, rnd):
    base = additive_exposure(additive_traj(plan), FIELD, CATS)
    # periods keep their own clock times so the permutation only reorders the sum
    traj = additive_traj(plan)
    ps = list(traj.periods)
    rnd.shuffle(ps)
    shuffled = additive_exposure(Trajectory("a", traj.depart, tuple(ps)), FIELD, CATS)
    assert rel(base.total, shuffled.total, 1e-12)
    longer = additive_exposure(additive_traj(plan + [(600, True, 0, 0)]), FIELD, CATS)
    assert longer.total >= base.total


@given(st.lists(leg, min_size=1, max_size=6), st.floats(0.5, 4.0))
def test_equal_factors_count_minutes(plan, f):
    flat = HeatCategoryTable([(-math.inf, math.inf, "all", f)])
    s = additive_exposure(additive_traj(plan), FIELD, flat)
    minutes = sum(n for n, cond, _, _ in plan if not cond) / 60.0
    assert rel(s.total, f * minutes, 1e-12)
