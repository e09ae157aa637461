"""Cumulative heat exposure (work/rest burden) and wind-chill frostbite dose.

Heat is integrated second by second along a trajectory. Each non-rest second
adds ``dt / rho`` to the burden P and ``eta * dt / rho`` minutes to the rest
deficit D, where ``(rho, eta)`` comes from the work/rest lookup at that
second's heat index and the period's work level. A rest (conditioned) second
pays back ``dt`` of deficit; D never goes below zero and P shrinks in the same
proportion as D, so a fully repaid deficit ends the episode with P = 0.

A risk flag is raised at the first second where P > 1, or P == 1 with no rest
in the next period; it stays raised until the episode ends. The trip is
flagged when P ever reaches 1.
"""
import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from importlib import resources

import numpy as np

from .activity import WorkLevel, default_catalog, work_level
from .thermal import heat_index_f, wind_chill_f

# Lookup values outside the tabulated heat-index band.
COOL_WORK_REST = (1e4, 0.0)
EXTREME_WORK_REST = (1e-6, 1e-5)
BAND_LOW_F = 90.0
BAND_HIGH_F = 112.0
DT_MIN = 1.0 / 60.0
# Burden or dose within this of 1 counts as reaching 1 (float summation noise).
UNIT_TOL = 1e-9


class TableError(ValueError):
    pass


class ExposureError(ValueError):
    pass


def read_table_rows(path, default_name):
    if path is None:
        text = resources.files("heatpath").joinpath(f"data/{default_name}").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8-sig") as fh:
            text = fh.read()
    return list(csv.DictReader(text.splitlines()))


class WorkRestTable:
    """Per work level, contiguous heat-index bands ``[low, high)`` covering
    90-112 F (the last band is closed at 112)."""

    def __init__(self, rows):
        by_level = {}
        for level, low, high, work, rest in rows:
            lvl = level if isinstance(level, WorkLevel) else WorkLevel[str(level).upper()]
            if lvl is WorkLevel.REST:
                raise TableError("rest needs no work/rest rows")
            if not work > 0 or rest < 0 or not high > low:
                raise TableError(f"bad work/rest row {level},{low},{high},{work},{rest}")
            by_level.setdefault(lvl, []).append((float(low), float(high), float(work), float(rest)))
        self.bands = {}
        for lvl in (WorkLevel.LIGHT, WorkLevel.MODERATE, WorkLevel.HEAVY):
            bands = sorted(by_level.get(lvl, []))
            if not bands:
                raise TableError(f"no work/rest rows for level {lvl.label}")
            if bands[0][0] != BAND_LOW_F or bands[-1][1] != BAND_HIGH_F:
                raise TableError(f"{lvl.label} bands must span {BAND_LOW_F}-{BAND_HIGH_F} F")
            for a, b in zip(bands, bands[1:]):
                if a[1] != b[0]:
                    raise TableError(f"{lvl.label} bands not contiguous at {a[1]} F")
                if b[2] > a[2] or b[3] < a[3]:
                    raise TableError(f"{lvl.label} work must not grow nor rest shrink with heat index")
            self.bands[lvl] = (np.array([b[0] for b in bands]), np.array([b[2] for b in bands]),
                               np.array([b[3] for b in bands]))

    @classmethod
    def from_csv(cls, path=None):
        rows = []
        for r in read_table_rows(path, "work_rest.csv"):
            rows.append((r["level"].strip(), float(r["hi_low_f"]), float(r["hi_high_f"]),
                         float(r["work_min"]), float(r["rest_min"])))
        return cls(rows)

    def lookup_many(self, t_hi, level):
        t_hi = np.asarray(t_hi, dtype=float)
        if level is WorkLevel.REST:
            return np.full(t_hi.shape, COOL_WORK_REST[0]), np.full(t_hi.shape, COOL_WORK_REST[1])
        lows, work, rest = self.bands[level]
        idx = np.clip(np.searchsorted(lows, t_hi, side="right") - 1, 0, len(lows) - 1)
        rho, eta = work[idx], rest[idx]
        cool = t_hi < BAND_LOW_F
        hot = t_hi > BAND_HIGH_F
        rho = np.where(cool, COOL_WORK_REST[0], np.where(hot, EXTREME_WORK_REST[0], rho))
        eta = np.where(cool, COOL_WORK_REST[1], np.where(hot, EXTREME_WORK_REST[1], eta))
        return rho, eta

    def lookup(self, t_hi, level):
        rho, eta = self.lookup_many([t_hi], level)
        return float(rho[0]), float(eta[0])


def work_rest_lookup(table, t_hi, level):
    return table.lookup(t_hi, level)


class FrostbiteTable:
    """Wind-chill thresholds; a chill at or below ``wc_high_f`` gives that row's time."""

    def __init__(self, rows):
        rows = sorted(((float(w), float(m)) for w, m in rows), reverse=True)
        if not rows:
            raise TableError("frostbite table is empty")
        for w, m in rows:
            if not m > 0:
                raise TableError(f"frostbite time must be positive at {w} F")
        for a, b in zip(rows, rows[1:]):
            if b[1] > a[1]:
                raise TableError("frostbite time must not grow as wind chill falls")
        self.rows = rows
        self._highs = np.array([-r[0] for r in rows])
        self._minutes = np.array([r[1] for r in rows])

    @classmethod
    def from_csv(cls, path=None):
        return cls([(r["wc_high_f"], r["minutes"]) for r in read_table_rows(path, "frostbite.csv")])

    def lookup_many(self, t_wc):
        neg = -np.asarray(t_wc, dtype=float)
        # Coldest row whose threshold is at or above the wind chill.
        idx = np.searchsorted(self._highs, neg, side="right") - 1
        out = np.where(idx >= 0, self._minutes[np.clip(idx, 0, None)], math.inf)
        return out

    def lookup(self, t_wc):
        return float(self.lookup_many([t_wc])[0])


def frostbite_time(table, t_wc):
    return table.lookup(t_wc)


@dataclass
class PeriodExposure:
    index: int
    kind: str
    mode: str
    start: datetime
    duration_min: float
    level: WorkLevel
    hi_mean: float
    rho: float
    eta: float
    burden_inc: float
    burden: float
    generated: float
    exposure: float
    recovered: float
    deficit: float
    flag: bool


@dataclass
class ExposureLedger:
    trip_id: str
    periods: list = field(default_factory=list)
    e_hi: float = 0.0
    p_max: float = 0.0
    continued_min: float = 0.0
    flag_onset: datetime = None

    @property
    def r_hi(self):
        return self.p_max >= 1.0 - UNIT_TOL

    @property
    def flagged_periods(self):
        return [p.index for p in self.periods if p.flag]


@dataclass
class ChillPeriod:
    index: int
    duration_min: float
    wc_mean: float
    tau: float
    dose: float


@dataclass
class ChillResult:
    trip_id: str
    periods: list = field(default_factory=list)
    e_wc: float = 0.0

    @property
    def r_wc(self):
        return self.e_wc >= 1.0 - UNIT_TOL


@dataclass(frozen=True)
class HeatInput:
    """Per-second heat index for one period at a fixed work level."""

    duration_s: int
    level: WorkLevel
    hi: np.ndarray
    kind: str = ""
    mode: str = ""
    start: datetime = None


def integrate_heat(inputs, table: WorkRestTable, trip_id="", depart=None) -> ExposureLedger:
    led = ExposureLedger(trip_id)
    P = D = 0.0
    flag = False
    onset = None
    elapsed = 0
    n_inputs = len(inputs)
    for n, inp in enumerate(inputs):
        t_min = inp.duration_s * DT_MIN
        hi = np.asarray(inp.hi, dtype=float)
        if hi.shape != (inp.duration_s,):
            raise ExposureError(f"period {n}: need one heat index per second")
        period_flag = flag
        if inp.level is WorkLevel.REST:
            rho, eta = COOL_WORK_REST
            remaining = D - t_min
            if remaining > UNIT_TOL:
                used = t_min
                P = P * remaining / D
                D = remaining
            else:
                used = D
                if flag:
                    led.continued_min += (elapsed - onset) / 60.0 + used
                    flag = False
                P = D = 0.0
            rec = PeriodExposure(n, inp.kind, inp.mode, inp.start, t_min, inp.level,
                                 float(hi.mean()) if hi.size else math.nan,
                                 rho, eta, 0.0, P, 0.0, -t_min, used, D, period_flag)
        else:
            rho_s, eta_s = table.lookup_many(hi, inp.level)
            cum = P + np.cumsum(DT_MIN / rho_s)
            if not flag and cum.size:
                hit = cum > 1.0 + UNIT_TOL
                exact = np.abs(cum - 1.0) <= UNIT_TOL
                next_rest = n + 1 < n_inputs and inputs[n + 1].level is WorkLevel.REST
                if next_rest:
                    exact[-1] = False
                trig = np.nonzero(hit | exact)[0]
                if trig.size:
                    flag = period_flag = True
                    onset = elapsed + int(trig[0])
                    if depart is not None:
                        led.flag_onset = depart + timedelta(seconds=onset)
            burden_inc, generated = _per_second_totals(rho_s, eta_s)
            P += burden_inc
            D += generated
            led.p_max = max(led.p_max, P)
            led.e_hi += generated
            rho_eff = t_min / burden_inc if burden_inc > 0 else math.inf
            eta_eff = generated * rho_eff / t_min if t_min > 0 else 0.0
            rec = PeriodExposure(n, inp.kind, inp.mode, inp.start, t_min, inp.level,
                                 float(hi.mean()) if hi.size else math.nan, rho_eff, eta_eff,
                                 burden_inc, P, generated, generated, 0.0, D, period_flag)
        led.periods.append(rec)
        elapsed += inp.duration_s
    if flag:
        led.continued_min += (elapsed - onset) / 60.0
    return led


def _per_second_totals(rho_s, eta_s):
    """Sum of dt/rho and eta*dt/rho, grouped by distinct (rho, eta) pairs."""
    if rho_s.size == 0:
        return 0.0, 0.0
    pairs, counts = np.unique(np.stack([rho_s, eta_s], axis=1), axis=0, return_counts=True)
    burden = float(np.sum(counts / (60.0 * pairs[:, 0])))
    deficit = float(np.sum(counts * pairs[:, 1] / (60.0 * pairs[:, 0])))
    return burden, deficit


def period_samples(period, tfield):
    xs, ys = period.per_second()
    return tfield.sample_many(xs, ys, period.start, np.arange(period.duration_s))


def heat_inputs(traj, demo, tfield, catalog=None, posture="standing", nws=True):
    catalog = catalog or default_catalog()
    out = []
    for p in traj.periods:
        try:
            temp, rh, _ = period_samples(p, tfield)
        except ValueError as exc:
            raise ExposureError(f"trip {traj.trip_id}: {exc}") from None
        level = work_level(catalog, demo, p.mode, p.conditioned, p.grade_pct, posture)
        out.append(HeatInput(p.duration_s, level, heat_index_f(temp, rh, nws=nws), p.kind, p.mode, p.start))
    return out


def simulate_heat(traj, demo, tfield, catalog=None, table=None, posture="standing", nws=True):
    table = table or default_work_rest()
    inputs = heat_inputs(traj, demo, tfield, catalog, posture, nws)
    return integrate_heat(inputs, table, traj.trip_id, traj.depart)


def integrate_chill(inputs, table: FrostbiteTable, trip_id=""):
    """``inputs``: (duration_s, conditioned, per-second wind chill) triples."""
    res = ChillResult(trip_id)
    for n, (dur, conditioned, wc) in enumerate(inputs):
        wc = np.asarray(wc, dtype=float)
        if conditioned:
            tau_s = np.full(wc.shape, math.inf)
        else:
            tau_s = table.lookup_many(wc)
        taus, counts = np.unique(tau_s, return_counts=True)
        dose = float(np.sum(counts / (60.0 * taus)))
        t_min = dur * DT_MIN
        tau = t_min / dose if dose > 0 else math.inf
        res.periods.append(ChillPeriod(n, t_min, float(wc.mean()) if wc.size else math.nan, tau, dose))
        res.e_wc += dose
    return res


def simulate_chill(traj, tfield, table=None):
    table = table or default_frostbite()
    inputs = []
    for p in traj.periods:
        try:
            temp, _, wind = period_samples(p, tfield)
        except ValueError as exc:
            raise ExposureError(f"trip {traj.trip_id}: {exc}") from None
        inputs.append((p.duration_s, p.conditioned, wind_chill_f(temp, wind)))
    return integrate_chill(inputs, table, traj.trip_id)


_TABLES = {}


def default_work_rest():
    if "wr" not in _TABLES:
        _TABLES["wr"] = WorkRestTable.from_csv()
    return _TABLES["wr"]


def default_frostbite():
    if "fb" not in _TABLES:
        _TABLES["fb"] = FrostbiteTable.from_csv()
    return _TABLES["fb"]
