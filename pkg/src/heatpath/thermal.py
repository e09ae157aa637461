"""Apparent-temperature indices: NWS heat index and wind chill.

Both functions accept scalars or numpy arrays and return the same shape.
Temperatures are in Fahrenheit, humidity in percent, wind in mph.
"""
from dataclasses import dataclass

import numpy as np

# Rothfusz regression, NWS adjustments and the Steadman simple form.
HEAT_INDEX_COEFFS = (
    -42.379,
    2.04901523,
    10.14333127,
    -0.22475541,
    -0.00683783,
    -0.05481717,
    0.00122874,
    0.00085282,
    -0.00000199,
)
REGRESSION_MIN_F = 80.0
LOW_RH_PCT = 13.0
LOW_RH_T_RANGE = (80.0, 112.0)
HIGH_RH_PCT = 85.0
HIGH_RH_T_RANGE = (80.0, 87.0)

WIND_CHILL_COEFFS = (35.74, 0.6215, -35.75, 0.4275, 0.16)
WIND_CHILL_MAX_F = 50.0
WIND_CHILL_MIN_MPH = 3.0


class WeatherInputError(ValueError):
    pass


@dataclass(frozen=True)
class WeatherSample:
    temp_f: float
    rh_pct: float
    wind_mph: float

    def __post_init__(self):
        _check(self.temp_f, self.rh_pct, self.wind_mph)


def _check(temp_f, rh_pct=None, wind_mph=None):
    t = np.asarray(temp_f, dtype=float)
    if not np.all(np.isfinite(t)):
        raise WeatherInputError("temperature must be finite")
    if rh_pct is not None:
        rh = np.asarray(rh_pct, dtype=float)
        if not np.all(np.isfinite(rh)) or np.any(rh < 0) or np.any(rh > 100):
            raise WeatherInputError("relative humidity must lie in [0, 100]")
    if wind_mph is not None:
        v = np.asarray(wind_mph, dtype=float)
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise WeatherInputError("wind speed must be finite and >= 0")


def rothfusz(temp_f, rh_pct):
    """The bare regression polynomial, no adjustments or gating."""
    c = HEAT_INDEX_COEFFS
    t = np.asarray(temp_f, dtype=float)
    rh = np.asarray(rh_pct, dtype=float)
    return (c[0] + c[1] * t + c[2] * rh + c[3] * t * rh + c[4] * t * t
            + c[5] * rh * rh + c[6] * t * t * rh + c[7] * t * rh * rh
            + c[8] * t * t * rh * rh)


def heat_index_f(temp_f, rh_pct, nws=True):
    """Heat index in Fahrenheit.

    With ``nws=True`` (default) the NWS algorithm is used: the simple
    Steadman average below 80 F, otherwise the regression with the low- and
    high-humidity adjustments. ``nws=False`` returns the bare regression.
    """
    _check(temp_f, rh_pct)
    t = np.asarray(temp_f, dtype=float)
    rh = np.asarray(rh_pct, dtype=float)
    hi = rothfusz(t, rh)
    if nws:
        lo_t, hi_t = LOW_RH_T_RANGE
        low = (rh < LOW_RH_PCT) & (t >= lo_t) & (t <= hi_t)
        dry = ((LOW_RH_PCT - rh) / 4.0) * np.sqrt(
            np.clip(17.0 - np.abs(t - 95.0), 0.0, None) / 17.0)
        hi = np.where(low, hi - dry, hi)
        lo_t, hi_t = HIGH_RH_T_RANGE
        high = (rh > HIGH_RH_PCT) & (t >= lo_t) & (t <= hi_t)
        hi = np.where(high, hi + ((rh - 85.0) / 10.0) * ((87.0 - t) / 5.0), hi)
        simple = 0.5 * (t + 61.0 + (t - 68.0) * 1.2 + rh * 0.094)
        hi = np.where(t < REGRESSION_MIN_F, simple, hi)
    return hi[()] if hi.ndim == 0 else hi


def wind_chill_f(temp_f, wind_mph):
    """Wind chill in Fahrenheit; passthrough outside T <= 50 F, V >= 3 mph."""
    _check(temp_f, wind_mph=wind_mph)
    t = np.asarray(temp_f, dtype=float)
    v = np.asarray(wind_mph, dtype=float)
    a, b, c, d, e = WIND_CHILL_COEFFS
    vp = np.power(v, e)
    wc = a + b * t + c * vp + d * t * vp
    out = np.where((t <= WIND_CHILL_MAX_F) & (v >= WIND_CHILL_MIN_MPH), wc, t)
    return out[()] if out.ndim == 0 else out


def heat_index(sample: WeatherSample, nws=True) -> float:
    return float(heat_index_f(sample.temp_f, sample.rh_pct, nws=nws))


def wind_chill(sample: WeatherSample) -> float:
    return float(wind_chill_f(sample.temp_f, sample.wind_mph))
