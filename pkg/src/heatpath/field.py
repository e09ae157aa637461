"""Spatio-temporal temperature field.

An hourly weather series measured at the study-area center is combined with
a static offset grid (LST minus LST at the center cell) so that

    temp(x, y, t) = series(floor_hour(t)).temp_f + offset(cell(x, y))

Humidity and wind are taken from the same hourly record, spatially uniform.
"""
import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .thermal import WeatherSample

# Landsat 8 TIRS band 10 thermal constants (product metadata K1, K2).
LANDSAT8_B10_K1 = 774.8853
LANDSAT8_B10_K2 = 1321.0789
LANDSAT8_B11_K1 = 480.8883
LANDSAT8_B11_K2 = 1201.1442

DEFAULT_NODATA = -9999.0


class FieldError(ValueError):
    pass


@dataclass
class Grid:
    """Raster in a projected CRS; ``values`` row 0 is the northern row."""

    ncols: int
    nrows: int
    xll_m: float
    yll_m: float
    cellsize_m: float
    values: np.ndarray
    nodata: float = DEFAULT_NODATA

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.nrows, self.ncols)
        if self.ncols < 1 or self.nrows < 1:
            raise FieldError("grid needs at least one row and one column")
        if not self.cellsize_m > 0:
            raise FieldError("cellsize must be positive")

    @property
    def mask(self):
        return self.values == self.nodata

    def contains(self, x, y):
        return (self.xll_m <= x < self.xll_m + self.ncols * self.cellsize_m
                and self.yll_m <= y < self.yll_m + self.nrows * self.cellsize_m)

    def cell_index(self, x, y, clamp=True):
        """(row, col) of the cell holding (x, y); arrays accepted.

        Points outside the raster snap to the nearest edge cell when ``clamp``.
        """
        col = np.floor((np.asarray(x, dtype=float) - self.xll_m) / self.cellsize_m).astype(int)
        row_up = np.floor((np.asarray(y, dtype=float) - self.yll_m) / self.cellsize_m).astype(int)
        row = self.nrows - 1 - row_up
        if clamp:
            col = np.clip(col, 0, self.ncols - 1)
            row = np.clip(row, 0, self.nrows - 1)
        elif np.any((col < 0) | (col >= self.ncols) | (row < 0) | (row >= self.nrows)):
            raise FieldError(f"point ({x}, {y}) lies outside the grid")
        return row, col

    def cell_center(self, row, col):
        x = self.xll_m + (col + 0.5) * self.cellsize_m
        y = self.yll_m + (self.nrows - 1 - row + 0.5) * self.cellsize_m
        return x, y

    def value_at(self, x, y, clamp=True):
        row, col = self.cell_index(x, y, clamp=clamp)
        return self.values[row, col]


def read_ascii_grid(path) -> Grid:
    """Read an ESRI ASCII grid (``xllcenter``/``yllcenter`` also accepted)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = {}
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if parts and parts[0][0].isalpha():
            if len(parts) != 2:
                raise FieldError(f"{path}:{i + 1}: bad grid header line {lines[i]!r}")
            try:
                header[parts[0].lower()] = float(parts[1])
            except ValueError:
                raise FieldError(f"{path}:{i + 1}: bad grid header value {parts[1]!r}") from None
            i += 1
        elif not parts:
            i += 1
        else:
            break
    try:
        ncols, nrows = int(header["ncols"]), int(header["nrows"])
        cellsize = header["cellsize"]
    except KeyError as exc:
        raise FieldError(f"{path}: missing grid header key {exc}") from None
    if "xllcorner" in header and "yllcorner" in header:
        xll, yll = header["xllcorner"], header["yllcorner"]
    elif "xllcenter" in header and "yllcenter" in header:
        xll, yll = header["xllcenter"] - cellsize / 2, header["yllcenter"] - cellsize / 2
    else:
        raise FieldError(f"{path}: grid header lacks xllcorner/yllcorner (or centers)")
    nodata = header.get("nodata_value", DEFAULT_NODATA)
    try:
        data = np.array(" ".join(lines[i:]).split(), dtype=float)
    except ValueError as exc:
        raise FieldError(f"{path}: non-numeric grid value ({exc})") from None
    if data.size != ncols * nrows:
        raise FieldError(f"{path}: expected {ncols * nrows} values, found {data.size}")
    return Grid(ncols, nrows, xll, yll, cellsize, data.reshape(nrows, ncols), nodata)


def write_ascii_grid(grid: Grid, path, fmt="%.6f"):
    with open(path, "w") as fh:
        fh.write(f"ncols {grid.ncols}\nnrows {grid.nrows}\n")
        fh.write(f"xllcorner {grid.xll_m!r}\nyllcorner {grid.yll_m!r}\n")
        fh.write(f"cellsize {grid.cellsize_m!r}\nNODATA_value {grid.nodata!r}\n")
        np.savetxt(fh, grid.values, fmt=fmt)


def blackbody_radiance(temp_k, k1=LANDSAT8_B10_K1, k2=LANDSAT8_B10_K2):
    """Planck radiance for a brightness temperature (inverse of the below)."""
    return k1 / (math.exp(k2 / temp_k) - 1.0)


def radiance_to_surface_temp(radiance, k1=LANDSAT8_B10_K1, k2=LANDSAT8_B10_K2,
                             emissivity=1.0, transmittance=1.0,
                             up_radiance=0.0, down_radiance=0.0,
                             standard_rte=False):
    """Surface temperature (K) from at-sensor thermal radiance.

    The at-sensor radiance is modelled as
    ``L = e*B*tau + Lup*tau + (1 - e)*Ldown`` and solved for the surface
    blackbody radiance B, which is turned into kelvin with
    ``T = K2 / ln(K1 / B + 1)``. ``standard_rte=True`` uses the textbook
    form ``L = tau*(e*B + (1 - e)*Ldown) + Lup`` instead.
    """
    if not radiance > 0:
        raise FieldError("radiance must be positive")
    if not 0 < emissivity <= 1:
        raise FieldError("emissivity must lie in (0, 1]")
    if not 0 < transmittance <= 1:
        raise FieldError("transmittance must lie in (0, 1]")
    if up_radiance < 0 or down_radiance < 0:
        raise FieldError("path radiances must be non-negative")
    if standard_rte:
        surface = (radiance - up_radiance
                   - transmittance * (1 - emissivity) * down_radiance) / (transmittance * emissivity)
    else:
        surface = (radiance - up_radiance * transmittance
                   - (1 - emissivity) * down_radiance) / (emissivity * transmittance)
    if not surface > 0:
        raise FieldError("atmospheric correction leaves no surface radiance")
    return k2 / math.log(k1 / surface + 1.0)


def kelvin_to_f(temp_k):
    return (np.asarray(temp_k, dtype=float) - 273.15) * 9.0 / 5.0 + 32.0


def build_offset_grid(lst: Grid, center) -> Grid:
    """Offsets ``lst(cell) - lst(center cell)``; nodata stays nodata."""
    cx, cy = center
    if not lst.contains(cx, cy):
        raise FieldError(f"center {center} lies outside the LST grid")
    row, col = lst.cell_index(cx, cy, clamp=False)
    ref = lst.values[row, col]
    if ref == lst.nodata:
        raise FieldError(f"center cell {center} is nodata")
    out = np.where(lst.mask, lst.nodata, lst.values - ref)
    return Grid(lst.ncols, lst.nrows, lst.xll_m, lst.yll_m, lst.cellsize_m, out, lst.nodata)


def floor_hour(t: datetime) -> datetime:
    return t.replace(minute=0, second=0, microsecond=0)


@dataclass
class WeatherSeries:
    hours: list
    temp_f: np.ndarray
    rh_pct: np.ndarray
    wind_mph: np.ndarray
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.temp_f = np.asarray(self.temp_f, dtype=float)
        self.rh_pct = np.asarray(self.rh_pct, dtype=float)
        self.wind_mph = np.asarray(self.wind_mph, dtype=float)
        if not self.hours:
            raise FieldError("weather series is empty")
        for i, h in enumerate(self.hours):
            if h != floor_hour(h):
                raise FieldError(f"weather timestamp {h.isoformat()} is not on the hour")
            if i and h <= self.hours[i - 1]:
                raise FieldError(f"weather timestamps not strictly increasing at {h.isoformat()}")
            WeatherSample(self.temp_f[i], self.rh_pct[i], self.wind_mph[i])
        self._index = {h: i for i, h in enumerate(self.hours)}

    @property
    def span(self):
        return self.hours[0], self.hours[-1] + timedelta(hours=1)

    def index_of(self, t: datetime) -> int:
        h = floor_hour(t)
        try:
            return self._index[h]
        except KeyError:
            raise FieldError(f"no weather record for hour {h.isoformat()}") from None

    def record(self, t: datetime) -> WeatherSample:
        i = self.index_of(t)
        return WeatherSample(float(self.temp_f[i]), float(self.rh_pct[i]), float(self.wind_mph[i]))


def read_weather_csv(path) -> WeatherSeries:
    hours, temp, rh, wind = [], [], [], []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        need = {"hour_iso8601", "temp_f", "rh_pct", "wind_mph"}
        if not need <= set(reader.fieldnames or ()):
            raise FieldError(f"{path}: header must contain {sorted(need)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                hours.append(datetime.fromisoformat(row["hour_iso8601"]))
                temp.append(float(row["temp_f"]))
                rh.append(float(row["rh_pct"]))
                wind.append(float(row["wind_mph"]))
            except ValueError as exc:
                raise FieldError(f"{path}:{lineno}: {exc}") from None
    return WeatherSeries(hours, temp, rh, wind)


def write_weather_csv(series: WeatherSeries, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hour_iso8601", "temp_f", "rh_pct", "wind_mph"])
        for i, h in enumerate(series.hours):
            w.writerow([h.isoformat(), repr(float(series.temp_f[i])),
                        repr(float(series.rh_pct[i])), repr(float(series.wind_mph[i]))])


@dataclass
class TemperatureField:
    series: WeatherSeries
    offsets: Grid
    center: tuple

    def offset_at(self, x, y):
        """Offsets for points; nodata cells contribute zero."""
        v = self.offsets.value_at(x, y)
        return np.where(v == self.offsets.nodata, 0.0, v)

    def sample(self, x, y, t: datetime) -> WeatherSample:
        i = self.series.index_of(t)
        return WeatherSample(float(self.series.temp_f[i] + self.offset_at(x, y)),
                             float(self.series.rh_pct[i]), float(self.series.wind_mph[i]))

    def sample_many(self, xs, ys, start: datetime, offsets_s):
        """Vectorized sampling at ``start + offsets_s`` seconds.

        Returns arrays ``(temp_f, rh_pct, wind_mph)``.
        """
        offsets_s = np.asarray(offsets_s, dtype=float)
        h0 = floor_hour(start)
        base = (start - h0).total_seconds()
        hour_step = np.floor((base + offsets_s) / 3600.0).astype(int)
        rec = np.empty(hour_step.shape, dtype=int)
        for step in np.unique(hour_step):
            rec[hour_step == step] = self.series.index_of(h0 + timedelta(hours=int(step)))
        dt = self.offset_at(xs, ys)
        return (self.series.temp_f[rec] + dt, self.series.rh_pct[rec], self.series.wind_mph[rec])


def load_field(weather_path, grid_path, center=None, grid_is_offsets=True) -> TemperatureField:
    """Load a field from disk.

    ``grid_path`` holds offsets by default; pass ``grid_is_offsets=False``
    with a ``center`` to derive offsets from an LST grid instead.
    """
    series = read_weather_csv(weather_path)
    grid = read_ascii_grid(grid_path)
    if not grid_is_offsets:
        if center is None:
            raise FieldError("an LST grid needs a center coordinate")
        grid = build_offset_grid(grid, center)
    if center is None:
        center = (grid.xll_m + grid.ncols * grid.cellsize_m / 2,
                  grid.yll_m + grid.nrows * grid.cellsize_m / 2)
    return TemperatureField(series, grid, tuple(center))

