import math
from datetime import datetime, timedelta

import numpy as np
import pytest

from heatpath.field import (FieldError, Grid, LANDSAT8_B10_K1, LANDSAT8_B10_K2, TemperatureField, WeatherSeries,
                            blackbody_radiance, build_offset_grid, kelvin_to_f, load_field,
                            radiance_to_surface_temp, read_ascii_grid, read_weather_csv,
                            write_ascii_grid, write_weather_csv)

DAY = datetime(2019, 8, 1)


def small_grid():
    vals = np.arange(12, dtype=float).reshape(3, 4)
    return Grid(4, 3, 100.0, 200.0, 10.0, vals)


def test_cell_index_north_up():
    g = small_grid()
    # lower-left cell is the last row
    assert g.cell_index(101, 201) == (2, 0)
    assert g.cell_index(139, 229) == (0, 3)
    assert g.value_at(101, 201) == 8.0
    assert g.cell_center(0, 0) == (105.0, 225.0)


def test_outside_points_snap_or_raise():
    g = small_grid()
    assert g.cell_index(0, 0) == (2, 0)
    with pytest.raises(FieldError):
        g.cell_index(0, 0, clamp=False)


def test_ascii_roundtrip(tmp_path):
    g = small_grid()
    g.values[1, 2] = g.nodata
    write_ascii_grid(g, tmp_path / "g.asc")
    back = read_ascii_grid(tmp_path / "g.asc")
    assert (back.ncols, back.nrows, back.xll_m, back.yll_m, back.cellsize_m) == (4, 3, 100.0, 200.0, 10.0)
    np.testing.assert_array_equal(back.values, g.values)
    assert back.mask[1, 2]


def test_ascii_center_header(tmp_path):
    p = tmp_path / "c.asc"
    p.write_text("ncols 2\nnrows 1\nxllcenter 5\nyllcenter 5\ncellsize 10\n1 2\n")
    g = read_ascii_grid(p)
    assert (g.xll_m, g.yll_m) == (0.0, 0.0)


@pytest.mark.parametrize("text", [
    "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 10\n1\n",
    "ncols 2\nnrows 1\nxllcorner 0\ncellsize 10\n1 2\n",
    "ncols 2\nnrows 1\nxllcorner 0\nyllcorner zero\ncellsize 10\n1 2\n",
    "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 10\n1 x\n",
    "nrows 1\nxllcorner 0\nyllcorner 0\ncellsize 10\n1 2\n",
])
def test_bad_ascii_rejected(tmp_path, text):
    p = tmp_path / "bad.asc"
    p.write_text(text)
    with pytest.raises(FieldError):
        read_ascii_grid(p)


def test_planck_inversion_band10():
    t = radiance_to_surface_temp(10.0)
    assert t == pytest.approx(LANDSAT8_B10_K2 / math.log(LANDSAT8_B10_K1 / 10.0 + 1.0), rel=1e-12)
    assert t == pytest.approx(302.7947, abs=1e-4)
    assert blackbody_radiance(t) == pytest.approx(10.0, rel=1e-12)


def test_atmospheric_correction_forms():
    kw = dict(emissivity=0.97, transmittance=0.9, up_radiance=1.0, down_radiance=1.5)
    printed = radiance_to_surface_temp(9.0, **kw)
    standard = radiance_to_surface_temp(9.0, standard_rte=True, **kw)
    b_printed = (9.0 - 1.0 * 0.9 - 0.03 * 1.5) / (0.97 * 0.9)
    b_standard = (9.0 - 1.0 - 0.9 * 0.03 * 1.5) / (0.9 * 0.97)
    k1, k2 = LANDSAT8_B10_K1, LANDSAT8_B10_K2
    assert printed == pytest.approx(k2 / math.log(k1 / b_printed + 1), rel=1e-12)
    assert standard == pytest.approx(k2 / math.log(k1 / b_standard + 1), rel=1e-12)
    # with a perfect atmosphere both coincide
    assert radiance_to_surface_temp(9.0, standard_rte=True) == radiance_to_surface_temp(9.0)


@pytest.mark.parametrize("kw", [dict(radiance=0.0), dict(radiance=5, emissivity=0),
                                dict(radiance=5, transmittance=1.5), dict(radiance=5, up_radiance=-1),
                                dict(radiance=0.5, up_radiance=10)])
def test_radiance_inputs_validated(kw):
    with pytest.raises(FieldError):
        radiance_to_surface_temp(**kw)


def test_kelvin_to_f():
    assert kelvin_to_f(273.15) == pytest.approx(32.0)
    assert kelvin_to_f(373.15) == pytest.approx(212.0)


def test_offsets_relative_to_center():
    g = small_grid()
    g.values[0, 0] = g.nodata
    off = build_offset_grid(g, (125.0, 215.0))  # row 1, col 2 -> value 6
    assert off.values[1, 2] == 0.0
    assert off.values[2, 3] == 5.0
    assert off.mask[0, 0]
    with pytest.raises(FieldError):
        build_offset_grid(g, (101.0, 229.0))  # nodata center
    with pytest.raises(FieldError):
        build_offset_grid(g, (0.0, 0.0))


def series(n=3, temps=(80.0, 90.0, 100.0)):
    hours = [DAY + timedelta(hours=h) for h in range(n)]
    return WeatherSeries(hours, list(temps)[:n], [50.0] * n, [5.0] * n)


def test_weather_series_validation():
    with pytest.raises(FieldError):
        WeatherSeries([DAY, DAY], [1, 2], [50, 50], [1, 1])
    with pytest.raises(FieldError):
        WeatherSeries([DAY + timedelta(minutes=5)], [1], [50], [1])
    with pytest.raises(FieldError):
        WeatherSeries([], [], [], [])
    with pytest.raises(ValueError):
        WeatherSeries([DAY], [80], [150], [1])


def test_weather_csv_roundtrip(tmp_path):
    s = series()
    write_weather_csv(s, tmp_path / "w.csv")
    back = read_weather_csv(tmp_path / "w.csv")
    assert back.hours == s.hours
    np.testing.assert_array_equal(back.temp_f, s.temp_f)
    (tmp_path / "bad.csv").write_text("hour,temp_f\n")
    with pytest.raises(FieldError):
        read_weather_csv(tmp_path / "bad.csv")
    (tmp_path / "bad2.csv").write_text("hour_iso8601,temp_f,rh_pct,wind_mph\nyesterday,1,2,3\n")
    with pytest.raises(FieldError):
        read_weather_csv(tmp_path / "bad2.csv")


def test_field_sampling_across_hours():
    g = small_grid()
    off = Grid(4, 3, 100.0, 200.0, 10.0, np.where(g.values == 8.0, -9999.0, g.values))
    f = TemperatureField(series(), off, (105.0, 225.0))
    start = DAY + timedelta(minutes=59, seconds=58)
    temp, rh, wind = f.sample_many(np.full(4, 125.0), np.full(4, 215.0), start, np.arange(4))
    # cell value 6, hours 0 then 1
    np.testing.assert_array_equal(temp, [86.0, 86.0, 96.0, 96.0])
    assert f.sample(101.0, 201.0, DAY).temp_f == 80.0  # nodata offset counts as zero
    with pytest.raises(FieldError):
        f.sample(125.0, 215.0, DAY + timedelta(hours=3))


def test_load_field_from_lst(tmp_path):
    write_ascii_grid(small_grid(), tmp_path / "lst.asc")
    write_weather_csv(series(), tmp_path / "w.csv")
    f = load_field(tmp_path / "w.csv", tmp_path / "lst.asc", center=(125.0, 215.0), grid_is_offsets=False)
    assert f.sample(139.0, 229.0, DAY).temp_f == pytest.approx(80.0 + 3.0 - 6.0)
    with pytest.raises(FieldError):
        load_field(tmp_path / "w.csv", tmp_path / "lst.asc", grid_is_offsets=False)
