"""Trip-level heat and wind-chill exposure on a timetabled transit network."""
from .activity import Demographic, MetCatalog, WorkLevel
from .exposure import FrostbiteTable, WorkRestTable, simulate_chill, simulate_heat
from .field import TemperatureField, load_field
from .thermal import WeatherSample, heat_index, heat_index_f, wind_chill, wind_chill_f
from .transit import load_gtfs, plan_trip, trace_trajectory

__version__ = "0.1.0"
