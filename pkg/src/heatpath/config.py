"""Run configuration: a dataclass plus a flat ``key = value`` file format.

Nested tables use dotted keys, e.g. ``speed.walk = 1.3`` or
``max_access_m.bike = 2500``; lists are comma separated.
"""
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .transit.raptor import DEFAULT_MAX_ACCESS_M, DEFAULT_SPEEDS, RoutingParams


class ConfigError(ValueError):
    pass


PATH_KEYS = ("gtfs", "trips", "weather", "grid", "workrest", "frostbite", "catalog", "categories",
             "trajectories")
# Keys that never change results and stay out of the config hash.
UNHASHED = ("out", "workers")


@dataclass
class RunConfig:
    gtfs: str = None
    trips: str = None
    weather: str = None
    grid: str = None
    workrest: str = None
    frostbite: str = None
    catalog: str = None
    categories: str = None
    trajectories: str = None
    out: str = "out"
    workers: int = 1
    grid_is_offsets: bool = True
    center_x: float = None
    center_y: float = None
    lat0: float = None
    lon0: float = None
    footpath_radius_m: float = 500.0
    speed: dict = field(default_factory=lambda: dict(DEFAULT_SPEEDS))
    max_access_m: dict = field(default_factory=lambda: dict(DEFAULT_MAX_ACCESS_M))
    access_candidates: int = 5
    max_transfers: int = 4
    quantiles: tuple = (0.25, 0.5, 0.75)
    posture: str = "standing"
    nws_adjustments: bool = True
    compare: bool = True

    def validate(self, need=()):
        for key in need:
            if getattr(self, key) is None:
                raise ConfigError(f"missing required input: {key}")
        for key in PATH_KEYS:
            p = getattr(self, key)
            if p is not None and not Path(p).exists():
                raise ConfigError(f"{key}: no such file or directory: {p}")
        for mode, v in self.speed.items():
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"speed.{mode} must be positive")
        for mode, v in self.max_access_m.items():
            if not v >= 0:
                raise ConfigError(f"max_access_m.{mode} must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.access_candidates < 1 or self.max_transfers < 0:
            raise ConfigError("access_candidates must be >= 1 and max_transfers >= 0")
        if any(not 0 < q < 1 for q in self.quantiles) or list(self.quantiles) != sorted(self.quantiles):
            raise ConfigError("quantiles must be increasing values in (0, 1)")
        if (self.center_x is None) != (self.center_y is None):
            raise ConfigError("center_x and center_y go together")
        if not self.grid_is_offsets and self.center_x is None:
            raise ConfigError("an LST grid (grid_is_offsets = false) needs center_x/center_y")
        if (self.lat0 is None) != (self.lon0 is None):
            raise ConfigError("lat0 and lon0 go together")
        return self

    @property
    def routing(self):
        return RoutingParams(dict(self.speed), dict(self.max_access_m), self.access_candidates,
                             self.max_transfers)

    @property
    def center(self):
        return None if self.center_x is None else (self.center_x, self.center_y)

    def digest(self):
        d = {k: v for k, v in asdict(self).items() if k not in UNHASHED}
        for key in PATH_KEYS:
            if d[key] is not None:
                d[key] = _path_digest(Path(d[key]))
        blob = json.dumps(d, sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()


def _path_digest(p):
    """Content hash of a file or directory, so relocated inputs hash alike."""
    h = hashlib.sha256()
    files = sorted(q for q in p.rglob("*") if q.is_file()) if p.is_dir() else [p]
    for q in files:
        h.update(str(q.relative_to(p) if p.is_dir() else q.name).encode())
        h.update(q.read_bytes())
    return h.hexdigest()


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, raw):
    kind = _TYPES[key]
    if kind is bool:
        low = raw.lower()
        if low not in ("true", "false", "yes", "no", "1", "0"):
            raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
        return low in ("true", "yes", "1")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is tuple:
        return tuple(float(v) for v in raw.split(",") if v.strip())
    return raw


def parse_config_text(text, base=None):
    cfg = RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        set_option(cfg, key, raw, base, lineno)
    return cfg


def set_option(cfg, key, raw, base=None, lineno=None):
    where = f"config line {lineno}: " if lineno else ""
    try:
        if "." in key:
            table, sub = key.split(".", 1)
            if table not in ("speed", "max_access_m"):
                raise ConfigError(f"{where}unknown table {table!r}")
            getattr(cfg, table)[sub] = float(raw)
            return
        if key not in _TYPES:
            raise ConfigError(f"{where}unknown key {key!r}")
        value = _coerce(key, raw)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}{key}: {exc}") from None
    if key in PATH_KEYS + ("out",) and base is not None and not Path(value).is_absolute():
        value = str(Path(base) / value)
    setattr(cfg, key, value)


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, base=p.parent)
