"""MET values per (demographic, travel mode) and the work-intensity levels."""
import csv
import enum
from dataclasses import dataclass
from importlib import resources


class Demographic(str, enum.Enum):
    AVERAGE_ADULT = "average_adult"
    OLDER_ADULT = "older_adult"
    WHEELCHAIR_USER = "wheelchair_user"


class WorkLevel(enum.IntEnum):
    REST = 0
    LIGHT = 1
    MODERATE = 2
    HEAVY = 3

    @property
    def label(self):
        return self.name.lower()


class UnsupportedActivity(LookupError):
    """The catalog has no MET value for this demographic and mode."""


MODES = ("walk", "bike", "micromobility", "wheelchair", "auto", "wait", "transit")
CONDITIONED_MODES = frozenset({"auto", "transit"})

# Default activity row used for each trajectory mode.
MODE_ACTIVITY = {
    "bike": "bike",
    "micromobility": "motor_scooter",
    "wheelchair": "wheeling",
    "auto": "auto_riding",
    "transit": "transit_riding",
}

LIGHT_MAX_MET = 1.5
HEAVY_MIN_MET = 4.0


@dataclass(frozen=True)
class MetEntry:
    met: float
    conditioned: bool
    estimated: bool = False


class MetCatalog:
    def __init__(self, rows):
        self.rows = {}
        for demo, activity, conditioned, met, estimated in rows:
            if not met > 0:
                raise ValueError(f"MET must be positive for {demo}/{activity}")
            self.rows[(Demographic(demo), activity)] = MetEntry(float(met), conditioned, estimated)

    @classmethod
    def from_csv(cls, path=None):
        if path is None:
            src = resources.files("heatpath").joinpath("data/met_catalog.csv")
            text = src.read_text(encoding="utf-8")
        else:
            with open(path, encoding="utf-8-sig") as fh:
                text = fh.read()
        rows = []
        for rec in csv.DictReader(text.splitlines()):
            rows.append((rec["demographic"], rec["activity"], _yes(rec["conditioned"]),
                         float(rec["met"]), _yes(rec.get("estimated") or "no")))
        return cls(rows)

    def entry(self, demo, activity) -> MetEntry:
        try:
            return self.rows[(Demographic(demo), activity)]
        except KeyError:
            raise UnsupportedActivity(f"no MET value for {Demographic(demo).value} / {activity}") from None


def _yes(value):
    return value.strip().lower() in ("yes", "y", "true", "1")


def activity_for(mode, grade_pct=0.0, posture="standing", driving=False):
    if mode == "walk":
        g = max(float(grade_pct), 0.0)
        if g < 1.0:
            return "walk_level"
        return "walk_grade_1_5" if g < 6.0 else "walk_grade_6_10"
    if mode == "wait":
        if posture not in ("standing", "sitting", "seated"):
            raise ValueError(f"unknown wait posture {posture!r}")
        return "wait_standing" if posture == "standing" else "wait_sitting"
    if mode == "auto" and driving:
        return "auto_driving"
    try:
        return MODE_ACTIVITY[mode]
    except KeyError:
        raise ValueError(f"unknown trajectory mode {mode!r}") from None


def met_for(catalog: MetCatalog, demo, mode, grade_pct=0.0, posture="standing", driving=False):
    return catalog.entry(demo, activity_for(mode, grade_pct, posture, driving)).met


def intensity(conditioned: bool, met: float) -> WorkLevel:
    if not met > 0:
        raise ValueError("MET must be positive")
    if conditioned:
        return WorkLevel.REST
    if met <= LIGHT_MAX_MET:
        return WorkLevel.LIGHT
    if met < HEAVY_MIN_MET:
        return WorkLevel.MODERATE
    return WorkLevel.HEAVY


def work_level(catalog, demo, mode, conditioned, grade_pct=0.0, posture="standing"):
    return intensity(conditioned, met_for(catalog, demo, mode, grade_pct, posture))


_DEFAULT = None


def default_catalog() -> MetCatalog:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = MetCatalog.from_csv()
    return _DEFAULT
