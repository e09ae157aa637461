"""Traveler trip records (one survey response each, with an expansion weight)."""
import csv
import math
from dataclasses import dataclass
from datetime import datetime

from .activity import Demographic

TRIP_COLUMNS = ("trip_id", "origin_x", "origin_y", "dest_x", "dest_y", "depart",
                "demographic", "access_mode", "egress_mode", "weight")
TRAVEL_MODES = ("walk", "bike", "wheelchair", "micromobility", "auto")


class RecordError(ValueError):
    pass


@dataclass(frozen=True)
class TripRecord:
    trip_id: str
    origin: tuple
    dest: tuple
    depart: datetime
    demographic: Demographic = Demographic.AVERAGE_ADULT
    access_mode: str = "walk"
    egress_mode: str = "walk"
    weight: float = 1.0

    def __post_init__(self):
        if not (self.weight >= 0 and math.isfinite(self.weight)):
            raise RecordError(f"trip {self.trip_id}: weight must be finite and >= 0")
        object.__setattr__(self, "demographic", Demographic(self.demographic))
        for mode in (self.access_mode, self.egress_mode):
            if mode not in TRAVEL_MODES:
                raise RecordError(f"trip {self.trip_id}: unknown mode {mode!r}")

    def row(self):
        return [self.trip_id, repr(float(self.origin[0])), repr(float(self.origin[1])),
                repr(float(self.dest[0])), repr(float(self.dest[1])), self.depart.isoformat(),
                self.demographic.value, self.access_mode, self.egress_mode, repr(float(self.weight))]


def parse_record(row) -> TripRecord:
    try:
        return TripRecord(
            row["trip_id"].strip(),
            (float(row["origin_x"]), float(row["origin_y"])),
            (float(row["dest_x"]), float(row["dest_y"])),
            datetime.fromisoformat(row["depart"].strip()),
            row.get("demographic") or Demographic.AVERAGE_ADULT,
            (row.get("access_mode") or "walk").strip(),
            (row.get("egress_mode") or "walk").strip(),
            float(row.get("weight") or 1.0),
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise RecordError(f"trip {row.get('trip_id', '?')}: {exc}") from None


def read_trip_rows(path):
    """Raw rows of a trips CSV; only the header is checked here."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        missing = {"trip_id", "origin_x", "origin_y", "dest_x", "dest_y", "depart"} - set(reader.fieldnames or ())
        if missing:
            raise RecordError(f"{path}: trips CSV lacks columns {sorted(missing)}")
        return list(reader)


def write_trips_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIP_COLUMNS)
        for r in records:
            w.writerow(r.row())
