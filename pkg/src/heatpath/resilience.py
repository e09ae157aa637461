"""Asset-level resilience statistics and prioritization scores.

Assets are stations (wait periods) and footpaths (transfer walks plus the
access and egress legs, keyed ``ingress:<stop>`` / ``egress:<stop>``).
Conditioned ride periods are skipped; a direct trip with no transit touches
no asset.
"""
import csv
import json
from collections import defaultdict
from dataclasses import dataclass

METERS_PER_MILE = 1609.344

ASSET_COLUMNS = ("kind", "id", "criticality", "exposure", "vulnerability", "mitigation",
                 "adaptation", "rank_mit", "rank_adapt", "incident_count", "length_m",
                 "criticality_per_mile")


class AssetError(ValueError):
    pass


@dataclass
class AssetStats:
    kind: str
    id: str
    criticality: float = 0.0
    deficit: float = 0.0
    incident_count: float = 0.0
    flagged_count: float = 0.0
    length_m: float = None

    @property
    def exposure(self):
        return self.deficit / self.criticality if self.criticality > 0 else 0.0

    @property
    def vulnerability(self):
        return self.flagged_count / self.incident_count if self.incident_count > 0 else 0.0

    @property
    def criticality_per_mile(self):
        if not self.length_m:
            return None
        return self.criticality / (self.length_m / METERS_PER_MILE)


@dataclass(frozen=True)
class PriorityScore:
    mitigation: float
    adaptation: float
    rank_mit: int
    rank_adapt: int


@dataclass(frozen=True)
class TripImpact:
    """What one trip contributes: its trajectory, its heat ledger, and weight."""

    trajectory: object
    ledger: object
    weight: float = 1.0
    flagged: bool = None

    @property
    def is_flagged(self):
        return self.ledger.r_hi if self.flagged is None else self.flagged


def trip_assets(traj, ledger):
    """Per-asset (minutes, positive deficit, lengths) for one trip."""
    if len(ledger.periods) != len(traj.periods):
        raise AssetError(f"trip {traj.trip_id}: ledger and trajectory disagree on period count")
    out = {}
    for period, rec in zip(traj.periods, ledger.periods):
        if period.conditioned or period.kind == "direct":
            continue
        if period.asset_kind is None or period.asset_id is None:
            raise AssetError(f"trip {traj.trip_id}: {period.kind} period at {period.start.isoformat()} "
                             "has no asset reference")
        key = (period.asset_kind, period.asset_id)
        minutes, deficit, lengths = out.get(key, (0.0, 0.0, []))
        if period.asset_kind == "footpath":
            lengths = lengths + [period.length_m]
        out[key] = (minutes + period.duration_min, deficit + max(rec.exposure, 0.0), lengths)
    return out


def accumulate(impacts):
    """Weighted asset statistics; assets no trip touches are absent."""
    stats = {}
    lengths = defaultdict(list)
    for imp in sorted(impacts, key=lambda i: i.trajectory.trip_id):
        w = float(imp.weight)
        if w < 0:
            raise AssetError(f"trip {imp.trajectory.trip_id}: negative weight")
        flagged = bool(imp.is_flagged)
        for key, (minutes, deficit, lens) in sorted(trip_assets(imp.trajectory, imp.ledger).items()):
            st = stats.get(key)
            if st is None:
                st = stats[key] = AssetStats(*key)
            st.criticality += w * minutes
            st.deficit += w * deficit
            st.incident_count += w
            if flagged:
                st.flagged_count += w
            lengths[key].extend(lens)
    for key, lens in lengths.items():
        if lens:
            stats[key].length_m = sum(lens) / len(lens)
    return dict(sorted(stats.items()))


def _ranks(values):
    order = sorted(values, key=lambda k: (-values[k], k))
    return {k: i + 1 for i, k in enumerate(order)}, order


def prioritize(stats):
    """Scores per asset plus the two ranked key lists (mitigation, adaptation)."""
    # exposure * criticality and vulnerability * incident_count, taken as the sums they reduce to
    mit = {k: s.deficit if s.criticality > 0 else 0.0 for k, s in stats.items()}
    ada = {k: s.flagged_count if s.incident_count > 0 else 0.0 for k, s in stats.items()}
    rank_mit, by_mit = _ranks(mit)
    rank_ada, by_ada = _ranks(ada)
    scores = {k: PriorityScore(mit[k], ada[k], rank_mit[k], rank_ada[k]) for k in stats}
    return scores, by_mit, by_ada


def _fmt(v):
    return "" if v is None else f"{v:.6f}"


def asset_rows(stats, scores):
    for key in sorted(stats):
        s, p = stats[key], scores[key]
        yield [s.kind, s.id, _fmt(s.criticality), _fmt(s.exposure), _fmt(s.vulnerability),
               _fmt(p.mitigation), _fmt(p.adaptation), p.rank_mit, p.rank_adapt,
               _fmt(s.incident_count), _fmt(s.length_m), _fmt(s.criticality_per_mile)]


def write_asset_csv(stats, scores, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ASSET_COLUMNS)
        w.writerows(asset_rows(stats, scores))


def _asset_geometry(net, kind, asset_id, to_coord):
    if kind == "station":
        return {"type": "Point", "coordinates": to_coord(*net.xy(asset_id))}
    if "|" in asset_id:
        a, b = asset_id.split("|", 1)
        return {"type": "LineString", "coordinates": [to_coord(*net.xy(a)), to_coord(*net.xy(b))]}
    stop = asset_id.split(":", 1)[1]
    return {"type": "Point", "coordinates": to_coord(*net.xy(stop))}


def asset_geojson(stats, scores, net):
    """FeatureCollection; lon/lat when the network has a projection, else projected meters."""
    proj = net.projection

    def to_coord(x, y):
        if proj is None:
            return [round(x, 6), round(y, 6)]
        lat, lon = proj.inverse(x, y)
        return [round(lon, 8), round(lat, 8)]

    features = []
    for row in asset_rows(stats, scores):
        props = dict(zip(ASSET_COLUMNS, row))
        for col in ASSET_COLUMNS[2:]:
            v = props[col]
            props[col] = float(v) if isinstance(v, str) and v else (v if v != "" else None)
        features.append({"type": "Feature", "id": f"{row[0]}:{row[1]}",
                         "geometry": _asset_geometry(net, row[0], row[1], to_coord),
                         "properties": props})
    out = {"type": "FeatureCollection", "features": features}
    if proj is None:
        out["crs_note"] = "projected meters"
    return out


def write_asset_geojson(stats, scores, net, path):
    with open(path, "w") as fh:
        json.dump(asset_geojson(stats, scores, net), fh, indent=1, sort_keys=True)
        fh.write("\n")
