# -*- coding: utf-8 -*-
#
# Copyright © 2024 The netmark authors. All rights reserved.
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

"""Reading networks, patterns, marks and trip logs; aggregating trips into
monthly station profiles; writing results.

All files are UTF-8, comma separated, with LF line endings. Floats are
written with 17 significant digits so that every file reads back to the
same doubles.
"""

import calendar
import csv
import json
import logging
import math
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, \
    Tuple, Union

import numpy as np
from shapely.geometry import shape
from sqlalchemy import func
from sqlalchemy.orm import Session

from netmark import NetmarkError, make_session_factory
from netmark.enums import ExportFormat, NetworkFormat
from netmark.envel import EnvelopeResult
from netmark.estim import SummaryCurve, SummarySurface
from netmark.marks import FunctionalMark, MarkedPattern, TimeGrid
from netmark.netgeom import DEFAULT_SNAP_TOL, Coordinate, LinearNetwork, \
    NetworkPoint, build_network, snap_point, summarize
from netmark.schema import Trip
from netmark.utilities import format_bool, format_float, month_label, \
    parse_month

log = logging.getLogger(__name__)

DEFAULT_SNAP_THRESHOLD = 250.0
"""Stations further than this (meters) from the network are rejected."""

TRIP_COLUMNS = ("station_id", "departure_time", "distance_m")

MOBI_COLUMNS = ("Departure station", "Departure", "Covered distance (m)")
"""Column names of the Mobi bike share system data extracts."""

PathLike = Union[Path, str]


class DataIOError(NetmarkError):
    """Exception raised for errors reading or writing data files."""
    pass


class ParseError(DataIOError):
    def __init__(self, path: PathLike, index: int, reason: str,
                 kind: str = "row"):
        """Exception raised when a record of an input file cannot be parsed.

        Args:
            path: The file.
            index: The 1-based index of the record; data rows are counted
                   after the header.
            reason: What is wrong.
            kind: The record kind, "row" or "feature".
        """
        self.path = path
        self.index = index
        self.kind = kind
        super().__init__("{}: {} {}: {}".format(path, kind, index, reason))


class EmptyMonth(DataIOError):
    """Exception raised when no trip falls in the requested month."""
    pass


class SnapTooFar(DataIOError):
    def __init__(self, station_id: str, distance: float, threshold: float):
        """Exception raised when a station lies too far from the network."""
        self.station_id = station_id
        self.distance = distance
        self.threshold = threshold
        super().__init__("Station {} is {} m from the network, beyond the "
                         "{} m threshold".format(station_id, distance,
                                                 threshold))


class IoError(DataIOError):
    """Exception raised when a file cannot be read or written."""
    pass


@dataclass(frozen=True)
class TripRecord(object):
    """A bike share trip, attributed to its departure station."""
    departure_station_id: str
    departure_time: datetime
    distance: float

    def __post_init__(self):
        if not self.departure_station_id:
            raise ValueError("A trip must have a departure station")
        if not (self.distance >= 0 and math.isfinite(self.distance)):
            raise ValueError("Trip distance must be finite and >= 0, "
                             "was {}".format(self.distance))


class DailyMean(NamedTuple):
    station_id: str
    day: date
    trips: int
    mean_distance: float


class MonthSummary(NamedTuple):
    month: str
    stations: int
    trips: int
    mean_distance: float


class TripAggregate(NamedTuple):
    """Mean trip distance per (station, day) of one month, with the month
    totals."""
    month: str
    days: int
    daily: Tuple[DailyMean, ...]
    summary: MonthSummary


class StationProfileSet(object):
    """Monthly distance profiles of departure stations as a marked pattern.

    Each station's mark is its mean trip distance per calendar day. Days
    without trips carry the station's month mean and are flagged in filled.
    """

    def __init__(self, month: str, station_ids: Sequence[str],
                 coords: Sequence[Coordinate], snap_distances: np.ndarray,
                 pattern: MarkedPattern, filled: np.ndarray):
        self.month = month
        self.station_ids = tuple(station_ids)
        self.coords = tuple(coords)
        self.snap_distances = snap_distances
        self.pattern = pattern
        self.filled = filled

    @property
    def grid(self) -> TimeGrid:
        return self.pattern.grid

    @property
    def profiles(self) -> Tuple[FunctionalMark, ...]:
        return self.pattern.marks

    def __repr__(self):
        return "<StationProfileSet: {} stations={} days={}>".format(
            self.month, len(self.station_ids), len(self.grid))


def _open_read(path: PathLike):
    try:
        return open(path, "r", newline="", encoding="utf-8")
    except OSError as e:
        raise IoError("Failed to open {} for reading: {}".format(path, e))


def _open_write(path: PathLike):
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as e:
        raise IoError("Failed to open {} for writing: {}".format(path, e))


def _csv_rows(path: PathLike, required: Sequence[str]):
    """Yields (1-based row index, row dict) of a CSV file with a header
    containing the required columns."""
    with _open_read(path) as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(path, 0, "missing columns {} in header "
                                      "{}".format(missing, header),
                             kind="header")
        for i, row in enumerate(reader, start=1):
            yield i, row


def _float(path: PathLike, index: int, row: dict, column: str) -> float:
    value = row.get(column)
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ParseError(path, index, "invalid {} value "
                                      "'{}'".format(column, value))
    if not math.isfinite(x):
        raise ParseError(path, index, "non-finite {} value "
                                      "'{}'".format(column, value))
    return x


def _network_format(path: PathLike) -> NetworkFormat:
    suffix = Path(path).suffix.lower()
    if suffix in (".geojson", ".json"):
        return NetworkFormat.GEOJSON
    return NetworkFormat.CSV


def _read_network_csv(path: PathLike):
    raw, ids = [], []
    for i, row in _csv_rows(path, ("seg_id", "x1", "y1", "x2", "y2")):
        try:
            seg_id = int(row["seg_id"])
        except (TypeError, ValueError):
            raise ParseError(path, i, "invalid seg_id "
                                      "'{}'".format(row["seg_id"]))
        a = (_float(path, i, row, "x1"), _float(path, i, row, "y1"))
        b = (_float(path, i, row, "x2"), _float(path, i, row, "y2"))
        raw.append((a, b))
        ids.append(seg_id)

    return raw, ids


def _read_network_geojson(path: PathLike):
    with _open_read(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(path, e.lineno, "invalid JSON: {}".format(e.msg),
                             kind="line")

    if doc.get("type") == "FeatureCollection":
        features = doc.get("features", [])
    elif doc.get("type") == "Feature":
        features = [doc]
    else:
        features = [{"type": "Feature", "geometry": doc}]

    raw = []
    for i, feature in enumerate(features, start=1):
        try:
            geom = shape(feature["geometry"])
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ParseError(path, i, "invalid geometry: {}".format(e),
                             kind="feature")

        if geom.geom_type == "LineString":
            lines = [geom]
        elif geom.geom_type == "MultiLineString":
            lines = list(geom.geoms)
        else:
            raise ParseError(path, i, "expected a LineString, found a "
                                      "{}".format(geom.geom_type),
                             kind="feature")

        for line in lines:
            coords = [(float(c[0]), float(c[1])) for c in line.coords]
            if len(coords) < 2:
                raise ParseError(path, i, "a LineString needs at least two "
                                          "vertices", kind="feature")
            raw.extend(zip(coords[:-1], coords[1:]))

    return raw, None


def load_network(path: PathLike, fmt: Optional[NetworkFormat] = None,
                 snap_tol: float = DEFAULT_SNAP_TOL) -> LinearNetwork:
    """Loads a network from a segment CSV (seg_id,x1,y1,x2,y2) or from
    GeoJSON LineString features, each decomposed into its consecutive
    vertex pairs.

    Args:
        path: The network file.
        fmt: The file format. Optional, inferred from the file suffix.
        snap_tol: Endpoint merge tolerance in meters.

    Returns: LinearNetwork
    """
    if fmt is None:
        fmt = _network_format(path)

    if fmt == NetworkFormat.GEOJSON:
        raw, ids = _read_network_geojson(path)
    else:
        raw, ids = _read_network_csv(path)

    net = build_network(raw, snap_tol=snap_tol, segment_ids=ids)
    s = summarize(net)
    log.info("Loaded network {}: {} nodes, {} segments, {} components, "
             "{} border nodes, length {}".format(path, s.nodes, s.segments,
                                                 s.components, s.border_nodes,
                                                 s.total_length))
    return net


def load_pattern(path: PathLike, net: LinearNetwork,
                 snap_threshold: Optional[float] = None) \
        -> Tuple[List[str], List[NetworkPoint]]:
    """Loads point ids and locations from a CSV with columns
    point_id,seg_id,offset or point_id,x,y. Planar coordinates are snapped
    to the network.

    Args:
        path: The pattern file.
        net: The network the points lie on.
        snap_threshold: Largest accepted snap distance. Optional.

    Returns: Tuple[List[str], List[NetworkPoint]]
    """
    with _open_read(path) as f:
        header = next(csv.reader(f), [])
    planar = "seg_id" not in header and "x" in header and "y" in header
    required = ("point_id", "x", "y") if planar else \
        ("point_id", "seg_id", "offset")

    ids, pts = [], []
    for i, row in _csv_rows(path, required):
        if planar:
            xy = (_float(path, i, row, "x"), _float(path, i, row, "y"))
            pt, dist = snap_point(net, xy)
            if snap_threshold is not None and dist > snap_threshold:
                raise SnapTooFar(row["point_id"], dist, snap_threshold)
        else:
            try:
                seg_id = int(row["seg_id"])
            except (TypeError, ValueError):
                raise ParseError(path, i, "invalid seg_id "
                                          "'{}'".format(row["seg_id"]))
            pt = NetworkPoint(seg_id, _float(path, i, row, "offset"))
            try:
                net.locate(pt)
            except NetmarkError as e:
                raise ParseError(path, i, e.message)

        ids.append(row["point_id"])
        pts.append(pt)

    if len(set(ids)) != len(ids):
        raise DataIOError("Duplicate point ids in {}".format(path))

    log.info("Loaded {} points from {}".format(len(pts), path))
    return ids, pts


def load_marks(path: PathLike) -> Tuple[List[str], np.ndarray, TimeGrid]:
    """Loads function-valued marks from a CSV with columns
    point_id,t_1,...,t_T, one row per point. The suffixes of the t_ columns
    are the timestamps.

    Returns: Tuple[List[str], ndarray, TimeGrid]
    """
    with _open_read(path) as f:
        header = next(csv.reader(f), [])

    t_columns = [c for c in header if c.startswith("t_")]
    if not t_columns:
        raise ParseError(path, 0, "no t_ columns in header "
                                  "{}".format(header), kind="header")
    try:
        timestamps = [float(c[2:]) for c in t_columns]
        grid = TimeGrid(timestamps)
    except (ValueError, NetmarkError) as e:
        raise ParseError(path, 0, "invalid time columns: {}".format(e),
                         kind="header")

    ids, rows = [], []
    for i, row in _csv_rows(path, ["point_id"] + t_columns):
        ids.append(row["point_id"])
        rows.append([_float(path, i, row, c) for c in t_columns])

    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(grid))
    return ids, values, grid


def load_marked_pattern(net: LinearNetwork, pattern_path: PathLike,
                        marks_path: PathLike) -> MarkedPattern:
    """Loads a pattern and its marks, matching rows by point id."""
    ids, pts = load_pattern(pattern_path, net)
    mark_ids, values, grid = load_marks(marks_path)

    row_of = {pid: i for i, pid in enumerate(mark_ids)}
    missing = [pid for pid in ids if pid not in row_of]
    if missing or len(mark_ids) != len(ids):
        raise DataIOError("The points of {} and the marks of {} do not "
                          "match; e.g. missing marks for "
                          "{}".format(pattern_path, marks_path, missing[:5]))

    return MarkedPattern(net, pts, values[[row_of[pid] for pid in ids]], grid)


def load_station_coords(path: PathLike) -> Dict[str, Coordinate]:
    """Loads station coordinates from a CSV with columns station_id,x,y."""
    coords = {}
    for i, row in _csv_rows(path, ("station_id", "x", "y")):
        coords[row["station_id"]] = (_float(path, i, row, "x"),
                                     _float(path, i, row, "y"))
    return coords


def _parse_time(value: str) -> datetime:
    v = value.strip()
    if v.endswith("Z"):
        v = v[:-1] + "+00:00"
    return datetime.fromisoformat(v)


def read_trips(path: PathLike, columns: Sequence[str] = TRIP_COLUMNS,
               skip_invalid: bool = False) -> List[TripRecord]:
    """Reads trips from a CSV file.

    Args:
        path: The trips file.
        columns: The names of the departure station, ISO-8601 departure
                 time and distance (meters) columns.
        skip_invalid: Skip, rather than reject, rows that do not parse.

    Returns: List[TripRecord]
    """
    station_col, time_col, distance_col = columns

    trips = []
    skipped = 0
    for i, row in _csv_rows(path, columns):
        try:
            try:
                when = _parse_time(row[time_col] or "")
            except ValueError:
                raise ParseError(path, i, "invalid departure time "
                                          "'{}'".format(row[time_col]))
            distance = _float(path, i, row, distance_col)
            try:
                trips.append(TripRecord((row[station_col] or "").strip(),
                                        when, distance))
            except ValueError as e:
                raise ParseError(path, i, str(e))
        except ParseError as e:
            if not skip_invalid:
                raise
            log.debug("Skipping {}".format(e))
            skipped += 1

    if skipped:
        log.warning("Skipped {} invalid rows of {}".format(skipped, path))
    log.info("Read {} trips from {}".format(len(trips), path))
    return trips


def _load_trips(session: Session, trips: Iterable[TripRecord]):
    session.add_all(Trip(t.departure_station_id, t.departure_time,
                         t.distance) for t in trips)
    session.flush()


def _aggregate_month(session: Session, month: str) -> TripAggregate:
    year, mon = parse_month(month)
    label = "{:04d}-{:02d}".format(year, mon)

    q = session.query(Trip.station_id, Trip.day,
                      func.count(Trip.id), func.sum(Trip.distance)). \
        filter(Trip.month == label). \
        group_by(Trip.station_id, Trip.day). \
        order_by(Trip.station_id, Trip.day)

    daily, sums = [], []
    for station_id, day, n, total in q.all():
        daily.append(DailyMean(station_id, day, int(n), float(total) / n))
        sums.append(float(total))

    if not daily:
        raise EmptyMonth("No trips depart in {}".format(label))

    trips = sum(d.trips for d in daily)
    stations = len({d.station_id for d in daily})
    summary = MonthSummary(label, stations, trips, math.fsum(sums) / trips)

    log.info("{}: {} stations, {} trips, mean distance {}".format(
        label, stations, trips, summary.mean_distance))
    return TripAggregate(label, calendar.monthrange(year, mon)[1],
                         tuple(daily), summary)


def aggregate_months(trips: Iterable[TripRecord], months: Sequence[str],
                     session: Optional[Session] = None) \
        -> List[TripAggregate]:
    """Aggregates trips into mean distances per departure station and
    calendar day, for each of several months.

    The trips are added to the session's trip table and aggregated there.
    Without a session an in-memory SQLite database is used.

    Raises:
        EmptyMonth: No trip departs in one of the months.
    """
    own_session = session is None
    if own_session:
        session = make_session_factory("sqlite://")()

    try:
        _load_trips(session, trips)
        return [_aggregate_month(session, m) for m in months]
    finally:
        if own_session:
            session.close()


def aggregate_trips(trips: Iterable[TripRecord], month: str,
                    session: Optional[Session] = None) -> TripAggregate:
    """Aggregates trips into mean distances per departure station and
    calendar day of one month (YYYY-MM), with the month totals. Stations
    without a trip that month are absent.

    Raises:
        EmptyMonth: No trip departs in the month.
    """
    return aggregate_months(trips, [month], session)[0]


def profiles_from_aggregate(agg: TripAggregate, net: LinearNetwork,
                            station_coords: Dict[str, Coordinate],
                            snap_threshold: float = DEFAULT_SNAP_THRESHOLD) \
        -> StationProfileSet:
    """Builds the station profiles of a month as a marked pattern.

    Each station is snapped to its nearest network location and marked by
    its mean trip distance on each calendar day. A day without trips takes
    the station's month mean.

    Args:
        agg: A month aggregate.
        net: The network.
        station_coords: Planar station coordinates by station id.
        snap_threshold: Largest accepted snap distance in meters.

    Returns: StationProfileSet

    Raises:
        SnapTooFar: A station lies beyond the threshold from the network.
    """
    station_ids = sorted({d.station_id for d in agg.daily})
    missing = [s for s in station_ids if s not in station_coords]
    if missing:
        raise DataIOError("No coordinates for {} stations, e.g. "
                          "{}".format(len(missing), missing[:5]))

    row = {s: i for i, s in enumerate(station_ids)}
    n, days = len(station_ids), agg.days
    totals = np.zeros((n, days))
    counts = np.zeros((n, days), dtype=np.int64)
    for d in agg.daily:
        i, k = row[d.station_id], d.day.day - 1
        totals[i, k] = d.mean_distance * d.trips
        counts[i, k] = d.trips

    month_mean = totals.sum(axis=1) / counts.sum(axis=1)
    values = np.repeat(month_mean[:, None], days, axis=1)
    for d in agg.daily:
        values[row[d.station_id], d.day.day - 1] = d.mean_distance
    filled = counts == 0

    pts, snaps = [], []
    for s in station_ids:
        pt, dist = snap_point(net, station_coords[s])
        if dist > snap_threshold:
            raise SnapTooFar(s, dist, snap_threshold)
        pts.append(pt)
        snaps.append(dist)

    n_filled = int(filled.sum())
    if n_filled:
        log.warning("{}: filled {} of {} station days without trips with "
                    "the station month mean".format(agg.month, n_filled,
                                                    filled.size))

    pattern = MarkedPattern(net, pts, values, TimeGrid.regular(days))
    return StationProfileSet(agg.month, station_ids,
                             [station_coords[s] for s in station_ids],
                             np.array(snaps), pattern, filled)


def _write_rows(path: PathLike, header: Sequence[str],
                rows: Iterable[Sequence[str]],
                comments: Sequence[str] = ()):
    with _open_write(path) as f:
        try:
            for c in comments:
                f.write("# {}\n".format(c))
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        except OSError as e:
            raise IoError("Failed to write {}: {}".format(path, e))


def _write_json(path: PathLike, doc: dict):
    with _open_write(path) as f:
        try:
            json.dump(doc, f, indent=2)
            f.write("\n")
        except OSError as e:
            raise IoError("Failed to write {}: {}".format(path, e))


def export_curve(curve: SummaryCurve, path: PathLike,
                 fmt: ExportFormat = ExportFormat.CSV):
    """Writes a global curve as rows of stat,r,value,masked."""
    stat = curve.stat_id.value
    r = curve.rgrid.r_values
    if fmt == ExportFormat.JSON:
        _write_json(path, {
            "stat": stat,
            "raw": curve.raw,
            "bandwidth": curve.rgrid.bandwidth,
            "rows": [{"r": float(r[i]),
                      "value": float(curve.values[i]),
                      "masked": bool(curve.masked[i])}
                     for i in range(len(r))]})
        return

    _write_rows(path, ("stat", "r", "value", "masked"),
                ((stat, format_float(r[i]), format_float(curve.values[i]),
                  format_bool(curve.masked[i])) for i in range(len(r))))


def export_surface(surface: SummarySurface, path: PathLike,
                   fmt: ExportFormat = ExportFormat.CSV):
    """Writes a pointwise surface in long format, rows of
    stat,r,t,value,masked ordered by r then t."""
    stat = surface.stat_id.value
    r = surface.rgrid.r_values
    t = surface.grid.timestamps
    masked = surface.masked
    cells = [(i, k) for i in range(len(r)) for k in range(len(t))]

    if fmt == ExportFormat.JSON:
        _write_json(path, {
            "stat": stat,
            "bandwidth": surface.rgrid.bandwidth,
            "rows": [{"r": float(r[i]), "t": float(t[k]),
                      "value": float(surface.values[i, k]),
                      "masked": bool(masked[i, k])} for i, k in cells]})
        return

    _write_rows(path, ("stat", "r", "t", "value", "masked"),
                ((stat, format_float(r[i]), format_float(t[k]),
                  format_float(surface.values[i, k]),
                  format_bool(masked[i, k])) for i, k in cells))


def export_envelope(result: EnvelopeResult, path: PathLike,
                    fmt: ExportFormat = ExportFormat.CSV):
    """Writes an envelope test result. The CSV starts with a comment line
    carrying the p-value, followed by rows of r,observed,lower,upper,outside
    (r,t,... for surface envelopes)."""
    obs = result.observed
    r = obs.rgrid.r_values
    outside = result.outside

    if result.surface:
        t = obs.grid.timestamps
        cells = [(i, k) for i in range(len(r)) for k in range(len(t))]
        keys = [(format_float(r[i]), format_float(t[k])) for i, k in cells]
        header = ("r", "t", "observed", "lower", "upper", "outside")
    else:
        cells = [(i,) for i in range(len(r))]
        keys = [(format_float(r[i]),) for i in range(len(r))]
        header = ("r", "observed", "lower", "upper", "outside")

    if fmt == ExportFormat.JSON:
        _write_json(path, {
            "stat": obs.stat_id.value,
            "p_value": result.p_value,
            "n_perm": result.n_perm,
            "alpha": result.alpha,
            "seed": result.seed,
            "rows": [dict(zip(header,
                              [float(x) for x in key] +
                              [float(obs.values[c]),
                               float(result.lower[c]),
                               float(result.upper[c]),
                               bool(outside[c])]))
                     for key, c in zip(keys, cells)]})
        return

    _write_rows(path, header,
                (key + (format_float(obs.values[c]),
                        format_float(result.lower[c]),
                        format_float(result.upper[c]),
                        format_bool(outside[c]))
                 for key, c in zip(keys, cells)),
                comments=["p_value={}".format(format_float(result.p_value))])


def export_pattern(p: MarkedPattern, points_path: PathLike,
                   marks_path: PathLike,
                   point_ids: Optional[Sequence[str]] = None):
    """Writes a pattern's points (point_id,seg_id,offset) and marks
    (point_id,t_1,...,t_T). Point ids default to 0..N-1."""
    if point_ids is None:
        point_ids = [str(i) for i in range(p.n)]
    if len(point_ids) != p.n:
        raise DataIOError("{} point ids for {} points".format(len(point_ids),
                                                              p.n))

    _write_rows(points_path, ("point_id", "seg_id", "offset"),
                ((pid, str(x.segment_id), format_float(x.offset))
                 for pid, x in zip(point_ids, p.points)))

    t_columns = ["t_" + format_float(t) for t in p.grid.timestamps]
    _write_rows(marks_path, ["point_id"] + t_columns,
                ([pid] + [format_float(v) for v in p.values[i]]
                 for i, pid in enumerate(point_ids)))


def export_profiles(profiles: StationProfileSet, points_path: PathLike,
                    marks_path: PathLike,
                    stations_path: Optional[PathLike] = None):
    """Writes station profiles as a pattern keyed by station id, and
    optionally the station table
    station_id,x,y,seg_id,offset,snap_distance,filled_days."""
    export_pattern(profiles.pattern, points_path, marks_path,
                   point_ids=profiles.station_ids)

    if stations_path is not None:
        header = ("station_id", "x", "y", "seg_id", "offset",
                  "snap_distance", "filled_days")
        rows = []
        for i, s in enumerate(profiles.station_ids):
            x, y = profiles.coords[i]
            pt = profiles.pattern.points[i]
            rows.append((s, format_float(x), format_float(y),
                         str(pt.segment_id), format_float(pt.offset),
                         format_float(profiles.snap_distances[i]),
                         str(int(profiles.filled[i].sum()))))
        _write_rows(stations_path, header, rows)


def export_summary(summaries: Sequence[MonthSummary], path: PathLike):
    """Writes monthly totals as rows of month,stations,trips,mean_distance."""
    _write_rows(path, ("month", "stations", "trips", "mean_distance"),
                ((s.month, str(s.stations), str(s.trips),
                  format_float(s.mean_distance)) for s in summaries))


def trip_months(trips: Sequence[TripRecord]) -> List[str]:
    """Returns the sorted month labels the trips depart in."""
    return sorted({month_label(t.departure_time) for t in trips})
