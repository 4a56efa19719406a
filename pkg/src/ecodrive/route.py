"""Route model: file formats, slope profile, segmentation.

A route is an ordered list of points (position, elevation, speed limit,
optional event). Two on-disk formats carry the same content: a CSV with
columns `position_m, elevation_m, speed_limit_kmh, event, event_param` and a
versioned JSON document. The last point must carry the `destination` event.

Planning consumes the route as segments: stretches cut at events and at
slope-class changes, each with a speed limit and target boundary velocities.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .units import kmh_to_ms, ms_to_kmh

ROUTE_SCHEMA_VERSION = 1


class RouteError(ValueError):
    """A route document failed to parse or validate."""


class EventType(str, Enum):
    RED_LIGHT = "red_light"
    STOP = "stop"
    TURN = "turn"
    LIMIT_CHANGE = "limit_change"
    DESTINATION = "destination"


# Events that force the truck down to the stop-approach velocity.
_STOP_EVENTS = {EventType.RED_LIGHT, EventType.STOP, EventType.DESTINATION}


class SlopeClass(str, Enum):
    NEGLIGIBLE = "negligible"
    UPHILL = "uphill"
    DOWNHILL = "downhill"


@dataclass(frozen=True)
class RoutePoint:
    """One sampled road point. `speed_limit` (km/h) applies from this
    position onward; `event_param` is the advised turn speed in km/h for
    `turn` events and unused otherwise."""

    position: float                    # m from route start
    elevation: float                   # m
    speed_limit: float                 # km/h
    event: EventType | None = None
    event_param: float | None = None


@dataclass(frozen=True)
class SegmentationConfig:
    """Knobs for cutting a route into solver segments. Velocities km/h,
    lengths m, threshold degrees."""

    negligible_slope_deg: float = 0.5
    classification_window: float = 100.0
    min_segment_length: float = 50.0
    stop_velocity: float = 8.0

    def __post_init__(self):
        if self.negligible_slope_deg <= 0.0:
            raise ValueError("negligible_slope_deg must be positive")
        if self.classification_window <= 0.0 or self.min_segment_length <= 0.0:
            raise ValueError("window and minimum segment length must be positive")
        if self.stop_velocity <= 0.0:
            raise ValueError("stop_velocity must be positive")


class SlopeProfile:
    """Continuous road slope built from elevation samples.

    Elevation is linearly interpolated onto an integer-meter grid, each
    one-meter interval yields a gradient sample at its midpoint, and slope
    queries interpolate those midpoints (constant beyond the ends):
    slope(s) = atan(gradient(s)).
    """

    def __init__(self, midpoints: np.ndarray, gradients: np.ndarray):
        if midpoints.shape != gradients.shape or midpoints.size == 0:
            raise ValueError("midpoints and gradients must be equal-length, nonempty")
        self.midpoints = midpoints
        self.gradients = gradients

    @classmethod
    def from_points(cls, points: list[RoutePoint]) -> "SlopeProfile":
        if len(points) < 2:
            raise RouteError("need at least two points for a slope profile")
        pos = np.array([p.position for p in points])
        elev = np.array([p.elevation for p in points])
        start = math.ceil(pos[0])
        stop = math.floor(pos[-1])
        if stop - start >= 2:
            grid = np.arange(start, stop + 1, dtype=float)
            z = np.interp(grid, pos, elev)
            grads = np.diff(z)
            mids = grid[:-1] + 0.5
        else:
            # Degenerate short route: single overall gradient.
            grads = np.array([(elev[-1] - elev[0]) / max(pos[-1] - pos[0], 1e-9)])
            mids = np.array([(pos[0] + pos[-1]) / 2.0])
        return cls(mids, grads)

    @classmethod
    def constant(cls, slope_rad: float) -> "SlopeProfile":
        g = math.tan(slope_rad)
        return cls(np.array([0.0, 1.0]), np.array([g, g]))

    def gradient_at(self, s: float) -> float:
        return float(np.interp(s, self.midpoints, self.gradients))

    def at(self, s: float) -> float:
        """Slope angle in rad at position s."""
        return math.atan(self.gradient_at(s))


def slope_at(points: list[RoutePoint], s: float) -> float:
    """Slope angle at position s, building the profile on the fly."""
    return SlopeProfile.from_points(points).at(s)


@dataclass(frozen=True)
class RouteSegment:
    """One solver unit: [start_position, end_position) with a constant speed
    limit and target boundary velocities. All velocities m/s."""

    index: int
    start_position: float
    end_position: float
    speed_limit: float
    entry_velocity: float
    exit_velocity: float
    slope_class: SlopeClass
    terminating_event: EventType | None
    profile: SlopeProfile = field(repr=False, compare=False)

    @property
    def length(self) -> float:
        return self.end_position - self.start_position

    def slope(self, s: float) -> float:
        return self.profile.at(s)

    @classmethod
    def straight(cls, length: float, slope_rad: float, speed_limit: float,
                 entry_velocity: float, exit_velocity: float,
                 start_position: float = 0.0) -> "RouteSegment":
        """Synthetic constant-slope segment, handy for tests and validation."""
        grade = SlopeClass.NEGLIGIBLE
        if abs(math.degrees(slope_rad)) > 0.5:
            grade = SlopeClass.UPHILL if slope_rad > 0 else SlopeClass.DOWNHILL
        return cls(0, start_position, start_position + length, speed_limit,
                   entry_velocity, exit_velocity, grade, None,
                   SlopeProfile.constant(slope_rad))


# ---------------------------------------------------------------------------
# Parsing and serialization

_CSV_COLUMNS = ["position_m", "elevation_m", "speed_limit_kmh", "event", "event_param"]


def _build_point(position, elevation, speed_limit, event, event_param, where: str):
    if event is not None:
        try:
            event = EventType(event)
        except ValueError:
            raise RouteError(f"{where}: unknown event {event!r}") from None
    if event == EventType.TURN:
        if event_param is None or event_param <= 0.0:
            raise RouteError(f"{where}: turn events need a positive advised speed")
    if speed_limit <= 0.0:
        raise RouteError(f"{where}: speed limit must be positive")
    return RoutePoint(position, elevation, speed_limit, event, event_param)


def _validate_points(points: list[RoutePoint]) -> list[RoutePoint]:
    if len(points) < 2:
        raise RouteError("route needs at least two points")
    for a, b in zip(points, points[1:]):
        if b.position <= a.position:
            raise RouteError(
                f"positions must increase strictly: {a.position} then {b.position}")
    destinations = [p for p in points if p.event == EventType.DESTINATION]
    if not destinations or points[-1].event != EventType.DESTINATION:
        raise RouteError("the last point must carry the destination event")
    if len(destinations) > 1:
        raise RouteError("only the last point may carry the destination event")
    return points


def parse_route_csv(text: str) -> list[RoutePoint]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise RouteError("empty route file")
    header = [h.strip() for h in reader.fieldnames]
    if header != _CSV_COLUMNS:
        raise RouteError(
            f"expected columns {','.join(_CSV_COLUMNS)}, got {','.join(header)}")
    points = []
    for i, row in enumerate(reader, start=2):
        where = f"line {i}"
        try:
            position = float(row["position_m"])
            elevation = float(row["elevation_m"])
            limit = float(row["speed_limit_kmh"])
        except (TypeError, ValueError):
            raise RouteError(f"{where}: malformed numeric field") from None
        event = (row.get("event") or "").strip() or None
        raw_param = (row.get("event_param") or "").strip()
        try:
            param = float(raw_param) if raw_param else None
        except ValueError:
            raise RouteError(f"{where}: malformed event_param") from None
        points.append(_build_point(position, elevation, limit, event, param, where))
    return _validate_points(points)


def parse_route_json(doc) -> list[RoutePoint]:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise RouteError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise RouteError("route JSON must be an object")
    if doc.get("schema_version") != ROUTE_SCHEMA_VERSION:
        raise RouteError(
            f"unsupported schema_version {doc.get('schema_version')!r}")
    raw_points = doc.get("points")
    if not isinstance(raw_points, list):
        raise RouteError("route JSON needs a points array")
    points = []
    for i, rp in enumerate(raw_points):
        where = f"points[{i}]"
        if not isinstance(rp, dict):
            raise RouteError(f"{where}: must be an object")
        try:
            position = float(rp["position_m"])
            elevation = float(rp["elevation_m"])
            limit = float(rp["speed_limit_kmh"])
        except (KeyError, TypeError, ValueError):
            raise RouteError(f"{where}: needs numeric position_m, elevation_m, "
                             "speed_limit_kmh") from None
        event = rp.get("event")
        param = rp.get("event_param")
        if param is not None:
            param = float(param)
        points.append(_build_point(position, elevation, limit, event, param, where))
    return _validate_points(points)


def load_route(path: str | Path) -> list[RoutePoint]:
    """Load a route file; format chosen by extension (.csv or .json)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return parse_route_json(text)
    if path.suffix.lower() == ".csv":
        return parse_route_csv(text)
    raise RouteError(f"unsupported route file type: {path.suffix!r}")


def route_to_json(points: list[RoutePoint]) -> dict:
    return {
        "schema_version": ROUTE_SCHEMA_VERSION,
        "points": [
            {
                "position_m": p.position,
                "elevation_m": p.elevation,
                "speed_limit_kmh": p.speed_limit,
                **({"event": p.event.value} if p.event else {}),
                **({"event_param": p.event_param} if p.event_param is not None else {}),
            }
            for p in points
        ],
    }


def write_route_csv(points: list[RoutePoint], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for p in points:
            writer.writerow([
                f"{p.position:.3f}", f"{p.elevation:.4f}", f"{p.speed_limit:g}",
                p.event.value if p.event else "",
                f"{p.event_param:g}" if p.event_param is not None else "",
            ])


# ---------------------------------------------------------------------------
# Segmentation

def _speed_limit_at(points: list[RoutePoint], s: float) -> float:
    """Limit in effect at position s (km/h): the last point at or before s."""
    limit = points[0].speed_limit
    for p in points:
        if p.position <= s:
            limit = p.speed_limit
        else:
            break
    return limit


def _classify(mean_gradient: float, cfg: SegmentationConfig) -> SlopeClass:
    angle = math.degrees(math.atan(mean_gradient))
    if abs(angle) < cfg.negligible_slope_deg:
        return SlopeClass.NEGLIGIBLE
    return SlopeClass.UPHILL if angle > 0.0 else SlopeClass.DOWNHILL


def _class_boundaries(points: list[RoutePoint], cfg: SegmentationConfig) -> list[float]:
    """Positions where the windowed slope class changes.

    The route is tiled with fixed windows of `classification_window` meters;
    each window is classified by its mean gradient and boundaries appear
    where consecutive windows disagree.
    """
    pos = np.array([p.position for p in points])
    elev = np.array([p.elevation for p in points])
    start, end = pos[0], pos[-1]
    edges = np.arange(start, end, cfg.classification_window)
    edges = np.append(edges, end)
    if edges.size < 3:
        return []
    z = np.interp(edges, pos, elev)
    classes = [
        _classify((z2 - z1) / (e2 - e1), cfg)
        for z1, z2, e1, e2 in zip(z[:-1], z[1:], edges[:-1], edges[1:])
    ]
    return [float(edges[i + 1]) for i in range(len(classes) - 1)
            if classes[i] != classes[i + 1]]


def segment_route(
    points: list[RoutePoint],
    current_velocity: float,
    cfg: SegmentationConfig | None = None,
) -> list[RouteSegment]:
    """Cut a route into solver segments with target boundary velocities.

    Cuts happen at every event and wherever the windowed slope class
    changes; segments shorter than the minimum whose end is a mere slope
    cut merge into their successor. `current_velocity` (m/s) becomes the
    first segment's entry velocity. Boundary targets: stop-type events
    brake to `cfg.stop_velocity`, turns to the advised speed, limit drops
    to the lower limit, slope cuts hold the (lower adjacent) speed limit.
    """
    cfg = cfg or SegmentationConfig()
    points = _validate_points(list(points))
    profile = SlopeProfile.from_points(points)
    start, end = points[0].position, points[-1].position

    events = {p.position: p for p in points if p.event is not None}
    cut_positions = sorted(
        {start, end} | set(events) | set(_class_boundaries(points, cfg)))
    cut_positions = [s for s in cut_positions if start <= s <= end]

    # Merge short slope-cut segments into their successor; event cuts stay.
    def mergeable(bound: float) -> bool:
        return bound != end and bound not in events

    changed = True
    while changed:
        changed = False
        for i in range(1, len(cut_positions) - 1):
            if (cut_positions[i] - cut_positions[i - 1] < cfg.min_segment_length
                    and mergeable(cut_positions[i])):
                del cut_positions[i]
                changed = True
                break

    pos = np.array([p.position for p in points])
    elev = np.array([p.elevation for p in points])
    stop_v = kmh_to_ms(cfg.stop_velocity)

    segments = []
    entry = current_velocity
    bounds = list(zip(cut_positions[:-1], cut_positions[1:]))
    for i, (s0, s1) in enumerate(bounds):
        inner = [p.speed_limit for p in points if s0 < p.position < s1]
        limit = kmh_to_ms(min([_speed_limit_at(points, s0)] + inner))
        z0, z1 = np.interp([s0, s1], pos, elev)
        slope_class = _classify((z1 - z0) / (s1 - s0), cfg)
        event = events.get(s1).event if s1 in events else None

        if event in _STOP_EVENTS:
            exit_v = stop_v
        elif event == EventType.TURN:
            exit_v = kmh_to_ms(events[s1].event_param)
        elif event == EventType.LIMIT_CHANGE:
            exit_v = kmh_to_ms(min(_speed_limit_at(points, s1 - 1e-6),
                                   events[s1].speed_limit))
        else:
            next_limit = kmh_to_ms(_speed_limit_at(points, s1)) if s1 < end else limit
            exit_v = min(limit, next_limit)
        exit_v = max(min(exit_v, limit), stop_v)
        if i + 1 < len(bounds):
            next_lim = kmh_to_ms(_speed_limit_at(points, s1))
            exit_v = min(exit_v, next_lim)

        segments.append(RouteSegment(
            index=i, start_position=float(s0), end_position=float(s1),
            speed_limit=limit, entry_velocity=entry, exit_velocity=exit_v,
            slope_class=slope_class, terminating_event=event, profile=profile))
        entry = exit_v
    return segments


def clamp_entry(segment: RouteSegment, velocity: float,
                floor: float) -> RouteSegment:
    """Copy of `segment` entering at `velocity` clamped into its band."""
    v = min(max(velocity, floor), segment.speed_limit)
    return replace(segment, entry_velocity=v)
