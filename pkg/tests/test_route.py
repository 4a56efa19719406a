"""Route model: slope profiles, parsing, segmentation."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ecodrive.generate import random_route, rolling_hills_route, valley_route
from ecodrive.route import (EventType, RouteError, RoutePoint, RouteSegment,
                            SegmentationConfig, SlopeClass, SlopeProfile,
                            clamp_entry, load_route, parse_route_csv,
                            parse_route_json, route_to_json, segment_route,
                            write_route_csv)
from ecodrive.units import kmh_to_ms


def _pt(position, elevation, limit=80.0, event=None, param=None):
    return RoutePoint(position, elevation, limit, event, param)


# ---------------------------------------------------------------------------
# Slope profile


def test_single_interval_gradient():
    prof = SlopeProfile.from_points([_pt(0, 0), _pt(100, 5)])
    for s in (0.0, 12.3, 50.0, 100.0):
        assert prof.at(s) == pytest.approx(math.atan(0.05), rel=1e-12)


def test_flat_profile_is_exactly_zero():
    prof = SlopeProfile.from_points([_pt(0, 10), _pt(400, 10), _pt(900, 10)])
    assert all(prof.at(s) == 0.0 for s in np.linspace(0, 900, 37))


def test_triangle_profile_antisymmetry():
    pts = [_pt(0, 0), _pt(500, 25), _pt(1000, 0)]
    prof = SlopeProfile.from_points(pts)
    for s in np.linspace(0, 1000, 101):
        assert prof.at(s) == pytest.approx(-prof.at(1000.0 - s), abs=1e-12)
    assert prof.at(100) == pytest.approx(math.atan(0.05), rel=1e-12)
    assert prof.at(900) == pytest.approx(-math.atan(0.05), rel=1e-12)


def test_constant_profile():
    prof = SlopeProfile.constant(0.02)
    assert prof.at(-5.0) == pytest.approx(0.02, rel=1e-12)
    assert prof.at(1e6) == pytest.approx(0.02, rel=1e-12)


def test_short_route_single_gradient():
    prof = SlopeProfile.from_points([_pt(0, 0), _pt(1.5, 0.15)])
    assert prof.at(0.7) == pytest.approx(math.atan(0.1), rel=1e-9)


def test_profile_validation():
    with pytest.raises(RouteError):
        SlopeProfile.from_points([_pt(0, 0)])
    with pytest.raises(ValueError):
        SlopeProfile(np.array([0.0]), np.array([]))


def test_straight_segment_classification():
    seg = RouteSegment.straight(500.0, 0.0, 22.0, 20.0, 18.0)
    assert seg.length == 500.0
    assert seg.slope_class is SlopeClass.NEGLIGIBLE
    up = RouteSegment.straight(500.0, math.radians(0.6), 22.0, 20.0, 18.0)
    assert up.slope_class is SlopeClass.UPHILL
    down = RouteSegment.straight(500.0, math.radians(-0.6), 22.0, 20.0, 18.0)
    assert down.slope_class is SlopeClass.DOWNHILL
    assert down.slope(123.0) == pytest.approx(math.radians(-0.6), rel=1e-12)


# ---------------------------------------------------------------------------
# Parsing and round trips


def _tiny_csv(rows):
    header = "position_m,elevation_m,speed_limit_kmh,event,event_param\n"
    return header + "\n".join(rows) + "\n"


def test_csv_round_trip(tmp_path):
    pts = valley_route()
    path = tmp_path / "route.csv"
    write_route_csv(pts, path)
    back = load_route(path)
    assert len(back) == len(pts)
    for a, b in zip(pts, back):
        assert b.position == pytest.approx(a.position, abs=1e-3)
        assert b.elevation == pytest.approx(a.elevation, abs=1e-4)
        assert b.speed_limit == a.speed_limit
        assert b.event == a.event
    events = {p.position: p.event for p in back if p.event}
    assert events == {1400.0: EventType.RED_LIGHT,
                      5600.0: EventType.RED_LIGHT,
                      10000.0: EventType.DESTINATION}


def test_json_round_trip(tmp_path):
    pts = rolling_hills_route()
    doc = route_to_json(pts)
    assert parse_route_json(doc) == pts
    assert parse_route_json(json.dumps(doc)) == pts
    path = tmp_path / "route.json"
    path.write_text(json.dumps(doc))
    assert load_route(path) == pts


def test_csv_header_must_match():
    bad = "position_m,elevation_m,limit,event,event_param\n0,0,80,,\n"
    with pytest.raises(RouteError, match="expected columns"):
        parse_route_csv(bad)
    with pytest.raises(RouteError, match="empty"):
        parse_route_csv("")


def test_csv_errors_carry_line_numbers():
    text = _tiny_csv(["0,0,80,,", "oops,0,80,,", "100,0,80,destination,"])
    with pytest.raises(RouteError, match="line 3"):
        parse_route_csv(text)


def test_unknown_event_rejected():
    text = _tiny_csv(["0,0,80,,", "100,0,80,teleport,"])
    with pytest.raises(RouteError, match="unknown event"):
        parse_route_csv(text)


def test_turn_needs_advised_speed():
    text = _tiny_csv(["0,0,80,,", "50,0,80,turn,", "100,0,80,destination,"])
    with pytest.raises(RouteError, match="advised speed"):
        parse_route_csv(text)


def test_positions_strictly_increasing():
    text = _tiny_csv(["0,0,80,,", "0,0,80,,", "100,0,80,destination,"])
    with pytest.raises(RouteError, match="increase strictly"):
        parse_route_csv(text)


def test_destination_rules():
    with pytest.raises(RouteError, match="destination"):
        parse_route_csv(_tiny_csv(["0,0,80,,", "100,0,80,,"]))
    dup = _tiny_csv(["0,0,80,destination,", "100,0,80,destination,"])
    with pytest.raises(RouteError, match="only the last"):
        parse_route_csv(dup)


def test_nonpositive_limit_rejected():
    text = _tiny_csv(["0,0,0,,", "100,0,80,destination,"])
    with pytest.raises(RouteError, match="speed limit"):
        parse_route_csv(text)


def test_json_schema_version_checked():
    doc = route_to_json(valley_route())
    doc["schema_version"] = 99
    with pytest.raises(RouteError, match="schema_version"):
        parse_route_json(doc)
    with pytest.raises(RouteError, match="JSON"):
        parse_route_json("{nope")


def test_load_route_unknown_extension(tmp_path):
    path = tmp_path / "route.xml"
    path.write_text("<route/>")
    with pytest.raises(RouteError, match="unsupported route file type"):
        load_route(path)


# ---------------------------------------------------------------------------
# Segmentation


def test_valley_segmentation():
    segs = segment_route(valley_route(), kmh_to_ms(80.0))
    assert len(segs) == 6
    assert [sg.terminating_event for sg in segs] == [
        EventType.RED_LIGHT, None, None, EventType.RED_LIGHT, None,
        EventType.DESTINATION]
    assert [sg.slope_class for sg in segs] == [
        SlopeClass.NEGLIGIBLE, SlopeClass.NEGLIGIBLE, SlopeClass.DOWNHILL,
        SlopeClass.UPHILL, SlopeClass.UPHILL, SlopeClass.NEGLIGIBLE]
    stops = [sg for sg in segs if sg.terminating_event]
    assert all(sg.exit_velocity == kmh_to_ms(8.0) for sg in stops)
    assert [sg.end_position for sg in stops] == [1400.0, 5600.0, 10000.0]


def test_rolling_hills_segmentation():
    segs = segment_route(rolling_hills_route(), kmh_to_ms(80.0))
    assert len(segs) == 15
    turns = [sg for sg in segs if sg.terminating_event == EventType.TURN]
    assert [sg.exit_velocity * 3.6 for sg in turns] == \
        pytest.approx([36.0, 50.0, 40.0])
    drop = next(sg for sg in segs
                if sg.terminating_event == EventType.LIMIT_CHANGE)
    assert drop.exit_velocity == kmh_to_ms(60.0)
    after = segs[drop.index + 1]
    assert after.speed_limit == kmh_to_ms(60.0)
    assert after.entry_velocity == kmh_to_ms(60.0)


def _check_invariants(points, segs, v0, cfg):
    stop_v = kmh_to_ms(cfg.stop_velocity)
    assert segs[0].start_position == points[0].position
    assert segs[-1].end_position == points[-1].position
    assert segs[0].entry_velocity == v0
    assert segs[-1].terminating_event is EventType.DESTINATION
    for sg in segs:
        assert sg.length > 0.0
        assert stop_v <= sg.exit_velocity <= sg.speed_limit + 1e-12
        assert sg.index == segs.index(sg)
    for a, b in zip(segs, segs[1:]):
        assert a.end_position == b.start_position
        assert a.exit_velocity == b.entry_velocity
        # a boundary target never exceeds what the next segment allows
        assert a.exit_velocity <= b.speed_limit + 1e-12
    event_positions = {p.position for p in points if p.event is not None}
    assert event_positions <= {sg.end_position for sg in segs}


def test_valley_invariants():
    pts = valley_route()
    cfg = SegmentationConfig()
    _check_invariants(pts, segment_route(pts, kmh_to_ms(72.0), cfg),
                      kmh_to_ms(72.0), cfg)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_random_route_invariants(seed):
    pts = random_route(seed=seed)
    cfg = SegmentationConfig()
    v0 = kmh_to_ms(50.0)
    _check_invariants(pts, segment_route(pts, v0, cfg), v0, cfg)


def test_short_slope_cuts_merge_forward():
    segs = segment_route(valley_route(), kmh_to_ms(80.0),
                         SegmentationConfig(min_segment_length=50.0))
    for sg in segs:
        if sg.terminating_event is None:
            continue
        # event cuts stay even when short; slope-only cuts got merged
    non_event = [sg for sg in segs if sg.terminating_event is None]
    assert all(sg.length >= 50.0 for sg in non_event)


def test_limit_change_uses_lower_of_both_limits():
    pts = [
        _pt(0, 0, limit=60.0),
        _pt(500, 0, limit=80.0, event=EventType.LIMIT_CHANGE),
        _pt(1000, 0, limit=80.0, event=EventType.DESTINATION),
    ]
    segs = segment_route(pts, kmh_to_ms(60.0))
    # raising the limit: boundary still honors the slower old limit
    assert segs[0].exit_velocity == kmh_to_ms(60.0)
    assert segs[1].speed_limit == kmh_to_ms(80.0)


def test_segmentation_config_validation():
    with pytest.raises(ValueError):
        SegmentationConfig(negligible_slope_deg=0.0)
    with pytest.raises(ValueError):
        SegmentationConfig(min_segment_length=-1.0)
    with pytest.raises(ValueError):
        SegmentationConfig(stop_velocity=0.0)


def test_clamp_entry():
    seg = RouteSegment.straight(100.0, 0.0, kmh_to_ms(80.0),
                                kmh_to_ms(50.0), kmh_to_ms(50.0))
    floor = kmh_to_ms(8.0)
    assert clamp_entry(seg, kmh_to_ms(5.0), floor).entry_velocity == floor
    assert clamp_entry(seg, kmh_to_ms(95.0), floor).entry_velocity == \
        seg.speed_limit
    kept = clamp_entry(seg, kmh_to_ms(42.0), floor)
    assert kept.entry_velocity == kmh_to_ms(42.0)
    assert kept.exit_velocity == seg.exit_velocity
    assert kept.end_position == seg.end_position
