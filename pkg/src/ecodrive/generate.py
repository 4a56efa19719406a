"""Synthetic route construction.

Two fixed routes ship with the package: `valley` (a 10 km descent-climb
pair with two red lights, 400 points) exercises parsing and slope
interpolation, and `rolling_hills` (14.4 km, turns, stops, limit changes
and grade changes) segments into exactly fifteen solver segments and
carries the turn-exit stretch used for solver validation (enter at
36 km/h after a turn, reach the next turn at 50 km/h under an 80 km/h
limit). `random_route` builds seeded variations for experiments.
"""

from __future__ import annotations

import numpy as np

from .route import EventType, RoutePoint

_LIMIT = 80.0  # km/h default legal limit for the bundled routes


def _elevation(corners: list[tuple[float, float]], s: np.ndarray) -> np.ndarray:
    xs = np.array([c[0] for c in corners])
    zs = np.array([c[1] for c in corners])
    return np.interp(s, xs, zs)


def _assemble(positions: np.ndarray, elevations: np.ndarray,
              limits: np.ndarray,
              events: dict[float, tuple[EventType, float | None]],
              ) -> list[RoutePoint]:
    """Snap each event onto the nearest grid point and build the list."""
    positions = positions.astype(float).copy()
    taken = set()
    snapped = {}
    for pos, payload in events.items():
        i = int(np.argmin(np.abs(positions - pos)))
        while i in taken:
            i += 1
        taken.add(i)
        positions[i] = pos
        snapped[i] = payload
    points = []
    for i, (s, z, lim) in enumerate(zip(positions, elevations, limits)):
        event, param = snapped.get(i, (None, None))
        points.append(RoutePoint(float(s), float(z), float(lim), event, param))
    return points


def valley_route() -> list[RoutePoint]:
    """10 km valley: flat, 2 km at -2%, 2.5 km back up at +1.6%, flat out.
    Two red lights plus the destination; 400 points. The first light sits
    on the flat at 1.4 km, the second halfway up the climb at 5.6 km.
    Each stop is followed by roughly the distance a full-throttle restart
    needs to reach the limit again (600 m on the flat, 900 m on the +1.6%
    grade), so the runways carry no slack that the solver would have to
    fill with a crawl at the velocity floor."""
    n = 400
    s = np.linspace(0.0, 10_000.0, n)
    corners = [(0.0, 0.0), (2000.0, 0.0), (4000.0, -40.0),
               (6500.0, 0.0), (10_000.0, 0.0)]
    events = {
        1400.0: (EventType.RED_LIGHT, None),
        5600.0: (EventType.RED_LIGHT, None),
        10_000.0: (EventType.DESTINATION, None),
    }
    z = _elevation(corners, s)
    limits = np.full(n, _LIMIT)
    return _assemble(s, z, limits, events)


def rolling_hills_route() -> list[RoutePoint]:
    """14.4 km mixed route that cuts into exactly fifteen segments under
    the default segmentation: turns at 36/50/40 km/h, two red lights, a
    stop sign, a 60 km/h zone, and six grade changes. Stops are followed
    by enough runway that the speed limit is reachable again before the
    next boundary."""
    n = 480
    s = np.linspace(0.0, 14_400.0, n)
    corners = [
        (0.0, 0.0), (3000.0, 0.0),        # flat through the turns
        (4200.0, 24.0),                   # +2% climb out of the red light
        (4800.0, 24.0),                   # flat crest
        (5400.0, 18.0),                   # -1% down into the 60 zone
        (7000.0, 18.0),                   # flat (60 zone + stop)
        (8200.0, -12.0),                  # -2.5% descent
        (10_600.0, -12.0),                # flat through the 40 turn
        (11_000.0, -8.0),                 # +1% rise into the red light
        (13_500.0, -8.0),                 # flat runway
        (13_900.0, -16.0),                # -2% dip
        (14_400.0, -16.0),                # flat finish
    ]
    events = {
        800.0: (EventType.TURN, 36.0),
        1800.0: (EventType.TURN, 50.0),
        3000.0: (EventType.RED_LIGHT, None),
        6000.0: (EventType.LIMIT_CHANGE, None),
        7000.0: (EventType.STOP, None),
        9400.0: (EventType.TURN, 40.0),
        11_000.0: (EventType.RED_LIGHT, None),
        14_400.0: (EventType.DESTINATION, None),
    }
    z = _elevation(corners, s)
    limits = np.where((s >= 6000.0) & (s < 7000.0), 60.0, _LIMIT)
    return _assemble(s, z, limits, events)


def random_route(length: float = 8000.0, n_points: int = 320,
                 seed: int = 0) -> list[RoutePoint]:
    """Seeded synthetic route: smooth rolling elevation plus sparse events.

    Deterministic for a given seed. Events (red lights, stops, turns) are
    dropped at least 600 m apart and never within the final kilometre; the
    last point always carries the destination.
    """
    if length < 2000.0 or n_points < 10:
        raise ValueError("need at least 2 km and 10 points")
    rng = np.random.default_rng(seed)
    s = np.linspace(0.0, length, n_points)
    # Two or three gentle sine components keep grades mostly under ~3%.
    z = np.zeros_like(s)
    for _ in range(int(rng.integers(2, 4))):
        wavelength = rng.uniform(1500.0, 4000.0)
        amplitude = rng.uniform(5.0, 18.0)
        phase = rng.uniform(0.0, 2 * np.pi)
        z += amplitude * np.sin(2 * np.pi * s / wavelength + phase)
    z -= z[0]
    limits = np.full(n_points, _LIMIT)

    events: dict[float, tuple[EventType, float | None]] = {}
    cursor = 800.0
    while cursor < length - 1000.0:
        cursor += rng.uniform(600.0, 2200.0)
        if cursor >= length - 1000.0:
            break
        kind = rng.choice(["red_light", "stop", "turn"])
        if kind == "turn":
            events[round(cursor)] = (EventType.TURN,
                                     float(rng.integers(30, 61)))
        else:
            events[round(cursor)] = (EventType(kind), None)
    events[length] = (EventType.DESTINATION, None)
    return _assemble(s, z, limits, events)
