"""HTTP advisory backend: create a trip, read the plan, query advice at a
road position, and override the advised exit velocity of a segment.

Sessions live in memory. Each trip holds one immutable plan snapshot plus a
revision counter; an override bumps the revision, returns immediately, and a
worker thread re-solves the affected segment before swapping the snapshot in
one move, so readers always see a complete plan. Progress lands on a
server-push event stream (`recompute-started`, `recompute-done`,
`no-advice`) that clients rejoin with their last-seen revision.

Units at this boundary: velocities km/h, positions m, fuel kg.
"""

from __future__ import annotations

import asyncio
import json
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .costs import CostWeights
from .params import TruckParameters, default_parameters
from .planner import TripPlan, advice_at, plan_trip, plan_to_dict, recompute_from
from .route import RouteError, parse_route_json, route_to_json
from .solver import SolverConfig
from .units import kmh_to_ms, ms_to_kmh

_BUNDLED = {"valley": "valley_route", "rolling-hills": "rolling_hills_route"}

_SSE_KEEPALIVE_S = 15.0


class TripRequest(BaseModel):
    """Route document plus per-trip solver knobs. Exactly one of `route`
    (inline document) or `bundled` (name of a packaged demo route) is
    required."""

    route: dict | None = None
    bundled: str | None = None
    initial_velocity_kmh: float | None = None
    step_length_m: float = 1.0
    fuel_weight: float | None = None
    time_weight: float | None = None
    parallel: bool = True


class OverrideRequest(BaseModel):
    segment_index: int
    actual_velocity_kmh: float
    reason: str = ""


@dataclass
class _Trip:
    """One in-memory session. `lock` guards the snapshot swap and the
    single-recompute flag; holders never solve under it."""

    trip_id: str
    route_doc: dict
    plan: TripPlan
    revision: int = 1
    busy: bool = False
    cursor_segment: int = 0
    cursor_position: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)
    subscribers: list[tuple[asyncio.AbstractEventLoop, asyncio.Queue]] = \
        field(default_factory=list)


def _publish(trip: _Trip, event: str, data: dict) -> None:
    """Queue one event for every live stream. Safe from worker threads."""
    payload = json.dumps(data)
    with trip.lock:
        subscribers = list(trip.subscribers)
    for loop, q in subscribers:
        loop.call_soon_threadsafe(q.put_nowait, (event, payload))


def _no_advice_segments(plan: TripPlan) -> list[int]:
    return [ps.segment.index for ps in plan.segments if ps.solution is None]


def _summary(trip: _Trip) -> dict:
    plan = trip.plan
    return {
        "segments": len(plan.segments),
        "total_fuel_kg": plan.total_fuel,
        "total_duration_s": plan.total_duration,
        "incomplete": plan.incomplete,
        "route_length_m": plan.route_length,
        "initial_velocity_kmh": ms_to_kmh(plan.initial_velocity),
        "no_advice_segments": _no_advice_segments(plan),
    }


def _load_route(req: TripRequest):
    if (req.route is None) == (req.bundled is None):
        raise HTTPException(422, "provide exactly one of 'route' or 'bundled'")
    if req.bundled is not None:
        if req.bundled not in _BUNDLED:
            raise HTTPException(
                422, f"unknown bundled route {req.bundled!r}; "
                f"choose from {sorted(_BUNDLED)}")
        from . import generate
        return getattr(generate, _BUNDLED[req.bundled])()
    try:
        return parse_route_json(req.route)
    except RouteError as exc:
        raise HTTPException(422, str(exc)) from None


def create_app(params: TruckParameters | None = None,
               ui_dir: str | None = None) -> FastAPI:
    """Build the service app. `params` pins the truck for every trip;
    `ui_dir` optionally mounts a built frontend at the web root."""
    params = params or default_parameters()
    app = FastAPI(title="ecodrive advisory service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])
    trips: dict[str, _Trip] = {}
    app.state.trips = trips
    app.state.params = params

    def get_trip(trip_id: str) -> _Trip:
        trip = trips.get(trip_id)
        if trip is None:
            raise HTTPException(404, f"unknown trip {trip_id!r}")
        return trip

    @app.post("/trips", status_code=201)
    def create_trip(req: TripRequest):
        points = _load_route(req)
        try:
            config = SolverConfig(step_length=req.step_length_m)
            defaults = CostWeights()
            weights = CostWeights(
                fuel_weight=(req.fuel_weight if req.fuel_weight is not None
                             else defaults.fuel_weight),
                time_weight=(req.time_weight if req.time_weight is not None
                             else defaults.time_weight))
            v0 = (kmh_to_ms(req.initial_velocity_kmh)
                  if req.initial_velocity_kmh is not None
                  else kmh_to_ms(points[0].speed_limit))
            plan = plan_trip(points, v0, weights, config, params,
                             parallel=req.parallel)
        except (ValueError, RouteError) as exc:
            raise HTTPException(422, str(exc)) from None
        trip = _Trip(trip_id=uuid.uuid4().hex[:12],
                     route_doc=route_to_json(points), plan=plan)
        trips[trip.trip_id] = trip
        return {"trip_id": trip.trip_id, "revision": trip.revision,
                "summary": _summary(trip)}

    @app.get("/trips/{trip_id}/plan")
    def get_plan(trip_id: str, revision: int | None = None):
        trip = get_trip(trip_id)
        with trip.lock:
            rev = trip.revision
            plan = trip.plan
        if revision is not None and revision == rev:
            return Response(status_code=304)
        body = plan_to_dict(plan)
        body["trip_id"] = trip_id
        body["revision"] = rev
        body["route"] = trip.route_doc["points"]
        return body

    @app.get("/trips/{trip_id}/advice")
    def get_advice(trip_id: str, position: float = Query(...)):
        trip = get_trip(trip_id)
        with trip.lock:
            rev = trip.revision
            plan = trip.plan
        try:
            doc = advice_at(plan, position)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from None
        with trip.lock:
            trip.cursor_segment = doc["segment_index"]
            trip.cursor_position = position
        return {**doc, "trip_id": trip_id, "revision": rev,
                "position_m": position}

    @app.post("/trips/{trip_id}/override", status_code=202)
    def override(trip_id: str, req: OverrideRequest):
        trip = get_trip(trip_id)
        floor = kmh_to_ms(trip.plan.config.velocity_floor)
        v = kmh_to_ms(req.actual_velocity_kmh)
        with trip.lock:
            if trip.busy:
                raise HTTPException(
                    409, "a recompute is already in flight for this trip")
            plan = trip.plan
            if not 0 <= req.segment_index < len(plan.segments):
                raise HTTPException(
                    422, f"segment index {req.segment_index} out of range")
            limit = plan.segments[req.segment_index].segment.speed_limit
            if not floor - 1e-9 <= v <= limit + 1e-9:
                raise HTTPException(
                    422, f"override velocity {req.actual_velocity_kmh:.1f} "
                    f"km/h outside [{ms_to_kmh(floor):.1f}, "
                    f"{ms_to_kmh(limit):.1f}] km/h")
            trip.busy = True
            new_revision = trip.revision + 1

        _publish(trip, "recompute-started",
                 {"revision": new_revision, "segment": req.segment_index})

        def worker():
            try:
                new_plan = recompute_from(plan, req.segment_index, v)
            except Exception:
                with trip.lock:
                    trip.busy = False
                raise
            with trip.lock:
                trip.plan = new_plan
                trip.revision = new_revision
                trip.busy = False
            nxt = req.segment_index + 1
            if nxt < len(new_plan.segments) \
                    and new_plan.segments[nxt].solution is None:
                _publish(trip, "no-advice", {"segment": nxt})
            _publish(trip, "recompute-done", {"revision": new_revision})

        threading.Thread(target=worker, daemon=True).start()
        return {"trip_id": trip_id, "revision": new_revision,
                "reason": req.reason}

    @app.get("/trips/{trip_id}/events")
    async def events(trip_id: str, revision: int | None = None):
        trip = get_trip(trip_id)

        async def stream():
            q: asyncio.Queue = asyncio.Queue()
            loop = asyncio.get_running_loop()
            with trip.lock:
                trip.subscribers.append((loop, q))
                current = trip.revision
            try:
                yield _sse("connected", json.dumps({"revision": current}))
                # A reconnecting client that missed a recompute only needs
                # the latest revision to refetch.
                if revision is not None and revision < current:
                    yield _sse("recompute-done",
                               json.dumps({"revision": current}))
                while True:
                    try:
                        event, payload = await asyncio.wait_for(
                            q.get(), timeout=_SSE_KEEPALIVE_S)
                    except asyncio.TimeoutError:
                        yield ": keepalive\n\n"
                        continue
                    yield _sse(event, payload)
            finally:
                with trip.lock:
                    trip.subscribers.remove((loop, q))

        return StreamingResponse(
            stream(), media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "Connection": "keep-alive"})

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _sse(event: str, payload: str) -> str:
    return f"event: {event}\ndata: {payload}\n\n"
