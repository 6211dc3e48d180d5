"""FastAPI application: REST endpoints for batch work plus the WebSocket
session protocol that drives the browser client.

Each WebSocket connection owns an isolated ``SessionEngine``. Messages are
newline-delimited JSON (a frame may carry several lines); malformed input
gets an ``Error`` reply and the session survives. A ``Commit`` received
while an execution is streaming cancels it and replans from wherever the
swarm currently is.
"""
from __future__ import annotations

import asyncio
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..controller import stability_gain_bound
from ..decoder import decode_session, session_from_dict
from ..errors import SwarmSketchError
from ..harness.episode import run_episode
from ..harness.protocol import Commit, ErrorMsg, SessionEngine, decode_client_lines, encode
from ..harness.scenario import Scenario, bundled_scenario_path, load_scenario
from ..netgraph import build_nu_disk_graph, spectral_summary
from ..planner import plan as make_plan
from .models import (
    DecodeResponse,
    GestureLabelModel,
    HealthResponse,
    ModeSpectraModel,
    PlanModel,
    PointerEventModel,
    SpectraResponse,
    TraceModel,
)


def create_app(
    scenario: Scenario | None = None,
    stream_every: int = 10,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service around a base scenario (sessions start from it)."""
    base = scenario or load_scenario(bundled_scenario_path("desk_square"))
    app = FastAPI(title="swarmsketch", version=__version__)
    app.state.scenario = base
    app.state.stream_every = stream_every

    @app.get("/api/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/api/scenario", response_model=Scenario)
    def base_scenario() -> Scenario:
        return app.state.scenario

    @app.post("/api/plan", response_model=PlanModel)
    def plan_endpoint(request: Scenario) -> PlanModel:
        try:
            result = make_plan(
                request.initial_intention(),
                request.goal_intention(),
                request.planner_config(),
            )
        except SwarmSketchError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return PlanModel.from_plan(result)

    @app.post("/api/run", response_model=TraceModel)
    def run_endpoint(request: Scenario) -> TraceModel:
        try:
            trace = run_episode(request)
        except SwarmSketchError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return TraceModel.from_trace(trace)

    @app.post("/api/spectra", response_model=SpectraResponse)
    def spectra_endpoint(request: Scenario) -> SpectraResponse:
        try:
            positions = request.initial_positions()
            modes = []
            for radius in request.planner.radii:
                graph = build_nu_disk_graph(positions, radius)
                spectra = spectral_summary(graph)
                cert = stability_gain_bound(
                    spectra, request.gains.alpha, request.gains.k_p
                )
                modes.append(
                    ModeSpectraModel(
                        radius=radius,
                        lambda2=spectra.lambda2,
                        lambda2_normalized=spectra.lambda2_normalized,
                        lambda2_weighted=spectra.lambda2_weighted,
                        connected=spectra.connected,
                        k_p_max=cert.k_p_max,
                        certificate_passes=cert.is_m_matrix,
                    )
                )
        except SwarmSketchError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return SpectraResponse(
            agents=request.agents,
            alpha=request.gains.alpha,
            k_p=request.gains.k_p,
            modes=modes,
        )

    @app.post("/api/decode", response_model=DecodeResponse)
    def decode_endpoint(request: dict) -> DecodeResponse:
        try:
            session = session_from_dict(request)
            report = decode_session(session)
        except SwarmSketchError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return DecodeResponse(
            frames=len(report.labels),
            accuracy=report.accuracy,
            log_likelihoods=report.log_likelihoods,
            labels=[
                GestureLabelModel(center_s=l.center_s, gesture=l.gesture)
                for l in report.labels
            ],
            events=[
                PointerEventModel(
                    kind=e.kind, x=e.position[0], y=e.position[1], center_s=e.center_s
                )
                for e in report.events
            ],
        )

    @app.websocket("/ws/session")
    async def session_socket(socket: WebSocket) -> None:
        await socket.accept()
        engine = SessionEngine(app.state.scenario, stream_every=app.state.stream_every)
        outbound: asyncio.Queue = asyncio.Queue()
        execution_task: asyncio.Task | None = None

        async def sender() -> None:
            try:
                while True:
                    message = await outbound.get()
                    await socket.send_text(encode(message))
            except (WebSocketDisconnect, RuntimeError):
                return

        async def execute(stream) -> None:
            # one chunk per iteration (stream_every controller rounds);
            # cancellation lands between chunks, never mid-round
            try:
                for update in stream:
                    await outbound.put(update)
                    await asyncio.sleep(0)
            except asyncio.CancelledError:
                stream.close()
                raise

        send_task = asyncio.create_task(sender())
        try:
            while True:
                raw = await socket.receive_text()
                try:
                    messages = decode_client_lines(raw)
                except SwarmSketchError as exc:
                    await outbound.put(ErrorMsg(msg=str(exc)))
                    continue
                for message in messages:
                    if isinstance(message, Commit):
                        if execution_task is not None and not execution_task.done():
                            execution_task.cancel()
                            try:
                                await execution_task
                            except asyncio.CancelledError:
                                pass
                        try:
                            preview, stream = engine.commit()
                        except SwarmSketchError as exc:
                            await outbound.put(ErrorMsg(msg=str(exc)))
                            continue
                        await outbound.put(preview)
                        execution_task = asyncio.create_task(execute(stream))
                    else:
                        for reply in engine.handle(message):
                            await outbound.put(reply)
        except WebSocketDisconnect:
            pass
        finally:
            if execution_task is not None and not execution_task.done():
                execution_task.cancel()
            send_task.cancel()

    static = Path(static_dir) if static_dir else _default_static_dir()
    if static is not None and static.is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="ui")

    return app


def _default_static_dir() -> Path | None:
    candidate = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None
