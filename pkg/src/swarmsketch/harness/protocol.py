"""Session protocol: newline-delimited JSON messages and the per-session
state machine that interprets them.

Client messages build up a draft intention (vertices, rotation, scale,
centroid) and commit it; the server answers with a plan preview followed by
a stream of state updates while the swarm executes. The engine here is
transport-agnostic: the service layer feeds it parsed messages and forwards
whatever it returns, and drains the execution generator a chunk at a time
so a new commit can cancel and replan from wherever the swarm currently is.
"""
from __future__ import annotations

import json
from typing import Annotated, Iterator, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from ..controller import SwarmState, segment_rounds
from ..errors import InvalidInput, SwarmSketchError
from ..geom import Intention, Polygon, polyline_self_intersects, wrap_angle
from ..planner import plan as make_plan
from .scenario import Scenario


class _Msg(BaseModel):
    model_config = ConfigDict(extra="forbid")


# client -> server ----------------------------------------------------------

class AddVertex(_Msg):
    type: Literal["AddVertex"]
    x: float
    y: float


class ClearShape(_Msg):
    type: Literal["ClearShape"]


class SetRotation(_Msg):
    type: Literal["SetRotation"]
    rad: float


class SetScale(_Msg):
    type: Literal["SetScale"]
    s: float = Field(gt=0)


class SetCentroid(_Msg):
    type: Literal["SetCentroid"]
    x: float
    y: float


class Commit(_Msg):
    type: Literal["Commit"]


class PointerEventMsg(_Msg):
    type: Literal["PointerEvent"]
    kind: Literal["move", "left_click", "right_click", "scroll_up", "scroll_down", "none"]
    x: float
    y: float


ClientMessage = Union[
    AddVertex, ClearShape, SetRotation, SetScale, SetCentroid, Commit, PointerEventMsg
]
_CLIENT_ADAPTER = TypeAdapter(Annotated[ClientMessage, Field(discriminator="type")])


# server -> client ----------------------------------------------------------

class Ack(_Msg):
    type: Literal["Ack"] = "Ack"
    of: str


class PlanPreview(_Msg):
    type: Literal["PlanPreview"] = "PlanPreview"
    shapes: list[list[tuple[float, float]]]
    modes: list[int]


class StateUpdate(_Msg):
    type: Literal["StateUpdate"] = "StateUpdate"
    t: int
    positions: list[tuple[float, float]]
    e_f: float
    e_c: float
    segment: int
    mode: int


class Done(_Msg):
    type: Literal["Done"] = "Done"


class ErrorMsg(_Msg):
    type: Literal["Error"] = "Error"
    msg: str


ServerMessage = Union[Ack, PlanPreview, StateUpdate, Done, ErrorMsg]


def encode(message: BaseModel) -> str:
    """One protocol frame: compact JSON terminated by a newline."""
    return message.model_dump_json() + "\n"


def decode_client_lines(raw: str) -> list[ClientMessage]:
    """Parse newline-delimited client JSON; raises InvalidInput on garbage."""
    messages = []
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
            messages.append(_CLIENT_ADAPTER.validate_python(payload))
        except (json.JSONDecodeError, ValidationError) as exc:
            brief = "; ".join(str(exc).splitlines()[:2])
            raise InvalidInput(f"malformed message: {brief}") from exc
    return messages


_ROTATION_TICK = np.deg2rad(1.0)
_SCALE_TICK = 1.02
_SCALE_FLOOR = 0.01


class SessionEngine:
    """One client's isolated workbench session.

    Holds the live swarm, the current (last reached) intention, and the
    draft the client is editing. ``handle`` answers every non-commit
    message; ``commit`` returns the plan preview plus a generator that
    advances the swarm and yields protocol messages as it goes.
    """

    def __init__(self, scenario: Scenario, stream_every: int = 10):
        if stream_every < 1:
            raise InvalidInput("stream_every must be >= 1")
        self.scenario = scenario
        self.stream_every = stream_every
        self.current = scenario.initial_intention()
        self.swarm = SwarmState.initial(scenario.initial_positions())
        self.pointer = np.zeros(2)
        self.executing = False
        self.draft_vertices: list[tuple[float, float]] = []
        self.draft_theta = self.current.theta
        self.draft_scale = self.current.s
        self.draft_centroid = tuple(self.current.c)
        self.event_log: list[str] = []

    # -- draft edits --------------------------------------------------------

    def handle(self, message: ClientMessage) -> list[BaseModel]:
        self.event_log.append(message.type)
        try:
            if isinstance(message, AddVertex):
                return self._add_vertex(message.x, message.y)
            if isinstance(message, ClearShape):
                self.draft_vertices.clear()
                return [Ack(of="ClearShape")]
            if isinstance(message, SetRotation):
                self.draft_theta = wrap_angle(message.rad)
                return [Ack(of="SetRotation")]
            if isinstance(message, SetScale):
                self.draft_scale = max(message.s, _SCALE_FLOOR)
                return [Ack(of="SetScale")]
            if isinstance(message, SetCentroid):
                self.draft_centroid = (message.x, message.y)
                return [Ack(of="SetCentroid")]
            if isinstance(message, PointerEventMsg):
                return self._pointer_event(message)
            if isinstance(message, Commit):
                raise InvalidInput("Commit must go through SessionEngine.commit")
        except SwarmSketchError as exc:
            return [ErrorMsg(msg=str(exc))]
        return [ErrorMsg(msg=f"unsupported message {message.type!r}")]

    def _add_vertex(self, x: float, y: float) -> list[BaseModel]:
        candidate = self.draft_vertices + [(x, y)]
        if len(candidate) >= 2 and np.allclose(candidate[-2], candidate[-1]):
            return [ErrorMsg(msg="duplicate vertex rejected")]
        if len(candidate) >= 3 and polyline_self_intersects(
            np.asarray(candidate), closed=False
        ):
            return [ErrorMsg(msg="vertex would self-intersect the outline")]
        self.draft_vertices.append((x, y))
        return [Ack(of="AddVertex")]

    def _pointer_event(self, message: PointerEventMsg) -> list[BaseModel]:
        # decoder passthrough: clicks draw, right-clicks place the centroid,
        # scrolls nudge the rotation; moves only track the pointer
        self.pointer = np.array([message.x, message.y])
        if message.kind == "left_click":
            return self._add_vertex(message.x, message.y)
        if message.kind == "right_click":
            self.draft_centroid = (message.x, message.y)
            return [Ack(of="PointerEvent")]
        if message.kind == "scroll_up":
            self.draft_theta = wrap_angle(self.draft_theta + _ROTATION_TICK)
            return [Ack(of="PointerEvent")]
        if message.kind == "scroll_down":
            self.draft_theta = wrap_angle(self.draft_theta - _ROTATION_TICK)
            return [Ack(of="PointerEvent")]
        return [Ack(of="PointerEvent")]

    # -- commit and execution ------------------------------------------------

    def draft_intention(self) -> Intention:
        if len(self.draft_vertices) < 3:
            raise InvalidInput("draw at least 3 vertices before committing")
        return Intention(
            shape=Polygon(np.asarray(self.draft_vertices, dtype=float)),
            s=self.draft_scale,
            theta=self.draft_theta,
            c=np.asarray(self.draft_centroid, dtype=float),
        )

    def commit(self) -> tuple[PlanPreview, Iterator[BaseModel]]:
        """Plan toward the draft and return (preview, execution stream).

        The stream mutates the session's swarm as it is consumed, so
        abandoning it mid-way leaves the swarm wherever it stopped; the
        next commit replans from there.
        """
        goal = self.draft_intention()
        config = self.scenario.planner_config()
        session_plan = make_plan(self.current, goal, config)
        preview = PlanPreview(
            shapes=session_plan.placed_outlines(),
            modes=[step.mode for step in session_plan.steps],
        )

        def execute() -> Iterator[BaseModel]:
            gains = self.scenario.controller_gains()
            limits = self.scenario.segment_limits()
            self.executing = True
            try:
                for index, step in enumerate(session_plan.steps, start=1):
                    radius = config.radii[step.mode - 1]
                    last = None
                    for t, state, e_f, e_c in segment_rounds(
                        self.swarm, step, gains, radius, limits
                    ):
                        self.swarm = state
                        last = (t, e_f, e_c)
                        if t % self.stream_every == 0:
                            yield self._update(index, step.mode, t, e_f, e_c)
                    if last is not None and last[0] % self.stream_every != 0:
                        yield self._update(index, step.mode, *last)
                    self.current = Intention(
                        shape=session_plan.morph_states[index].to_polygon(),
                        s=step.s,
                        theta=step.theta,
                        c=step.c,
                    )
                yield Done()
            finally:
                self.executing = False

        return preview, execute()

    def _update(self, segment: int, mode: int, t: int, e_f: float, e_c: float) -> StateUpdate:
        return StateUpdate(
            t=t,
            positions=[tuple(row) for row in self.swarm.p.tolist()],
            e_f=e_f,
            e_c=e_c,
            segment=segment,
            mode=mode,
        )
