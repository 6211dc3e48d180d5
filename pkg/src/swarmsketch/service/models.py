"""Request/response models for the REST surface."""
from __future__ import annotations

import numpy as np
from pydantic import BaseModel

from ..harness.episode import EpisodeTrace
from ..planner import Plan


class PlanStepModel(BaseModel):
    z: list[tuple[float, float]]
    s: float
    theta: float
    c: tuple[float, float]
    mode: int


class PlanModel(BaseModel):
    steps: list[PlanStepModel]
    shapes: list[list[tuple[float, float]]]
    mode_costs: list[list[float | None]]
    morph_cost: float
    mode_cost: float
    total_cost: float

    @classmethod
    def from_plan(cls, plan: Plan) -> "PlanModel":
        return cls(
            steps=[
                PlanStepModel(
                    z=[tuple(r) for r in step.z.tolist()],
                    s=step.s,
                    theta=step.theta,
                    c=tuple(step.c.tolist()),
                    mode=step.mode,
                )
                for step in plan.steps
            ],
            shapes=[[tuple(v) for v in outline] for outline in plan.placed_outlines()],
            mode_costs=[
                [c if np.isfinite(c) else None for c in row]
                for row in plan.mode_costs.tolist()
            ],
            morph_cost=plan.morph_cost,
            mode_cost=plan.mode_cost,
            total_cost=plan.total_cost,
        )


class SegmentModel(BaseModel):
    times: list[int]
    e_f: list[float]
    e_c: list[float]
    positions: list[list[tuple[float, float]]]
    steps_used: int
    converged: bool


class TraceModel(BaseModel):
    plan: PlanModel
    segments: list[SegmentModel]
    final_e_f: float
    final_e_c: float
    converged: bool

    @classmethod
    def from_trace(cls, trace: EpisodeTrace) -> "TraceModel":
        e_f, e_c = trace.final_errors
        return cls(
            plan=PlanModel.from_plan(trace.plan),
            segments=[
                SegmentModel(
                    times=seg.times,
                    e_f=seg.e_f,
                    e_c=seg.e_c,
                    positions=[[tuple(r) for r in p.tolist()] for p in seg.positions],
                    steps_used=seg.steps_used,
                    converged=seg.converged,
                )
                for seg in trace.segments
            ],
            final_e_f=e_f,
            final_e_c=e_c,
            converged=all(s.converged for s in trace.segments),
        )


class ModeSpectraModel(BaseModel):
    radius: float
    lambda2: float
    lambda2_normalized: float
    lambda2_weighted: float
    connected: bool
    k_p_max: float
    certificate_passes: bool


class SpectraResponse(BaseModel):
    agents: int
    alpha: float
    k_p: float
    modes: list[ModeSpectraModel]


class GestureLabelModel(BaseModel):
    center_s: float
    gesture: str


class PointerEventModel(BaseModel):
    kind: str
    x: float
    y: float
    center_s: float


class DecodeResponse(BaseModel):
    frames: int
    accuracy: float | None
    log_likelihoods: list[float]
    labels: list[GestureLabelModel]
    events: list[PointerEventModel]


class HealthResponse(BaseModel):
    status: str
    version: str
