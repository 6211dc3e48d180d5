"""Episode orchestration: plan once, then execute every segment in order.

Traces capture the plan and every controller step (including positions) so
an episode can be re-rendered or error-checked offline. Serialization is
canonical and excludes wall-clock timing, so identical scenarios produce
byte-identical trace files.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from ..controller import PlanStep, SegmentTrace, SwarmState, _errors_from_positions, run_segment
from ..planner import Plan, plan as make_plan
from .scenario import Scenario


@dataclass
class EpisodeTrace:
    scenario: Scenario
    plan: Plan
    segments: list[SegmentTrace]
    wall_time_s: float = 0.0  # informational only, never serialized

    @property
    def final_errors(self) -> tuple[float, float]:
        last = self.segments[-1]
        return last.e_f[-1], last.e_c[-1]

    def to_dict(self) -> dict:
        plan_steps = [
            {
                "z": step.z.tolist(),
                "s": step.s,
                "theta": step.theta,
                "c": step.c.tolist(),
                "mode": step.mode,
            }
            for step in self.plan.steps
        ]
        return {
            "scenario": self.scenario.model_dump(),
            "plan": {
                "steps": plan_steps,
                "mode_costs": self.plan.mode_costs.tolist(),
                "morph_cost": self.plan.morph_cost,
                "mode_cost": self.plan.mode_cost,
                "total_cost": self.plan.total_cost,
            },
            "segments": [
                {
                    "times": seg.times,
                    "e_f": seg.e_f,
                    "e_c": seg.e_c,
                    "positions": [p.tolist() for p in seg.positions],
                    "steps_used": seg.steps_used,
                    "converged": seg.converged,
                }
                for seg in self.segments
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_jsonl(self) -> str:
        """Streaming form: a header line, one line per controller step, a
        summary line. Infinite mode costs serialize as nulls."""
        payload = self.to_dict()
        mode_costs = [
            [c if np.isfinite(c) else None for c in row]
            for row in payload["plan"]["mode_costs"]
        ]
        header = {
            "kind": "header",
            "scenario": payload["scenario"],
            "plan": {**payload["plan"], "mode_costs": mode_costs},
        }
        lines = [json.dumps(header, sort_keys=True)]
        for index, seg in enumerate(payload["segments"], start=1):
            mode = payload["plan"]["steps"][index - 1]["mode"]
            for row_i, t in enumerate(seg["times"]):
                lines.append(
                    json.dumps(
                        {
                            "kind": "step",
                            "segment": index,
                            "mode": mode,
                            "t": t,
                            "e_f": seg["e_f"][row_i],
                            "e_c": seg["e_c"][row_i],
                            "positions": seg["positions"][row_i]
                            if row_i < len(seg["positions"])
                            else None,
                        },
                        sort_keys=True,
                    )
                )
        e_f, e_c = self.final_errors
        lines.append(
            json.dumps(
                {
                    "kind": "summary",
                    "segments": len(self.segments),
                    "converged": all(s.converged for s in self.segments),
                    "final_e_f": e_f,
                    "final_e_c": e_c,
                },
                sort_keys=True,
            )
        )
        return "\n".join(lines) + "\n"


def run_episode(scenario: Scenario, record_positions: bool = True) -> EpisodeTrace:
    """Plan from the scenario's current intention and execute all segments."""
    started = time.perf_counter()
    config = scenario.planner_config()
    gains = scenario.controller_gains()
    limits = scenario.segment_limits()
    episode_plan = make_plan(scenario.initial_intention(), scenario.goal_intention(), config)

    state = SwarmState.initial(scenario.initial_positions())
    segments = []
    for step in episode_plan.steps:
        state, segment = run_segment(
            state, step, gains, config.radii, limits, record_positions=record_positions
        )
        segments.append(segment)
    return EpisodeTrace(
        scenario=scenario,
        plan=episode_plan,
        segments=segments,
        wall_time_s=time.perf_counter() - started,
    )


def replay_errors(trace_dict: dict) -> list[dict]:
    """Recompute per-step errors from a trace's stored positions.

    Returns one record per step with the stored and recomputed values;
    used to verify traces are self-consistent and fully replayable.
    """
    out = []
    steps = trace_dict["plan"]["steps"]
    for seg_index, seg in enumerate(trace_dict["segments"], start=1):
        spec = steps[seg_index - 1]
        plan_step = PlanStep(
            z=np.asarray(spec["z"]),
            s=spec["s"],
            c=np.asarray(spec["c"]),
            theta=spec["theta"],
            mode=spec["mode"],
        )
        for row_i, t in enumerate(seg["times"]):
            positions = np.asarray(seg["positions"][row_i])
            e_f, e_c = _errors_from_positions(positions, plan_step)
            out.append(
                {
                    "segment": seg_index,
                    "t": t,
                    "stored": (seg["e_f"][row_i], seg["e_c"][row_i]),
                    "recomputed": (e_f, e_c),
                }
            )
    return out
