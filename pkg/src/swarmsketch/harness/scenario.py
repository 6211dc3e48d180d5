"""Scenario files: strict JSON schema plus expansion into runtime objects.

A scenario pins everything an episode needs: the swarm size and seed, the
controller gains, the planner configuration (horizon, cost scalars, kappa
weights, mode radii), the current and goal intentions, and the per-segment
limits. The segment step cap doubles as the controller-steps-per-planner-
step timescale ratio; the planner horizon is the planner-steps-per-goal
ratio.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..controller import ControllerGains, SegmentLimits
from ..errors import InvalidInput
from ..geom import Intention, Polygon
from ..planner import PlannerConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GainsSpec(_Strict):
    alpha: float = Field(default=0.15, gt=0, lt=1)
    k_p: float = Field(default=0.03, gt=0, lt=1)


class IntentionSpec(_Strict):
    shape: list[tuple[float, float]] = Field(min_length=3)
    s: float = Field(default=1.0, gt=0)
    theta: float = 0.0
    c: tuple[float, float] = (0.0, 0.0)

    def to_intention(self) -> Intention:
        return Intention(
            shape=Polygon(np.asarray(self.shape, dtype=float)),
            s=self.s,
            theta=self.theta,
            c=np.asarray(self.c, dtype=float),
        )


class ScatterSpec(_Strict):
    center: tuple[float, float] = (0.0, 0.0)
    extent: float = Field(gt=0)


class InitialSpec(IntentionSpec):
    """Current intention, with optional overrides for the swarm positions."""

    positions: list[tuple[float, float]] | None = None
    scatter: ScatterSpec | None = None


class PlannerSpec(_Strict):
    n: int = Field(default=8, ge=1)
    q: float = Field(default=1.0, gt=0)
    r: float = Field(default=100.0, gt=0)
    q_f: float = Field(default=1500.0, gt=0)
    kappa1: float = Field(default=1.0e6, ge=0)
    kappa2: float = Field(default=0.05, gt=0)
    kappa3: float = Field(default=2.0e4, ge=0)
    radii: list[float] = Field(min_length=1)
    switch_penalty: float = Field(default=0.0, ge=0)

    @field_validator("radii")
    @classmethod
    def _positive_radii(cls, value):
        if any(r <= 0 for r in value):
            raise ValueError("all radii must be positive")
        return value


class LimitsSpec(_Strict):
    max_steps: int = Field(default=2000, ge=1)
    tol_f: float = Field(default=1e-3, gt=0)
    tol_c: float = Field(default=1e-3, gt=0)


class Scenario(_Strict):
    name: str = ""
    agents: int = Field(ge=1)
    seed: int = 0
    gains: GainsSpec = GainsSpec()
    initial: InitialSpec
    goal: IntentionSpec
    planner: PlannerSpec
    limits: LimitsSpec = LimitsSpec()

    def controller_gains(self) -> ControllerGains:
        return ControllerGains(alpha=self.gains.alpha, k_p=self.gains.k_p)

    def planner_config(self) -> PlannerConfig:
        p = self.planner
        return PlannerConfig(
            horizon=p.n,
            agents=self.agents,
            radii=tuple(p.radii),
            q=p.q,
            r=p.r,
            q_f=p.q_f,
            kappa1=p.kappa1,
            kappa2=p.kappa2,
            kappa3=p.kappa3,
            switch_penalty=p.switch_penalty,
        )

    def segment_limits(self) -> SegmentLimits:
        return SegmentLimits(
            max_steps=self.limits.max_steps,
            tol_f=self.limits.tol_f,
            tol_c=self.limits.tol_c,
        )

    def initial_intention(self) -> Intention:
        return self.initial.to_intention()

    def goal_intention(self) -> Intention:
        return self.goal.to_intention()

    def initial_positions(self) -> np.ndarray:
        """Starting swarm positions: explicit list, seeded scatter, or the
        initial intention's filled placement, in that order of precedence."""
        from ..geom import fill_polygon_uniform, place_formation

        if self.initial.positions is not None:
            pos = np.asarray(self.initial.positions, dtype=float)
            if pos.shape != (self.agents, 2):
                raise InvalidInput(
                    f"explicit positions must be ({self.agents}, 2), got {pos.shape}"
                )
            return pos
        if self.initial.scatter is not None:
            rng = np.random.default_rng(self.seed)
            center = np.asarray(self.initial.scatter.center, dtype=float)
            half = self.initial.scatter.extent / 2.0
            return center + rng.uniform(-half, half, (self.agents, 2))
        intent = self.initial_intention()
        formation = fill_polygon_uniform(intent.shape, self.agents)
        return place_formation(formation.z, intent.s, intent.theta, intent.c)


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file; unknown keys are rejected."""
    text = Path(path).read_text()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: not valid JSON: {exc}") from exc
    return scenario_from_dict(payload, source=str(path))


def scenario_from_dict(payload: dict, source: str = "<dict>") -> Scenario:
    try:
        return Scenario.model_validate(payload)
    except ValidationError as exc:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
            for err in exc.errors()
        )
        raise InvalidInput(f"{source}: invalid scenario: {details}") from exc


def bundled_scenario_path(name: str) -> Path:
    """Path to a scenario shipped with the package (e.g. 'paper_fig7')."""
    ref = resources.files("swarmsketch") / "scenarios" / f"{name}.json"
    with resources.as_file(ref) as concrete:
        return Path(concrete)
