"""swarmsketch: sketch a formation, plan legible intermediate shapes, and
drive a simulated swarm to them with a decentralized controller."""

__version__ = "0.1.0"

from .controller import (
    ControllerGains,
    PlanStep,
    SegmentLimits,
    SwarmState,
    run_segment,
    stability_gain_bound,
)
from .geom import BehaviorGoal, Formation, Intention, Polygon, fill_polygon_uniform, intention_to_goal
from .netgraph import CommGraph, SpectralSummary, build_nu_disk_graph, spectral_summary
from .planner import MorphState, Plan, PlannerConfig, plan

__all__ = [
    "ControllerGains",
    "PlanStep",
    "SegmentLimits",
    "SwarmState",
    "run_segment",
    "stability_gain_bound",
    "BehaviorGoal",
    "Formation",
    "Intention",
    "Polygon",
    "fill_polygon_uniform",
    "intention_to_goal",
    "CommGraph",
    "SpectralSummary",
    "build_nu_disk_graph",
    "spectral_summary",
    "MorphState",
    "Plan",
    "PlannerConfig",
    "plan",
]
