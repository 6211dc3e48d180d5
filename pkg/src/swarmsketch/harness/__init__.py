"""Scenario configuration, episode orchestration and the session protocol."""

from .episode import EpisodeTrace, replay_errors, run_episode
from .scenario import Scenario, bundled_scenario_path, load_scenario
from .protocol import SessionEngine

__all__ = [
    "EpisodeTrace",
    "replay_errors",
    "run_episode",
    "Scenario",
    "bundled_scenario_path",
    "load_scenario",
    "SessionEngine",
]
