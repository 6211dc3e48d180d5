import json

import numpy as np
import pytest

from swarmsketch.errors import InvalidInput
from swarmsketch.harness import (
    bundled_scenario_path,
    load_scenario,
    replay_errors,
    run_episode,
)
from swarmsketch.harness.scenario import scenario_from_dict

MINIMAL = {
    "agents": 6,
    "initial": {"shape": [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]},
    "goal": {
        "shape": [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]],
        "s": 1.5,
        "c": [2.0, 1.0],
    },
    "planner": {"n": 3, "radii": [4.0]},
}


class TestLoadScenario:
    def test_bundled_paper_scenario(self):
        sc = load_scenario(bundled_scenario_path("paper_fig7"))
        assert sc.agents == 50
        assert sc.planner.n == 8
        assert sc.planner.radii == [10.0, 40.0, 150.0]
        assert sc.planner.kappa1 == 1e6
        assert sc.planner.kappa2 == 0.05
        assert sc.planner.kappa3 == 2e4
        assert sc.gains.alpha == 0.15
        assert sc.gains.k_p == 0.03
        assert sc.goal.s == 11.6

    def test_minimal_scenario_fills_defaults(self):
        sc = scenario_from_dict(MINIMAL)
        assert sc.gains.alpha == 0.15
        assert sc.limits.max_steps == 2000
        assert sc.planner.r == 100.0
        assert sc.seed == 0

    def test_unknown_key_rejected_with_field_name(self):
        bad = dict(MINIMAL, turbo=True)
        with pytest.raises(InvalidInput, match="turbo"):
            scenario_from_dict(bad)

    def test_nested_error_names_offending_field(self):
        bad = json.loads(json.dumps(MINIMAL))
        bad["planner"]["radii"] = [-1.0]
        with pytest.raises(InvalidInput, match="planner.radii"):
            scenario_from_dict(bad)

    def test_malformed_file(self, tmp_path):
        target = tmp_path / "broken.json"
        target.write_text("{not json")
        with pytest.raises(InvalidInput, match="not valid JSON"):
            load_scenario(target)

    def test_explicit_positions_shape_checked(self):
        bad = json.loads(json.dumps(MINIMAL))
        bad["initial"]["positions"] = [[0.0, 0.0]] * 3
        sc = scenario_from_dict(bad)
        with pytest.raises(InvalidInput, match="positions"):
            sc.initial_positions()

    def test_scatter_is_seeded(self):
        spec = json.loads(json.dumps(MINIMAL))
        spec["initial"]["scatter"] = {"center": [0.0, 0.0], "extent": 2.0}
        a = scenario_from_dict(spec).initial_positions()
        b = scenario_from_dict(spec).initial_positions()
        assert np.array_equal(a, b)
        spec["seed"] = 99
        c = scenario_from_dict(spec).initial_positions()
        assert not np.array_equal(a, c)


class TestRunEpisode:
    def test_minimal_episode_converges(self):
        sc = scenario_from_dict(MINIMAL)
        trace = run_episode(sc)
        assert len(trace.segments) == 3
        assert all(seg.converged for seg in trace.segments)
        e_f, e_c = trace.final_errors
        assert e_f < 1e-2 and e_c < 1e-2

    def test_goal_equals_initial_trivial_plan(self):
        spec = json.loads(json.dumps(MINIMAL))
        spec["goal"] = dict(spec["initial"])
        sc = scenario_from_dict(spec)
        trace = run_episode(sc)
        assert all(seg.converged for seg in trace.segments)
        assert all(seg.steps_used == 0 for seg in trace.segments)

    def test_identical_seeds_identical_traces(self):
        sc = scenario_from_dict(MINIMAL)
        a = run_episode(sc).to_json()
        b = run_episode(sc).to_json()
        assert a == b

    def test_segment_steps_respect_ratio(self):
        sc = scenario_from_dict(MINIMAL)
        trace = run_episode(sc)
        assert all(seg.steps_used <= sc.limits.max_steps for seg in trace.segments)

    def test_trace_replay_matches_stored_errors(self):
        sc = scenario_from_dict(MINIMAL)
        trace = run_episode(sc)
        payload = json.loads(trace.to_json())
        for record in replay_errors(payload):
            stored_f, stored_c = record["stored"]
            redo_f, redo_c = record["recomputed"]
            assert redo_f == pytest.approx(stored_f, abs=1e-12)
            assert redo_c == pytest.approx(stored_c, abs=1e-12)

    def test_jsonl_structure(self):
        sc = scenario_from_dict(MINIMAL)
        trace = run_episode(sc)
        lines = [json.loads(l) for l in trace.to_jsonl().splitlines()]
        assert lines[0]["kind"] == "header"
        assert lines[-1]["kind"] == "summary"
        steps = [l for l in lines if l["kind"] == "step"]
        assert len(steps) == sum(len(s.times) for s in trace.segments)
        assert {s["segment"] for s in steps} == {1, 2, 3}
        assert lines[-1]["converged"] is True
