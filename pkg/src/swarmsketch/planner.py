"""Interpreter planner: finite-horizon LQR over a shape/pose tuple plus
per-step communication-mode selection.

The planner state concatenates the (count-matched) polygon vertices with
scale, rotation and centroid into one vector. Identity dynamics driven by
an LQR with a heavy terminal weight produce a gradual, human-legible morph
from the current configuration to the goal; each intermediate state is then
priced per communication mode and the cheapest feasible mode schedule is
selected by backward dynamic programming (which reduces to a per-step
argmin when no switching penalty is configured).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controller import PlanStep
from .errors import InvalidInput, InvalidShape, NumericError, PlanningError
from .geom import Intention, Polygon, fill_polygon_uniform, match_vertex_counts, place_formation, wrap_angle
from .netgraph import build_nu_disk_graph, communication_cost, connectivity_cost


@dataclass(frozen=True)
class PlannerConfig:
    horizon: int
    agents: int
    radii: tuple[float, ...]
    q: float = 1.0
    r: float = 100.0
    q_f: float = 1500.0
    kappa1: float = 1.0e6
    kappa2: float = 0.05
    kappa3: float = 2.0e4
    switch_penalty: float = 0.0
    a_matrix: np.ndarray | None = None  # None means identity dynamics
    b_matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise InvalidInput(f"horizon must be >= 1, got {self.horizon}")
        if self.agents < 1:
            raise InvalidInput(f"agent count must be >= 1, got {self.agents}")
        if not self.radii or any(r <= 0 for r in self.radii):
            raise InvalidInput("need at least one positive communication radius")
        if self.q <= 0 or self.r <= 0 or self.q_f <= 0:
            raise InvalidInput("q, r and q_f must be positive")
        if min(self.kappa1, self.kappa2, self.kappa3) < 0 or self.kappa2 == 0:
            raise InvalidInput("kappa weights must be nonnegative (kappa2 positive)")
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))

    @property
    def n_modes(self) -> int:
        return len(self.radii)


@dataclass(frozen=True)
class MorphState:
    """Flattened planner state: vertex coordinates, then s, theta, c."""

    vector: np.ndarray
    n_vertices: int

    @classmethod
    def from_parts(cls, shape: Polygon, s: float, theta: float, c) -> "MorphState":
        c = np.asarray(c, dtype=float).reshape(2)
        vec = np.concatenate([shape.vertices.ravel(), [float(s), float(theta)], c])
        return cls(vector=vec, n_vertices=shape.n_vertices)

    @classmethod
    def from_intention(cls, intention: Intention) -> "MorphState":
        return cls.from_parts(intention.shape, intention.s, intention.theta, intention.c)

    @property
    def vertices(self) -> np.ndarray:
        return self.vector[: 2 * self.n_vertices].reshape(self.n_vertices, 2)

    @property
    def s(self) -> float:
        return float(self.vector[2 * self.n_vertices])

    @property
    def theta(self) -> float:
        return float(self.vector[2 * self.n_vertices + 1])

    @property
    def c(self) -> np.ndarray:
        return self.vector[2 * self.n_vertices + 2 :]

    def to_polygon(self) -> Polygon:
        return Polygon(self.vertices)

    @property
    def dim(self) -> int:
        return int(self.vector.shape[0])


@dataclass(frozen=True)
class Rollout:
    states: list[MorphState]
    controls: list[np.ndarray]
    cost: float


@dataclass(frozen=True)
class ModeSchedule:
    modes: list[int]              # 1-based, one per step l = 1..N
    cost_table: np.ndarray        # (N, m)
    chosen_costs: list[float]


@dataclass(frozen=True)
class Plan:
    steps: list[PlanStep]
    morph_states: list[MorphState]   # l = 0..N
    controls: list[np.ndarray]
    mode_costs: np.ndarray           # (N, m)
    morph_cost: float
    mode_cost: float

    @property
    def total_cost(self) -> float:
        return self.morph_cost + self.mode_cost

    def placed_outlines(self) -> list[list[tuple[float, float]]]:
        """World-space outline of each intermediate shape under its pose."""
        from .geom import polygon_metrics, rotation_matrix

        outlines = []
        for state, step in zip(self.morph_states[1:], self.steps):
            centroid = polygon_metrics(state.to_polygon()).centroid
            rot_t = rotation_matrix(step.theta).T
            world = step.c[None, :] + step.s * (state.vertices - centroid) @ rot_t
            outlines.append([tuple(v) for v in world.tolist()])
        return outlines


def riccati_lqr(a, b, q, r, q_f, horizon: int):
    """Backward Riccati recursion for the finite-horizon quadratic cost.

    Returns (gains, values): ``gains[l]`` is the feedback matrix applied at
    step l and ``values[l]`` the cost-to-go matrix, with values[horizon] the
    terminal weight.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    r = np.atleast_2d(np.asarray(r, dtype=float))
    q_f = np.atleast_2d(np.asarray(q_f, dtype=float))
    if horizon < 1:
        raise InvalidInput(f"horizon must be >= 1, got {horizon}")
    values = [None] * (horizon + 1)
    gains = [None] * horizon
    values[horizon] = q_f
    for l in range(horizon - 1, -1, -1):
        p_next = values[l + 1]
        inner = r + b.T @ p_next @ b
        try:
            gain = np.linalg.solve(inner, b.T @ p_next @ a)
        except np.linalg.LinAlgError as exc:
            raise NumericError("singular R + B^T P B in Riccati recursion") from exc
        gains[l] = gain
        values[l] = q + a.T @ p_next @ a - a.T @ p_next @ b @ gain
    return gains, values


def morph_rollout(start: MorphState, goal: MorphState, config: PlannerConfig) -> Rollout:
    """Roll the planner state toward the goal under the LQR feedback.

    Both states must already share the same vertex count. The running cost
    is Q-weighted state error plus R-weighted control effort, with the
    terminal error weighted by Q_f.
    """
    if start.dim != goal.dim or start.n_vertices != goal.n_vertices:
        raise InvalidInput(
            f"planner states disagree in dimension ({start.dim} vs {goal.dim}); "
            "match vertex counts first"
        )
    dim = start.dim
    a = np.eye(dim) if config.a_matrix is None else np.asarray(config.a_matrix, dtype=float)
    b = np.eye(dim) if config.b_matrix is None else np.asarray(config.b_matrix, dtype=float)
    q = config.q * np.eye(dim)
    r = config.r * np.eye(dim)
    q_f = config.q_f * np.eye(dim)
    gains, _ = riccati_lqr(a, b, q, r, q_f, config.horizon)

    h_goal = goal.vector
    states = [start]
    controls = []
    cost = 0.0
    h = start.vector.copy()
    for l in range(config.horizon):
        err = h - h_goal
        u = -gains[l] @ err
        cost += float(err @ q @ err + u @ r @ u)
        h = a @ h + b @ u
        controls.append(u)
        states.append(MorphState(vector=h.copy(), n_vertices=start.n_vertices))
    err_final = h - h_goal
    cost += float(err_final @ q_f @ err_final)
    return Rollout(states=states, controls=controls, cost=cost)


def step_mode_costs(state: MorphState, config: PlannerConfig) -> np.ndarray:
    """Connectivity + communication cost of holding one state in each mode."""
    shape = state.to_polygon()
    formation = fill_polygon_uniform(shape, config.agents)
    world = place_formation(formation.z, state.s, state.theta, state.c)
    costs = np.empty(config.n_modes)
    for j, radius in enumerate(config.radii):
        graph = build_nu_disk_graph(world, radius)
        j_con = connectivity_cost(graph, config.kappa1, config.kappa2)
        j_com = communication_cost(graph, config.kappa3)
        costs[j] = j_con + j_com
    return costs


def mode_schedule(
    states: list[MorphState], config: PlannerConfig, method: str = "dp"
) -> ModeSchedule:
    """Pick the cheapest feasible mode for each rollout step.

    ``method="dp"`` runs the backward recursion with the configured
    switching penalty; ``method="argmin"`` ignores the penalty and picks
    each step independently. The two agree whenever the penalty is zero.
    """
    if method not in ("dp", "argmin"):
        raise InvalidInput(f"unknown schedule method {method!r}")
    horizon = len(states) - 1
    table = np.empty((horizon, config.n_modes))
    for l in range(1, horizon + 1):
        table[l - 1] = step_mode_costs(states[l], config)
        if not np.isfinite(table[l - 1]).any():
            raise PlanningError(f"every communication mode is infeasible at step {l}")

    if method == "argmin":
        modes = [int(np.argmin(row)) + 1 for row in table]
    else:
        penalty = config.switch_penalty
        not_same = 1.0 - np.eye(config.n_modes)
        # value[l][mu] = cheapest cost of steps l..N-1 given step l uses mu
        value = np.zeros((horizon + 1, config.n_modes))
        for l in range(horizon - 1, -1, -1):
            tail = (value[l + 1][None, :] + penalty * not_same).min(axis=1)
            value[l] = table[l] + tail
        modes = [int(np.argmin(value[0])) + 1]
        for l in range(1, horizon):
            here = value[l] + penalty * not_same[modes[-1] - 1]
            modes.append(int(np.argmin(here)) + 1)

    chosen = [float(table[l, modes[l] - 1]) for l in range(horizon)]
    return ModeSchedule(modes=modes, cost_table=table, chosen_costs=chosen)


def plan(start: Intention, goal: Intention, config: PlannerConfig) -> Plan:
    """Full planning pipeline: match shapes, roll out, schedule modes.

    The rotation target is unwrapped to the nearest equivalent angle before
    the rollout so interpolation never jumps across the +-pi seam; every
    intermediate shape is validated and a self-intersecting one aborts the
    plan.
    """
    shape_a, shape_b = match_vertex_counts(start.shape, goal.shape)
    theta_goal = start.theta + wrap_angle(goal.theta - start.theta)
    h0 = MorphState.from_parts(shape_a, start.s, start.theta, start.c)
    h_goal = MorphState.from_parts(shape_b, goal.s, theta_goal, goal.c)

    rollout = morph_rollout(h0, h_goal, config)
    steps_states = rollout.states
    for l, state in enumerate(steps_states[1:], start=1):
        if state.s <= 0:
            raise PlanningError(f"intermediate scaling is nonpositive at step {l}")
        try:
            state.to_polygon()
        except InvalidShape as exc:
            raise PlanningError(f"intermediate shape at step {l} is invalid: {exc}") from exc

    schedule = mode_schedule(steps_states, config)
    steps = []
    for l in range(1, config.horizon + 1):
        state = steps_states[l]
        formation = fill_polygon_uniform(state.to_polygon(), config.agents)
        steps.append(
            PlanStep(
                z=formation.z,
                s=state.s,
                c=state.c.copy(),
                theta=state.theta,
                mode=schedule.modes[l - 1],
            )
        )
    return Plan(
        steps=steps,
        morph_states=steps_states,
        controls=rollout.controls,
        mode_costs=schedule.cost_table,
        morph_cost=rollout.cost,
        mode_cost=float(sum(schedule.chosen_costs)),
    )
