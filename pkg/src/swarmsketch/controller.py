"""Decentralized second-order formation controller.

Each agent runs three coupled updates per synchronous round:

* a shape-stabilizing relaxation toward its slot in the rotated, scaled
  target formation, averaging (p_j + v_j) over graph neighbors,
* a dynamic-average-consensus estimate of the swarm centroid, fed by its
  own one-step position increment,
* a proportional pull of that centroid estimate toward the commanded one.

The same dynamics admit a dense linear form X(t+1) = A X(t) + F over the
stacked state X = [p; v; c_hat; q] with q(t) = p(t-1); ``assemble_system``
builds it and the desired state is its fixed point. Gain admissibility is
certified through a 3x3 M-matrix built from the graph's Fiedler values.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NumericError
from .geom import rotation_matrix
from .netgraph import CONNECTIVITY_TOL, CommGraph, SpectralSummary, build_nu_disk_graph, spectral_summary


@dataclass(frozen=True)
class ControllerGains:
    alpha: float
    k_p: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise InvalidInput(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (0.0 < self.k_p < 1.0):
            raise InvalidInput(f"k_p must lie in (0, 1), got {self.k_p}")


@dataclass(frozen=True)
class PlanStep:
    """One intermediate subgoal: formation, pose, and communication mode."""

    z: np.ndarray          # (M, 2) centroid-centered relative positions
    s: float
    c: np.ndarray          # (2,)
    theta: float
    mode: int              # 1-based index into the scenario's radii table

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).reshape(2))
        if z.ndim != 2 or z.shape[1] != 2:
            raise InvalidInput(f"formation must be (M, 2), got {z.shape}")
        if np.abs(z.mean(axis=0)).max() > 1e-9:
            raise InvalidInput("formation must be centroid-centered")
        if self.mode < 1:
            raise InvalidInput(f"mode index must be >= 1, got {self.mode}")

    def world_positions(self) -> np.ndarray:
        return self.c[None, :] + self.s * self.z @ rotation_matrix(self.theta).T


@dataclass
class SwarmState:
    """Positions, velocities, centroid estimates and delayed positions."""

    p: np.ndarray
    v: np.ndarray
    c_hat: np.ndarray
    q: np.ndarray

    @classmethod
    def initial(cls, p0, v0=None) -> "SwarmState":
        """Standard initialization: c_hat(0) = q(0) = p(0).

        This places the state on the invariant manifold where the mean of
        the centroid estimates tracks the true centroid with one-step delay.
        """
        p = np.asarray(p0, dtype=float).copy()
        v = np.zeros_like(p) if v0 is None else np.asarray(v0, dtype=float).copy()
        return cls(p=p, v=v, c_hat=p.copy(), q=p.copy())

    @property
    def n_agents(self) -> int:
        return int(self.p.shape[0])

    def copy(self) -> "SwarmState":
        return SwarmState(self.p.copy(), self.v.copy(), self.c_hat.copy(), self.q.copy())


@dataclass(frozen=True)
class StabilityCertificate:
    """Gain bound and M-matrix test for one graph/gain combination."""

    delta1: float
    delta2: float
    delta3: float
    k_p_max: float
    s_matrix: np.ndarray
    leading_minors: tuple[float, float, float]
    is_m_matrix: bool


@dataclass
class SegmentTrace:
    """Per-step error records for one subgoal; row t holds errors at time t."""

    times: list[int] = field(default_factory=list)
    e_f: list[float] = field(default_factory=list)
    e_c: list[float] = field(default_factory=list)
    positions: list[np.ndarray] = field(default_factory=list)
    steps_used: int = 0
    converged: bool = False


@dataclass(frozen=True)
class SegmentLimits:
    max_steps: int = 2000
    tol_f: float = 1e-3
    tol_c: float = 1e-3


def stability_gain_bound(
    spectra: SpectralSummary, alpha: float, k_p: float = 0.0
) -> StabilityCertificate:
    """Certify a candidate proportional gain against the graph's spectra.

    delta1 = 1 - (1 - alpha * lambda2_norm)^2 and delta2 = 1 - (1 - lambda2_w)^2
    bound the subsystem convergence rates; the admissible gain is
    k_p < delta1 * delta2 / 2, equivalently positivity of the leading minors of

        S = [[delta1, -k_p, 0], [-1, delta2, -1], [-1, 0, 1]].

    A disconnected graph yields bound 0 and a failed certificate, not an error.
    """
    if not (0.0 < alpha < 1.0):
        raise InvalidInput(f"alpha must lie in (0, 1), got {alpha}")
    lam_n = spectra.lambda2_normalized
    lam_w = spectra.lambda2_weighted
    if lam_n <= CONNECTIVITY_TOL or lam_w <= CONNECTIVITY_TOL:
        s = np.array([[0.0, -k_p, 0.0], [-1.0, 0.0, -1.0], [-1.0, 0.0, 1.0]])
        return StabilityCertificate(0.0, 0.0, 1.0, 0.0, s, (0.0, 0.0, 0.0), False)
    delta1 = 1.0 - (1.0 - alpha * lam_n) ** 2
    delta2 = 1.0 - (1.0 - lam_w) ** 2
    s = np.array([[delta1, -k_p, 0.0], [-1.0, delta2, -1.0], [-1.0, 0.0, 1.0]])
    minors = (
        delta1,
        delta1 * delta2 - k_p,
        float(np.linalg.det(s)),
    )
    off_diag_ok = k_p >= 0.0
    return StabilityCertificate(
        delta1=delta1,
        delta2=delta2,
        delta3=1.0,
        k_p_max=delta1 * delta2 / 2.0,
        s_matrix=s,
        leading_minors=minors,
        is_m_matrix=off_diag_ok and all(mi > 0.0 for mi in minors),
    )


def _consensus_operator(graph: CommGraph) -> np.ndarray:
    """Rows of D^-1 L, zeroed for isolated agents (their L row is zero too)."""
    inv_deg = np.where(graph.degrees > 0, 1.0 / np.maximum(graph.degrees, 1.0), 0.0)
    return graph.laplacian * inv_deg[:, None]


@dataclass(frozen=True)
class DenseSystem:
    a: np.ndarray          # (4M, 4M)
    f: np.ndarray          # (4M, 2)
    x_desired: np.ndarray  # (4M, 2)


def assemble_system(graph: CommGraph, gains: ControllerGains, step: PlanStep) -> DenseSystem:
    """Dense one-round update for the stacked state [p; v; c_hat; q].

    Requires a connected graph; the desired stacked state is an exact fixed
    point of the returned system.
    """
    m = graph.n_agents
    if m != step.z.shape[0]:
        raise InvalidInput(
            f"formation has {step.z.shape[0]} rows for {m} agents"
        )
    if not spectral_summary(graph).connected:
        raise NumericError("dense system needs a connected graph (no isolated agents)")
    eye = np.eye(m)
    zero = np.zeros((m, m))
    cons = gains.alpha * _consensus_operator(graph)
    w = graph.weights
    k = gains.k_p
    a = np.block(
        [
            [eye, eye, zero, zero],
            [-cons - k * eye, -cons, -k * w, k * eye],
            [eye, zero, w, -eye],
            [eye, zero, zero, zero],
        ]
    )
    z_rot = step.z @ rotation_matrix(step.theta).T
    ones_c = np.ones((m, 1)) @ step.c[None, :]
    f_v = step.s * cons @ z_rot + k * ones_c
    f = np.vstack([np.zeros((m, 2)), f_v, np.zeros((m, 2)), np.zeros((m, 2))])
    z_world = ones_c + step.s * z_rot
    x_desired = np.vstack([z_world, np.zeros((m, 2)), ones_c, z_world])
    return DenseSystem(a=a, f=f, x_desired=x_desired)


def centroid_estimate_update(
    weights: np.ndarray, c_hat: np.ndarray, p: np.ndarray, q: np.ndarray
) -> np.ndarray:
    """Dynamic average consensus round: W c_hat + p - q.

    With doubly stochastic weights the agent-mean of the estimates is
    conserved up to the position increment, so it tracks mean(p) with a
    one-step delay under the standard initialization.
    """
    return weights @ c_hat + p - q


def agent_step(
    p_i,
    v_i,
    c_hat_i,
    q_i,
    neighbor_pv: np.ndarray,
    neighbor_c_hat: np.ndarray,
    neighbor_w: np.ndarray,
    neighbor_z: np.ndarray,
    z_i,
    step: PlanStep,
    gains: ControllerGains,
):
    """One agent's round using only its own and neighbors' values.

    ``neighbor_pv`` holds the neighbors' (p_j + v_j) sums; ``step`` supplies
    the commanded s, theta and c (its formation matrix is not read). An
    agent with no neighbors drops both averaging terms.
    """
    p_i = np.asarray(p_i, dtype=float)
    v_i = np.asarray(v_i, dtype=float)
    c_hat_i = np.asarray(c_hat_i, dtype=float)
    q_i = np.asarray(q_i, dtype=float)
    rot_t = rotation_matrix(step.theta).T

    c_new = c_hat_i + p_i - q_i
    if len(neighbor_w):
        c_new = c_new + np.asarray(neighbor_w) @ (np.asarray(neighbor_c_hat) - c_hat_i)

    degree = len(neighbor_pv)
    if degree:
        pv_gap = (p_i + v_i) - np.asarray(neighbor_pv).mean(axis=0)
        z_gap = np.asarray(z_i) @ rot_t - (np.asarray(neighbor_z) @ rot_t).mean(axis=0)
    else:
        pv_gap = np.zeros(2)
        z_gap = np.zeros(2)

    v_new = -gains.alpha * pv_gap + step.s * gains.alpha * z_gap - gains.k_p * (c_new - step.c)
    return p_i + v_i, v_new, c_new, p_i.copy()


def sweep_agents(
    state: SwarmState, graph: CommGraph, step: PlanStep, gains: ControllerGains
) -> SwarmState:
    """Apply ``agent_step`` to every agent from time-t values (one round)."""
    m = state.n_agents
    new = SwarmState(
        p=np.empty_like(state.p),
        v=np.empty_like(state.v),
        c_hat=np.empty_like(state.c_hat),
        q=np.empty_like(state.q),
    )
    pv = state.p + state.v
    for i in range(m):
        nbrs = np.flatnonzero(graph.adjacency[i] > 0)
        new.p[i], new.v[i], new.c_hat[i], new.q[i] = agent_step(
            state.p[i],
            state.v[i],
            state.c_hat[i],
            state.q[i],
            pv[nbrs],
            state.c_hat[nbrs],
            graph.weights[i, nbrs],
            step.z[nbrs],
            step.z[i],
            step,
            gains,
        )
    return new


def advance(
    state: SwarmState,
    graph: CommGraph,
    step: PlanStep,
    gains: ControllerGains,
    _ops=None,
) -> SwarmState:
    """Vectorized synchronous round, identical to a full ``sweep_agents``."""
    if _ops is None:
        _ops = _round_operators(graph, step)
    cons, w, z_pull = _ops
    c_new = w @ state.c_hat + state.p - state.q
    pv = state.p + state.v
    v_new = -gains.alpha * (cons @ pv) + step.s * gains.alpha * z_pull - gains.k_p * (
        c_new - step.c[None, :]
    )
    return SwarmState(p=pv, v=v_new, c_hat=c_new, q=state.p.copy())


def _round_operators(graph: CommGraph, step: PlanStep):
    cons = _consensus_operator(graph)
    z_pull = cons @ (step.z @ rotation_matrix(step.theta).T)
    return cons, graph.weights, z_pull


def formation_errors(state: SwarmState, step: PlanStep) -> tuple[float, float]:
    """(shape error, placement error) against a subgoal.

    The shape error compares mean-centered positions with the scaled,
    rotated formation (Frobenius norm); the placement error is the distance
    from the position mean to the commanded centroid.
    """
    return _errors_from_positions(state.p, step)


def _errors_from_positions(p: np.ndarray, step: PlanStep) -> tuple[float, float]:
    mean = p.mean(axis=0)
    target = step.s * step.z @ rotation_matrix(step.theta).T
    e_f = float(np.linalg.norm((p - mean[None, :]) - target))
    e_c = float(np.linalg.norm(mean - step.c))
    return e_f, e_c


def segment_rounds(
    state: SwarmState,
    step: PlanStep,
    gains: ControllerGains,
    radius: float,
    limits: SegmentLimits,
):
    """Generator driving one segment; yields (t, state, e_f, e_c) per round.

    The communication graph is built once from the starting positions and
    held for the whole segment. Yields the initial errors at t=0, then one
    tuple per committed round, stopping at convergence or ``max_steps``.
    """
    graph = build_nu_disk_graph(state.p, radius)
    if state.n_agents > 1 and not spectral_summary(graph).connected:
        warnings.warn(
            f"segment graph disconnected at radius {radius}; running best-effort",
            stacklevel=2,
        )
    ops = _round_operators(graph, step)
    e_f, e_c = formation_errors(state, step)
    yield 0, state, e_f, e_c
    if e_f <= limits.tol_f and e_c <= limits.tol_c:
        return
    for t in range(1, limits.max_steps + 1):
        state = advance(state, graph, step, gains, _ops=ops)
        e_f, e_c = formation_errors(state, step)
        yield t, state, e_f, e_c
        if e_f <= limits.tol_f and e_c <= limits.tol_c:
            return


def run_segment(
    state: SwarmState,
    step: PlanStep,
    gains: ControllerGains,
    radii,
    limits: SegmentLimits | None = None,
    record_positions: bool = True,
) -> tuple[SwarmState, SegmentTrace]:
    """Drive the swarm toward one subgoal from its current state.

    ``radii`` is the scenario's mode radii table indexed by ``step.mode``.
    Exhausting ``max_steps`` is reported via ``converged=False``.
    """
    limits = limits or SegmentLimits()
    if step.mode > len(radii):
        raise InvalidInput(f"step mode {step.mode} exceeds the {len(radii)}-entry radii table")
    radius = float(radii[step.mode - 1])
    trace = SegmentTrace()
    final = state
    for t, current, e_f, e_c in segment_rounds(state, step, gains, radius, limits):
        trace.times.append(t)
        trace.e_f.append(e_f)
        trace.e_c.append(e_c)
        if record_positions:
            trace.positions.append(current.p.copy())
        final = current
    trace.steps_used = trace.times[-1]
    trace.converged = trace.e_f[-1] <= limits.tol_f and trace.e_c[-1] <= limits.tol_c
    return final, trace
