"""Communication graphs over agent positions.

nu-disk adjacency, Metropolis weights, the three Laplacians (combinatorial,
normalized, weighted) and their Fiedler values, plus the connectivity and
communication costs the planner uses to price an operating mode. Everything
here is a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericError

#: eigenvalue threshold below which a graph counts as disconnected
CONNECTIVITY_TOL = 1e-9

#: Cost signal for modes the planner must never pick (disconnected graph or
#: empty edge set). Compares greater than every finite cost.
INFEASIBLE_COST = math.inf


@dataclass(frozen=True)
class SpectralSummary:
    """Second-smallest eigenvalues of L, L_norm and L_weighted."""

    lambda2: float
    lambda2_normalized: float
    lambda2_weighted: float
    connected: bool


@dataclass(frozen=True)
class CommGraph:
    """One swarm configuration's communication graph and derived matrices.

    ``normalized_laplacian`` follows the pseudo-inverse convention for
    isolated nodes: their rows and columns are zero, never NaN.
    """

    positions: np.ndarray             # (M, 2)
    radius: float
    adjacency: np.ndarray             # (M, M) symmetric 0/1, zero diagonal
    degrees: np.ndarray               # (M,)
    weights: np.ndarray               # Metropolis weights, doubly stochastic
    laplacian: np.ndarray             # D - A
    normalized_laplacian: np.ndarray  # D^(-1/2) (D - A) D^(-1/2)
    weighted_laplacian: np.ndarray    # I - W

    @property
    def n_agents(self) -> int:
        return int(self.positions.shape[0])

    @property
    def n_edges(self) -> int:
        return int(round(self.adjacency.sum())) // 2


def build_nu_disk_graph(positions, radius: float) -> CommGraph:
    """Connect every pair of agents within Euclidean distance ``radius``."""
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
        raise InvalidInput(f"positions must be (M, 2) with M >= 1, got {pos.shape}")
    if not np.all(np.isfinite(pos)):
        raise InvalidInput("positions contain non-finite entries")
    if not (np.isfinite(radius) and radius > 0):
        raise InvalidInput(f"radius must be positive, got {radius}")

    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    adjacency = (dist <= radius).astype(float)
    np.fill_diagonal(adjacency, 0.0)

    degrees = adjacency.sum(axis=1)
    weights = metropolis_weights(adjacency)
    laplacian = np.diag(degrees) - adjacency
    inv_sqrt = np.where(degrees > 0, 1.0 / np.sqrt(np.maximum(degrees, 1.0)), 0.0)
    normalized = laplacian * np.outer(inv_sqrt, inv_sqrt)
    weighted = np.eye(pos.shape[0]) - weights
    return CommGraph(
        positions=pos,
        radius=float(radius),
        adjacency=adjacency,
        degrees=degrees,
        weights=weights,
        laplacian=laplacian,
        normalized_laplacian=normalized,
        weighted_laplacian=weighted,
    )


def metropolis_weights(adjacency) -> np.ndarray:
    """Symmetric doubly stochastic weights 1/(1 + max(d_i, d_j)) on edges.

    The diagonal absorbs the remaining mass, so isolated nodes get w_ii = 1.
    """
    adj = np.asarray(adjacency, dtype=float)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise InvalidInput(f"adjacency must be square, got {adj.shape}")
    degrees = adj.sum(axis=1)
    pair_max = np.maximum.outer(degrees, degrees)
    weights = np.where(adj > 0, 1.0 / (1.0 + pair_max), 0.0)
    np.fill_diagonal(weights, 0.0)
    np.fill_diagonal(weights, 1.0 - weights.sum(axis=1))
    return weights


def _second_smallest_eigenvalue(matrix: np.ndarray) -> float:
    """Second-smallest eigenvalue of a (symmetrized) matrix, ascending order."""
    sym = 0.5 * (matrix + matrix.T)
    try:
        values = np.linalg.eigvalsh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"eigensolver failed on {sym.shape} matrix "
            f"(|max|={np.abs(sym).max():.3e}, condition={np.linalg.cond(sym):.3e})"
        ) from exc
    return float(np.sort(values)[1])


def spectral_summary(graph: CommGraph) -> SpectralSummary:
    """Fiedler values of all three Laplacians; connected iff lambda2 > tol."""
    if graph.n_agents < 2:
        raise InvalidInput("spectral summary needs at least 2 agents")
    lam2 = _second_smallest_eigenvalue(graph.laplacian)
    lam2_n = _second_smallest_eigenvalue(graph.normalized_laplacian)
    lam2_w = _second_smallest_eigenvalue(graph.weighted_laplacian)
    return SpectralSummary(
        lambda2=lam2,
        lambda2_normalized=lam2_n,
        lambda2_weighted=lam2_w,
        connected=lam2 > CONNECTIVITY_TOL,
    )


def complement_basis(m: int) -> np.ndarray:
    """Orthonormal basis F of the subspace orthogonal to the ones vector.

    F is (M, M-1) with F^T F = I and F^T 1 = 0, built by a deterministic
    Householder reflection mapping e_1 onto 1/sqrt(M); repeated calls return
    bit-identical matrices.
    """
    if m < 2:
        raise InvalidInput(f"complement basis needs M >= 2, got {m}")
    ones_unit = np.full(m, 1.0 / math.sqrt(m))
    v = ones_unit - np.eye(m)[:, 0]
    norm_sq = float(v @ v)
    if norm_sq < 1e-30:
        house = np.eye(m)
    else:
        house = np.eye(m) - (2.0 / norm_sq) * np.outer(v, v)
    return house[:, 1:]


def connectivity_cost(graph: CommGraph, kappa1: float, kappa2: float) -> float:
    """-kappa1 * ln det(kappa2 * F^T L_norm F); infeasible if disconnected."""
    if kappa1 < 0 or kappa2 <= 0:
        raise InvalidInput("connectivity cost needs kappa1 >= 0 and kappa2 > 0")
    spectra = spectral_summary(graph)
    if spectra.lambda2_normalized <= CONNECTIVITY_TOL:
        return INFEASIBLE_COST
    basis = complement_basis(graph.n_agents)
    reduced = basis.T @ graph.normalized_laplacian @ basis
    sign, logdet = np.linalg.slogdet(kappa2 * reduced)
    if sign <= 0:
        return INFEASIBLE_COST
    return -kappa1 * logdet


def communication_cost(graph: CommGraph, kappa3: float) -> float:
    """kappa3 * ln(radius^2 * 2|E|); infeasible when the edge set is empty."""
    if kappa3 < 0:
        raise InvalidInput("communication cost needs kappa3 >= 0")
    total = float(graph.adjacency.sum())  # equals 2 * |edges|
    if total < 1.0:
        return INFEASIBLE_COST
    return kappa3 * math.log(graph.radius**2 * total)
