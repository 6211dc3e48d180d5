"""Gaussian-emission hidden Markov model for gesture decoding.

Training initializes the emissions from a labeled calibration schedule and
refines everything with Baum-Welch (EM), whose per-iteration data
log-likelihood never decreases. Live decoding is causal: the scaled forward
recursion is run frame by frame and the argmax of the filtering
distribution is emitted, so the decoder is usable on a stream.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput, NumericError

GESTURES = ("normal", "fist", "spread", "wave_up", "wave_down")

_VAR_FLOOR = 1e-6
_TRANSITION_SMOOTHING = 1e-3


@dataclass
class GestureHmm:
    states: tuple[str, ...]
    start_prob: np.ndarray        # (n,)
    transitions: np.ndarray       # (n, n), rows sum to 1
    means: np.ndarray             # (n, d)
    variances: np.ndarray         # (n, d) diagonal covariances
    full_covariances: np.ndarray | None = None  # (n, d, d) when trained full

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def covariances(self) -> np.ndarray:
        if self.full_covariances is not None:
            return self.full_covariances
        return np.stack([np.diag(v) for v in self.variances])

    def log_emissions(self, features: np.ndarray) -> np.ndarray:
        """Log density of each frame under each state, shape (T, n)."""
        x = np.atleast_2d(np.asarray(features, dtype=float))
        if self.full_covariances is None:
            diff = x[:, None, :] - self.means[None, :, :]
            return -0.5 * (
                np.log(2.0 * math.pi * self.variances).sum(axis=1)[None, :]
                + (diff**2 / self.variances[None, :, :]).sum(axis=2)
            )
        out = np.empty((x.shape[0], self.n_states))
        for j in range(self.n_states):
            cov = self.full_covariances[j]
            chol = np.linalg.cholesky(cov)
            solved = np.linalg.solve(chol, (x - self.means[j]).T)
            out[:, j] = -0.5 * (
                x.shape[1] * math.log(2.0 * math.pi)
                + 2.0 * np.log(np.diag(chol)).sum()
                + (solved**2).sum(axis=0)
            )
        return out


@dataclass
class TrainResult:
    model: GestureHmm
    log_likelihoods: list[float]


def _scaled_forward_backward(model: GestureHmm, features: np.ndarray):
    """Scaled alpha/beta recursions; returns (alpha, beta, scaled_b, loglik).

    Emission log-densities are shifted per frame before exponentiation so
    the linear-scale recursion cannot underflow; the shifts are added back
    into the log-likelihood.
    """
    log_b = model.log_emissions(features)
    shifts = log_b.max(axis=1)
    b = np.exp(log_b - shifts[:, None])
    n_frames = b.shape[0]
    n = model.n_states
    alpha = np.empty((n_frames, n))
    scale = np.empty(n_frames)

    probe = model.start_prob * b[0]
    scale[0] = probe.sum()
    if scale[0] <= 0:
        raise NumericError("all states have zero likelihood on the first frame")
    alpha[0] = probe / scale[0]
    for t in range(1, n_frames):
        probe = (alpha[t - 1] @ model.transitions) * b[t]
        scale[t] = probe.sum()
        if scale[t] <= 0:
            raise NumericError(f"forward recursion vanished at frame {t}")
        alpha[t] = probe / scale[t]

    beta = np.empty((n_frames, n))
    beta[-1] = 1.0
    for t in range(n_frames - 2, -1, -1):
        beta[t] = (model.transitions @ (b[t + 1] * beta[t + 1])) / scale[t + 1]

    loglik = float(np.log(scale).sum() + shifts.sum())
    return alpha, beta, b, scale, loglik


def _labels_from_schedule(timestamps_s: np.ndarray, schedule) -> list[str]:
    labels = []
    for t in timestamps_s:
        match = None
        for gesture, start, end in schedule:
            if start <= t < end:
                match = gesture
                break
        if match is None:
            # frames past the last segment inherit its label
            match = schedule[-1][0]
        labels.append(match)
    return labels


def baum_welch_train(
    frames,
    schedule,
    *,
    max_iter: int = 100,
    tol: float = 1e-6,
    full_covariance: bool = False,
) -> TrainResult:
    """Train a gesture model from frames plus a labeled segment schedule.

    ``schedule`` lists (gesture, start_s, end_s) segments; at least one
    segment per distinct gesture is required. Labels seed the initial,
    transition and emission parameters, then Baum-Welch refines them until
    the log-likelihood gain drops below ``tol`` or ``max_iter`` is reached.
    Variances are floored at 1e-6 throughout; a single-frame segment only
    triggers a warning.
    """
    frames = list(frames)
    if not frames:
        raise InvalidInput("cannot train on an empty frame sequence")
    if not schedule:
        raise InvalidInput("schedule must contain at least one labeled segment")
    features = np.stack([f.feature for f in frames])
    centers = np.array([f.center_s for f in frames])
    labels = _labels_from_schedule(centers, schedule)

    states = tuple(g for g in GESTURES if g in set(labels))
    if not states:
        states = tuple(dict.fromkeys(labels))
    index = {g: i for i, g in enumerate(states)}
    n, d = len(states), features.shape[1]

    means = np.empty((n, d))
    variances = np.empty((n, d))
    for g, j in index.items():
        member = features[[lab == g for lab in labels]]
        if member.shape[0] == 0:
            raise InvalidInput(f"schedule assigns no frames to gesture {g!r}")
        if member.shape[0] < 2:
            warnings.warn(
                f"gesture {g!r} has a single training frame; variance floored",
                stacklevel=2,
            )
        means[j] = member.mean(axis=0)
        variances[j] = np.maximum(member.var(axis=0), _VAR_FLOOR)

    start = np.full(n, _TRANSITION_SMOOTHING)
    start[index[labels[0]]] += 1.0
    start /= start.sum()
    transitions = np.full((n, n), _TRANSITION_SMOOTHING)
    for prev, nxt in zip(labels[:-1], labels[1:]):
        transitions[index[prev], index[nxt]] += 1.0
    transitions /= transitions.sum(axis=1, keepdims=True)

    full = None
    if full_covariance:
        full = np.stack([np.diag(v) for v in variances])
    model = GestureHmm(states, start, transitions, means, variances, full)

    history: list[float] = []
    for _ in range(max_iter):
        alpha, beta, b, scale, loglik = _scaled_forward_backward(model, features)
        history.append(loglik)
        if len(history) > 1 and history[-1] - history[-2] < tol:
            break

        gamma = alpha * beta
        gamma /= gamma.sum(axis=1, keepdims=True)
        # xi summed over time, normalized per transition row
        xi_sum = np.zeros((n, n))
        for t in range(features.shape[0] - 1):
            xi = (
                alpha[t][:, None]
                * model.transitions
                * (b[t + 1] * beta[t + 1])[None, :]
                / scale[t + 1]
            )
            xi_sum += xi

        occupancy = gamma[:-1].sum(axis=0)
        new_t = xi_sum / np.maximum(occupancy[:, None], 1e-300)
        new_t = np.maximum(new_t, 0.0)
        new_t /= new_t.sum(axis=1, keepdims=True)

        weight = gamma.sum(axis=0)
        new_means = (gamma.T @ features) / weight[:, None]
        model.start_prob = gamma[0]
        model.transitions = new_t
        model.means = new_means
        if full_covariance:
            covs = np.empty((n, d, d))
            for j in range(n):
                diff = features - new_means[j]
                covs[j] = (gamma[:, j][:, None] * diff).T @ diff / weight[j]
                covs[j] += _VAR_FLOOR * np.eye(d)
            model.full_covariances = covs
            model.variances = np.einsum("jdd->jd", covs)
        else:
            diff = features[:, None, :] - new_means[None, :, :]
            new_vars = (gamma[:, :, None] * diff**2).sum(axis=0) / weight[:, None]
            model.variances = np.maximum(new_vars, _VAR_FLOOR)

    return TrainResult(model=model, log_likelihoods=history)


def forward_filter(model: GestureHmm, features: np.ndarray) -> np.ndarray:
    """Causal filtering distribution per frame in the log domain, (T, n)."""
    log_b = model.log_emissions(features)
    n_frames = log_b.shape[0]
    log_alpha = np.empty_like(log_b)
    with np.errstate(divide="ignore"):
        log_start = np.log(model.start_prob)
        log_t = np.log(model.transitions)
    current = log_start + log_b[0]
    current -= _logsumexp(current)
    log_alpha[0] = current
    for t in range(1, n_frames):
        propagated = _logsumexp(current[:, None] + log_t, axis=0)
        current = propagated + log_b[t]
        current -= _logsumexp(current)
        log_alpha[t] = current
    return log_alpha


def _logsumexp(x: np.ndarray, axis=None):
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)  # all -inf slices reduce to -inf
    with np.errstate(divide="ignore"):
        out = np.log(np.exp(x - m).sum(axis=axis, keepdims=True)) + m
    return out.squeeze(axis) if axis is not None else float(out.item())


def forward_decode(model: GestureHmm, frames) -> list:
    """Label each frame with the argmax of the causal filtering distribution.

    Frames with non-finite features are skipped with a warning and do not
    advance the filter.
    """
    from .streams import GestureLabel

    frames = list(frames)
    clean, kept = [], []
    for k, frame in enumerate(frames):
        if np.all(np.isfinite(frame.feature)):
            clean.append(frame.feature)
            kept.append(k)
        else:
            warnings.warn(f"skipping frame {k} with non-finite features", stacklevel=2)
    if not clean:
        return []
    log_alpha = forward_filter(model, np.stack(clean))
    picks = log_alpha.argmax(axis=1)
    return [
        GestureLabel(timestamp=frames[k].timestamp, center_s=frames[k].center_s,
                     gesture=model.states[j])
        for k, j in zip(kept, picks)
    ]
