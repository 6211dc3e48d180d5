"""Kalman filter tracking the pointer from arm-motion signals.

The pointer obeys planar double-integrator dynamics driven by an input
acceleration with update interval ``eta``; the sensor stream observes the
full (position, velocity) state scaled by the arm length. Passing
``observation=None`` performs a prediction-only step, which is how the
filter free-runs between measurement ticks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput, NumericError


@dataclass(frozen=True)
class KalmanState:
    position: np.ndarray     # (2,)
    velocity: np.ndarray     # (2,)
    covariance: np.ndarray   # (4, 4), symmetric PSD
    eta: float = 1.0
    r_arm: float = 1.0

    @property
    def mean(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity])


def _transition(eta: float) -> tuple[np.ndarray, np.ndarray]:
    phi = np.eye(4)
    phi[0, 2] = phi[1, 3] = eta
    g = np.vstack([0.5 * eta**2 * np.eye(2), eta * np.eye(2)])
    return phi, g


def kalman_step(
    state: KalmanState,
    accel,
    observation,
    process_cov,
    measurement_cov,
) -> KalmanState:
    """Predict with the input acceleration, then (optionally) update.

    ``observation`` is the raw 4-dim sensor sample; it is scaled by the arm
    length to produce the state measurement. The Joseph-form covariance
    update keeps the covariance symmetric PSD. A singular innovation
    covariance raises ``NumericError``.
    """
    q = np.asarray(process_cov, dtype=float).reshape(4, 4)
    phi, g = _transition(state.eta)
    accel = np.zeros(2) if accel is None else np.asarray(accel, dtype=float).reshape(2)

    mean = phi @ state.mean + g @ accel
    cov = phi @ state.covariance @ phi.T + q
    cov = 0.5 * (cov + cov.T)

    if observation is not None:
        r = np.asarray(measurement_cov, dtype=float).reshape(4, 4)
        obs = np.asarray(observation, dtype=float).reshape(4)
        if not np.all(np.isfinite(obs)):
            raise InvalidInput("observation contains non-finite entries")
        innovation = state.r_arm * obs - mean
        s = cov + r  # observation matrix is the identity
        try:
            if np.linalg.cond(s) > 1e12:
                raise np.linalg.LinAlgError("ill-conditioned innovation covariance")
            gain = np.linalg.solve(s.T, cov.T).T
        except np.linalg.LinAlgError as exc:
            raise NumericError("singular innovation covariance") from exc
        mean = mean + gain @ innovation
        closed = np.eye(4) - gain
        cov = closed @ cov @ closed.T + gain @ r @ gain.T
        cov = 0.5 * (cov + cov.T)

    return KalmanState(
        position=mean[:2],
        velocity=mean[2:],
        covariance=cov,
        eta=state.eta,
        r_arm=state.r_arm,
    )
