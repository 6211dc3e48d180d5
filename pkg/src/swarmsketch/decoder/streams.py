"""Signal streams: feature extraction, event mapping, synthetic sessions.

The recorded-session JSON format produced here stands in for the wearable:
it carries raw muscle-activity and arm-motion sample arrays together with
their sample rates and the labeled calibration schedule, and replays
deterministically.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InvalidInput
from .hmm import GESTURES, baum_welch_train, forward_decode
from .kalman import KalmanState, kalman_step

#: gesture -> pointer action (move is implicit for "normal")
EVENT_MAP = {
    "fist": "left_click",
    "spread": "right_click",
    "wave_up": "scroll_up",
    "wave_down": "scroll_down",
}

#: frames a gesture must stay released before the same event can re-fire
REFIRE_GAP_FRAMES = 3


@dataclass(frozen=True)
class EmgFrame:
    feature: np.ndarray   # (16,) per-channel window means then stds
    timestamp: int        # index of the window's first sample
    center_s: float       # window center in seconds


@dataclass(frozen=True)
class GestureLabel:
    timestamp: int
    center_s: float
    gesture: str


@dataclass(frozen=True)
class PointerEvent:
    kind: str             # move | left_click | right_click | scroll_up | scroll_down | none
    position: np.ndarray  # (2,)
    center_s: float


def emg_features(samples, rate: float, window: float = 1.0, shift: float = 0.2) -> list[EmgFrame]:
    """Sliding-window mean and standard deviation per channel.

    Frame k covers samples [k*shift, k*shift + window); a stream shorter
    than one window yields no frames.
    """
    if rate <= 0:
        raise InvalidInput(f"sample rate must be positive, got {rate}")
    if not (window >= shift > 0):
        raise InvalidInput("need window >= shift > 0")
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2:
        raise InvalidInput(f"samples must be (T, channels), got shape {x.shape}")
    win = int(round(window * rate))
    hop = int(round(shift * rate))
    frames = []
    start = 0
    while start + win <= x.shape[0]:
        chunk = x[start : start + win]
        feature = np.concatenate([chunk.mean(axis=0), chunk.std(axis=0)])
        frames.append(
            EmgFrame(feature=feature, timestamp=start, center_s=(start + win / 2.0) / rate)
        )
        start += hop
    return frames


def gestures_to_events(labels, pointer_track) -> list[PointerEvent]:
    """Map a gesture stream onto pointer events at the tracked position.

    Click/scroll events fire on gesture onset only; an onset of the same
    gesture re-fires only after it has been released for at least
    ``REFIRE_GAP_FRAMES`` frames, which suppresses chatter. "normal" frames
    emit plain moves; held non-normal frames after their onset emit "none".
    Pointer samples are matched by nearest timestamp.
    """
    labels = list(labels)
    track_times = np.array([t for t, _ in pointer_track]) if pointer_track else np.empty(0)
    track_states = [s for _, s in pointer_track]

    def position_at(when: float) -> np.ndarray:
        if len(track_states) == 0:
            return np.zeros(2)
        idx = int(np.argmin(np.abs(track_times - when)))
        return track_states[idx].position.copy()

    events = []
    previous = "normal"
    last_active = {g: -10**9 for g in EVENT_MAP}
    for k, label in enumerate(labels):
        g = label.gesture
        pos = position_at(label.center_s)
        if g == "normal":
            events.append(PointerEvent(kind="move", position=pos, center_s=label.center_s))
        elif g in EVENT_MAP:
            onset = g != previous
            if onset and k - last_active[g] >= REFIRE_GAP_FRAMES:
                events.append(
                    PointerEvent(kind=EVENT_MAP[g], position=pos, center_s=label.center_s)
                )
            else:
                events.append(PointerEvent(kind="none", position=pos, center_s=label.center_s))
            last_active[g] = k
        else:
            events.append(PointerEvent(kind="none", position=pos, center_s=label.center_s))
        previous = g
    return events


# ---------------------------------------------------------------------------
# Synthetic sessions (hardware stand-in)
# ---------------------------------------------------------------------------

#: per-gesture base activation level; adjacent levels sit 5 sigma apart at
#: the default noise of 1.0
DEFAULT_LEVELS = {g: 5.0 * i for i, g in enumerate(GESTURES)}


@dataclass(frozen=True)
class SessionScript:
    schedule: tuple            # ((gesture, duration_s), ...)
    pointer_keyframes: tuple   # ((t_s, x, y), ...) piecewise-linear path
    emg_rate: float = 200.0
    imu_rate: float = 50.0
    r_arm: float = 1.0
    emg_noise: float = 1.0
    imu_noise: float = 0.01
    levels: dict = field(default_factory=lambda: dict(DEFAULT_LEVELS))


def calibration_script(
    seconds_per_gesture: float = 3.0, cycles: int = 4, **kwargs
) -> SessionScript:
    """Fixed-order calibration schedule cycling through all five gestures."""
    schedule = tuple(
        (g, seconds_per_gesture) for _ in range(cycles) for g in GESTURES
    )
    total = seconds_per_gesture * cycles * len(GESTURES)
    keyframes = ((0.0, 0.0, 0.0), (total, 1.0, 0.5))
    return SessionScript(schedule=schedule, pointer_keyframes=keyframes, **kwargs)


@dataclass
class RecordedSession:
    emg: np.ndarray            # (T, 8)
    imu: np.ndarray            # (K, 4)
    emg_rate: float
    imu_rate: float
    r_arm: float
    schedule: list             # [(gesture, start_s, end_s), ...]
    pointer_truth: np.ndarray | None = None  # (K, 4) true pointer states

    @property
    def duration_s(self) -> float:
        return self.emg.shape[0] / self.emg_rate


def synth_session(seed: int, script: SessionScript) -> RecordedSession:
    """Generate matching muscle-activity and arm-motion streams.

    Muscle channels emit Gaussian noise around the scripted gesture's level;
    motion samples observe the scripted pointer path (positions in the first
    two components, velocities in the last two) divided by the arm length,
    so the measurement model round-trips exactly. Identical seeds give
    bit-identical streams.
    """
    rng = np.random.default_rng(seed)
    segments = []
    cursor = 0.0
    for gesture, duration in script.schedule:
        if gesture not in GESTURES:
            raise InvalidInput(f"unknown gesture {gesture!r}")
        segments.append((gesture, cursor, cursor + duration))
        cursor += duration
    total_s = cursor

    n_emg = int(round(total_s * script.emg_rate))
    emg = np.empty((n_emg, 8))
    times = np.arange(n_emg) / script.emg_rate
    for gesture, start, end in segments:
        mask = (times >= start) & (times < end)
        emg[mask] = script.levels[gesture] + script.emg_noise * rng.standard_normal(
            (int(mask.sum()), 8)
        )

    n_imu = int(round(total_s * script.imu_rate))
    imu_times = np.arange(n_imu) / script.imu_rate
    keys = np.asarray(script.pointer_keyframes, dtype=float)
    px = np.interp(imu_times, keys[:, 0], keys[:, 1])
    py = np.interp(imu_times, keys[:, 0], keys[:, 2])
    vx = np.gradient(px, imu_times) if n_imu > 1 else np.zeros(n_imu)
    vy = np.gradient(py, imu_times) if n_imu > 1 else np.zeros(n_imu)
    truth = np.column_stack([px, py, vx, vy])
    imu = (truth + script.imu_noise * rng.standard_normal(truth.shape)) / script.r_arm

    return RecordedSession(
        emg=emg,
        imu=imu,
        emg_rate=script.emg_rate,
        imu_rate=script.imu_rate,
        r_arm=script.r_arm,
        schedule=segments,
        pointer_truth=truth,
    )


def save_session(session: RecordedSession, path) -> None:
    payload = {
        "emg_rate": session.emg_rate,
        "imu_rate": session.imu_rate,
        "r_arm": session.r_arm,
        "schedule": [[g, s, e] for g, s, e in session.schedule],
        "emg": session.emg.tolist(),
        "imu": session.imu.tolist(),
    }
    if session.pointer_truth is not None:
        payload["pointer_truth"] = session.pointer_truth.tolist()
    Path(path).write_text(json.dumps(payload))


def load_session(path) -> RecordedSession:
    payload = json.loads(Path(path).read_text())
    return session_from_dict(payload)


def session_from_dict(payload: dict) -> RecordedSession:
    try:
        truth = payload.get("pointer_truth")
        return RecordedSession(
            emg=np.asarray(payload["emg"], dtype=float),
            imu=np.asarray(payload["imu"], dtype=float),
            emg_rate=float(payload["emg_rate"]),
            imu_rate=float(payload["imu_rate"]),
            r_arm=float(payload["r_arm"]),
            schedule=[(g, float(s), float(e)) for g, s, e in payload["schedule"]],
            pointer_truth=None if truth is None else np.asarray(truth, dtype=float),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed recorded session: {exc}") from exc


@dataclass
class DecodeReport:
    labels: list
    events: list
    accuracy: float | None
    log_likelihoods: list[float]
    pointer_track: list


def decode_session(
    session: RecordedSession,
    *,
    process_noise: float = 1e-4,
    measurement_noise: float = 1e-3,
) -> DecodeReport:
    """Full decode pipeline on a recorded session.

    Trains the gesture model on the session's labeled schedule, decodes all
    frames causally, tracks the pointer through the Kalman filter, and maps
    gestures to pointer events. Accuracy is reported against the schedule's
    planted labels.
    """
    frames = emg_features(session.emg, session.emg_rate)
    result = baum_welch_train(frames, session.schedule)
    labels = forward_decode(result.model, frames)

    eta = 1.0 / session.imu_rate
    state = KalmanState(
        position=session.r_arm * session.imu[0, :2],
        velocity=session.r_arm * session.imu[0, 2:],
        covariance=np.eye(4),
        eta=eta,
        r_arm=session.r_arm,
    )
    q = process_noise * np.eye(4)
    r = measurement_noise * np.eye(4)
    track = []
    for k in range(session.imu.shape[0]):
        state = kalman_step(state, None, session.imu[k], q, r)
        track.append((k / session.imu_rate, state))

    events = gestures_to_events(labels, track)

    correct = 0
    for label in labels:
        for gesture, start, end in session.schedule:
            if start <= label.center_s < end:
                correct += int(label.gesture == gesture)
                break
        else:
            correct += int(label.gesture == session.schedule[-1][0])
    accuracy = correct / len(labels) if labels else None

    return DecodeReport(
        labels=labels,
        events=events,
        accuracy=accuracy,
        log_likelihoods=result.log_likelihoods,
        pointer_track=track,
    )
