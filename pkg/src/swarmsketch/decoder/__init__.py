"""Gesture and arm-motion decoding from synthetic signal streams."""

from .hmm import GESTURES, GestureHmm, TrainResult, baum_welch_train, forward_decode, forward_filter
from .kalman import KalmanState, kalman_step
from .streams import (
    DecodeReport,
    EmgFrame,
    GestureLabel,
    PointerEvent,
    RecordedSession,
    SessionScript,
    calibration_script,
    decode_session,
    emg_features,
    gestures_to_events,
    load_session,
    save_session,
    session_from_dict,
    synth_session,
)

__all__ = [
    "GESTURES",
    "GestureHmm",
    "TrainResult",
    "baum_welch_train",
    "forward_decode",
    "forward_filter",
    "KalmanState",
    "kalman_step",
    "DecodeReport",
    "EmgFrame",
    "GestureLabel",
    "PointerEvent",
    "RecordedSession",
    "SessionScript",
    "calibration_script",
    "decode_session",
    "emg_features",
    "gestures_to_events",
    "load_session",
    "save_session",
    "session_from_dict",
    "synth_session",
]
