import numpy as np
import pytest

from swarmsketch.decoder import (
    GESTURES,
    EmgFrame,
    GestureHmm,
    KalmanState,
    baum_welch_train,
    calibration_script,
    decode_session,
    emg_features,
    forward_decode,
    forward_filter,
    gestures_to_events,
    kalman_step,
    load_session,
    save_session,
    synth_session,
)
from swarmsketch.decoder.streams import SessionScript
from swarmsketch.errors import InvalidInput, NumericError


class TestEmgFeatures:
    def test_constant_signal(self):
        samples = np.full((400, 8), 3.0)
        frames = emg_features(samples, rate=200.0)
        assert len(frames) >= 1
        assert np.allclose(frames[0].feature[:8], 3.0)
        assert np.allclose(frames[0].feature[8:], 0.0)

    def test_frame_count_sixty_seconds(self):
        samples = np.zeros((12000, 8))
        frames = emg_features(samples, rate=200.0, window=1.0, shift=0.2)
        assert len(frames) == 296  # (60 - 1) / 0.2 + 1

    def test_square_wave(self):
        samples = np.tile([[1.0], [-1.0]], (100, 8))
        frames = emg_features(samples, rate=200.0)
        assert np.allclose(frames[0].feature[:8], 0.0)
        assert np.allclose(frames[0].feature[8:], 1.0)

    def test_short_stream_yields_nothing(self):
        assert emg_features(np.zeros((100, 8)), rate=200.0) == []

    def test_rejects_bad_window(self):
        with pytest.raises(InvalidInput):
            emg_features(np.zeros((400, 8)), rate=200.0, window=0.1, shift=0.2)


class TestBaumWelch:
    def test_recovers_planted_means(self):
        # contiguous 12 s blocks keep boundary windows scarce enough that
        # the fitted means stay within 0.1 of the generator levels
        rec = synth_session(3, calibration_script(seconds_per_gesture=12.0, cycles=1))
        frames = emg_features(rec.emg, rec.emg_rate)
        result = baum_welch_train(frames, rec.schedule)
        model = result.model
        assert set(model.states) == set(GESTURES)
        for j, gesture in enumerate(model.states):
            level = 5.0 * GESTURES.index(gesture)
            assert np.abs(model.means[j, :8] - level).max() <= 0.1

    def test_log_likelihood_monotone(self):
        rec = synth_session(5, calibration_script(cycles=2))
        frames = emg_features(rec.emg, rec.emg_rate)
        result = baum_welch_train(frames, rec.schedule)
        ll = result.log_likelihoods
        assert len(ll) >= 2
        assert all(b - a >= -1e-9 for a, b in zip(ll, ll[1:]))

    def test_one_state_reduction(self):
        rec = synth_session(7, SessionScript(
            schedule=(("fist", 6.0),),
            pointer_keyframes=((0.0, 0.0, 0.0), (6.0, 1.0, 1.0)),
        ))
        frames = emg_features(rec.emg, rec.emg_rate)
        result = baum_welch_train(frames, rec.schedule)
        assert result.model.states == ("fist",)
        assert np.allclose(result.model.transitions, [[1.0]])
        assert np.allclose(result.model.start_prob, [1.0])

    def test_single_frame_segment_warns(self):
        rng = np.random.default_rng(0)
        frames = [
            EmgFrame(feature=rng.normal(0, 1, 16), timestamp=i * 40, center_s=0.2 * i + 0.5)
            for i in range(10)
        ]
        schedule = [("normal", 0.0, 0.6), ("fist", 0.6, 3.0)]  # one normal frame
        with pytest.warns(UserWarning, match="single training frame"):
            baum_welch_train(frames, schedule)

    def test_full_covariance_path(self):
        rec = synth_session(9, calibration_script(cycles=2))
        frames = emg_features(rec.emg, rec.emg_rate)
        result = baum_welch_train(frames, rec.schedule, full_covariance=True, max_iter=5)
        assert result.model.full_covariances.shape == (5, 16, 16)
        ll = result.log_likelihoods
        assert all(b - a >= -1e-9 for a, b in zip(ll, ll[1:]))


class TestForwardDecode:
    def test_single_state_constant(self):
        model = GestureHmm(
            states=("fist",),
            start_prob=np.array([1.0]),
            transitions=np.array([[1.0]]),
            means=np.zeros((1, 16)),
            variances=np.ones((1, 16)),
        )
        frames = [
            EmgFrame(feature=np.zeros(16), timestamp=i, center_s=float(i)) for i in range(5)
        ]
        labels = forward_decode(model, frames)
        assert [l.gesture for l in labels] == ["fist"] * 5

    def test_filtering_distribution_normalized(self):
        rec = synth_session(11, calibration_script(cycles=2))
        frames = emg_features(rec.emg, rec.emg_rate)
        model = baum_welch_train(frames, rec.schedule).model
        log_alpha = forward_filter(model, np.stack([f.feature for f in frames]))
        sums = np.exp(log_alpha).sum(axis=1)
        assert np.abs(sums - 1.0).max() <= 1e-9

    def test_well_separated_stream_accuracy(self):
        rec = synth_session(13, calibration_script())
        frames = emg_features(rec.emg, rec.emg_rate)
        model = baum_welch_train(frames, rec.schedule).model
        labels = forward_decode(model, frames)
        correct = 0
        for label in labels:
            for gesture, start, end in rec.schedule:
                if start <= label.center_s < end:
                    correct += label.gesture == gesture
                    break
        assert correct / len(labels) >= 0.95

    def test_non_finite_frame_skipped(self):
        model = GestureHmm(
            states=("fist",),
            start_prob=np.array([1.0]),
            transitions=np.array([[1.0]]),
            means=np.zeros((1, 16)),
            variances=np.ones((1, 16)),
        )
        frames = [
            EmgFrame(feature=np.zeros(16), timestamp=0, center_s=0.0),
            EmgFrame(feature=np.full(16, np.nan), timestamp=40, center_s=0.2),
            EmgFrame(feature=np.zeros(16), timestamp=80, center_s=0.4),
        ]
        with pytest.warns(UserWarning, match="non-finite"):
            labels = forward_decode(model, frames)
        assert len(labels) == 2


class TestKalman:
    def test_deterministic_double_integrator(self):
        # prediction-only steps with zero process noise follow the model
        state = KalmanState(
            position=np.zeros(2),
            velocity=np.array([1.0, 0.0]),
            covariance=np.zeros((4, 4)),
            eta=1.0,
        )
        q = np.zeros((4, 4))
        for t in range(1, 6):
            state = kalman_step(state, None, None, q, None)
            assert np.allclose(state.position, [float(t), 0.0], atol=1e-15)
            assert np.allclose(state.velocity, [1.0, 0.0], atol=1e-15)

    def test_exact_measurement_update_is_identity(self):
        state = KalmanState(
            position=np.array([1.0, 2.0]),
            velocity=np.array([0.5, -0.25]),
            covariance=np.eye(4),
            eta=1.0,
            r_arm=2.0,
        )
        predicted = kalman_step(state, None, None, np.zeros((4, 4)), None)
        observed = kalman_step(
            state, None, predicted.mean / 2.0, np.zeros((4, 4)), np.zeros((4, 4))
        )
        assert np.allclose(observed.mean, predicted.mean, atol=1e-12)

    def test_covariance_stays_symmetric_psd(self):
        rng = np.random.default_rng(17)
        state = KalmanState(
            position=np.zeros(2), velocity=np.zeros(2), covariance=np.eye(4), eta=0.02
        )
        q = 1e-3 * np.eye(4)
        r = 1e-2 * np.eye(4)
        for _ in range(200):
            state = kalman_step(state, rng.normal(0, 1, 2), rng.normal(0, 1, 4), q, r)
            cov = state.covariance
            assert np.abs(cov - cov.T).max() <= 1e-12
            assert np.linalg.eigvalsh(cov).min() >= -1e-12

    def test_covariance_converges_to_riccati_fixed_point(self):
        eta = 0.05
        q = 1e-3 * np.eye(4)
        r = 1e-2 * np.eye(4)
        # oracle: iterate the bare covariance recursion to its fixed point
        phi = np.eye(4)
        phi[0, 2] = phi[1, 3] = eta
        cov = np.eye(4)
        for _ in range(10000):
            pred = phi @ cov @ phi.T + q
            gain = pred @ np.linalg.inv(pred + r)
            cov = (np.eye(4) - gain) @ pred
        fixed_point = cov

        state = KalmanState(
            position=np.zeros(2), velocity=np.zeros(2), covariance=np.eye(4), eta=eta
        )
        for _ in range(10000):
            state = kalman_step(state, None, np.zeros(4), q, r)
        assert np.abs(state.covariance - fixed_point).max() <= 1e-6

    def test_singular_innovation_raises(self):
        state = KalmanState(
            position=np.zeros(2), velocity=np.zeros(2), covariance=np.zeros((4, 4)), eta=1.0
        )
        with pytest.raises(NumericError):
            kalman_step(state, None, np.zeros(4), np.zeros((4, 4)), np.zeros((4, 4)))


class _Label:
    def __init__(self, k, gesture):
        self.timestamp = k * 40
        self.center_s = 0.2 * k
        self.gesture = gesture


class TestGestureEvents:
    def _track(self):
        state = KalmanState(
            position=np.array([7.0, 8.0]), velocity=np.zeros(2), covariance=np.eye(4)
        )
        return [(0.0, state)]

    def test_fist_onset_fires_single_click(self):
        labels = [_Label(0, "normal"), _Label(1, "fist")]
        events = gestures_to_events(labels, self._track())
        assert [e.kind for e in events] == ["move", "left_click"]
        assert np.allclose(events[1].position, [7.0, 8.0])

    def test_sustained_fist_fires_once(self):
        labels = [_Label(0, "normal")] + [_Label(k, "fist") for k in range(1, 11)]
        events = gestures_to_events(labels, self._track())
        kinds = [e.kind for e in events]
        assert kinds.count("left_click") == 1
        assert kinds[2:] == ["none"] * 9

    def test_chatter_suppressed(self):
        labels = [
            _Label(0, "normal"),
            _Label(1, "fist"),
            _Label(2, "normal"),
            _Label(3, "fist"),  # released for only one frame: suppressed
        ]
        events = gestures_to_events(labels, self._track())
        assert [e.kind for e in events].count("left_click") == 1

    def test_normal_only_moves(self):
        labels = [_Label(k, "normal") for k in range(6)]
        events = gestures_to_events(labels, self._track())
        assert all(e.kind == "move" for e in events)

    def test_full_mapping(self):
        labels = [
            _Label(0, "normal"),
            _Label(1, "fist"),
            _Label(2, "spread"),
            _Label(3, "wave_up"),
            _Label(4, "wave_down"),
        ]
        events = gestures_to_events(labels, self._track())
        assert [e.kind for e in events] == [
            "move",
            "left_click",
            "right_click",
            "scroll_up",
            "scroll_down",
        ]


class TestSynthSession:
    def test_same_seed_bit_identical(self):
        script = calibration_script(cycles=1)
        a = synth_session(42, script)
        b = synth_session(42, script)
        assert a.emg.tobytes() == b.emg.tobytes()
        assert a.imu.tobytes() == b.imu.tobytes()

    def test_all_normal_script_decodes_normal(self):
        rec = synth_session(1, SessionScript(
            schedule=(("normal", 10.0),),
            pointer_keyframes=((0.0, 0.0, 0.0), (10.0, 1.0, 1.0)),
        ))
        report = decode_session(rec)
        assert all(l.gesture == "normal" for l in report.labels)

    def test_round_trip_through_file(self, tmp_path):
        rec = synth_session(2, calibration_script(cycles=1))
        target = tmp_path / "session.json"
        save_session(rec, target)
        loaded = load_session(target)
        assert np.allclose(loaded.emg, rec.emg)
        assert np.allclose(loaded.imu, rec.imu)
        assert loaded.schedule == rec.schedule

    def test_end_to_end_accuracy(self):
        rec = synth_session(23, calibration_script())
        report = decode_session(rec)
        assert report.accuracy >= 0.90
        assert all(
            b - a >= -1e-9
            for a, b in zip(report.log_likelihoods, report.log_likelihoods[1:])
        )
