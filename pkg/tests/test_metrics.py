import math

import numpy as np
import pytest

from ringdrive.log import SessionLog
from ringdrive.metrics import (
    braking_instances,
    ego_speed_std,
    jam_lifetime,
    jam_not_dissipated,
    min_gap_after_failure,
    platoon_speed_std,
    session_metrics,
    throughput,
)

CIRC = 2 * math.pi * 42.0


def synth_log(speeds, positions=None, ego_gap=None, brake=None, events=None,
              dt=0.01, n_vehicles=None):
    speeds = np.asarray(speeds, dtype=float)
    if speeds.ndim == 1:
        speeds = speeds[:, None]
    n, m = speeds.shape
    if n_vehicles is not None:
        assert m == n_vehicles
    if positions is None:
        positions = np.cumsum(speeds * dt, axis=0) % CIRC
    zeros = np.zeros(n)
    return SessionLog(
        config={}, seed=0, dt=dt,
        time=np.arange(n) * dt,
        positions=np.asarray(positions, dtype=float),
        speeds=speeds,
        ego_gap=np.asarray(ego_gap, dtype=float) if ego_gap is not None else np.full(n, 10.0),
        vcmd=np.full(n, np.nan),
        action=np.full(n, -1, dtype=np.int8),
        accel_position=zeros.copy(),
        brake_position=np.asarray(brake, dtype=float) if brake is not None else zeros.copy(),
        accel_force=zeros.copy(),
        brake_force=zeros.copy(),
        accel_stiffness=np.full(n, 60.0),
        accel_target=zeros.copy(),
        brake_target=zeros.copy(),
        events=list(events or []),
        end_time=n * dt,
    )


def steps(seconds, dt=0.01):
    return int(round(seconds / dt))


class TestEgoSpeedStd:
    def test_constant_speed(self):
        log = synth_log(np.full(steps(480), 4.0))
        assert ego_speed_std(log) == 0.0

    def test_two_point_alternation(self):
        v = np.where(np.arange(steps(480)) % 2 == 0, 3.0, 5.0)
        log = synth_log(v)
        assert ego_speed_std(log) == pytest.approx(1.0, abs=1e-3)

    def test_translation_invariance(self):
        rng = np.random.default_rng(0)
        v = rng.uniform(0, 7, steps(480))
        a = ego_speed_std(synth_log(v))
        b = ego_speed_std(synth_log(v + 2.5))
        assert a == pytest.approx(b, abs=1e-9)

    def test_window_outside_log_raises(self):
        log = synth_log(np.full(steps(50), 4.0))
        with pytest.raises(ValueError):
            ego_speed_std(log)


class TestPlatoonSpeedStd:
    def test_all_constant(self):
        log = synth_log(np.full((steps(480), 21), 3.0))
        assert platoon_speed_std(log) == 0.0

    def test_single_oscillator_averages(self):
        n = steps(480)
        v = np.full((n, 21), 4.0)
        v[:, 7] = np.where(np.arange(n) % 2 == 0, 3.0, 5.0)
        log = synth_log(v)
        single = ego_speed_std(synth_log(v[:, 7]))
        assert platoon_speed_std(log) == pytest.approx(single / 21.0, abs=1e-9)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        v = rng.uniform(0, 7, (steps(480), 21))
        a = platoon_speed_std(synth_log(v))
        b = platoon_speed_std(synth_log(v[:, rng.permutation(21)]))
        assert a == pytest.approx(b, abs=1e-9)


class TestBrakingInstances:
    def test_untouched(self):
        log = synth_log(np.full(2000, 4.0), brake=np.zeros(2000))
        assert braking_instances(log) == 0

    def test_press_hold_release(self):
        b = np.zeros(2000)
        b[400:900] = 0.3
        log = synth_log(np.full(2000, 4.0), brake=b)
        assert braking_instances(log) == 1

    def test_debounce_merges_close_presses(self):
        b = np.zeros(2000)
        b[400:405] = 0.3   # tap
        b[410:460] = 0.3   # second rising edge 0.1 s after the first: merged
        log = synth_log(np.full(2000, 4.0), brake=b)
        assert braking_instances(log) == 1

    def test_separate_presses_counted(self):
        b = np.zeros(2000)
        b[400:450] = 0.3
        b[900:950] = 0.3   # 4.5 s later
        log = synth_log(np.full(2000, 4.0), brake=b)
        assert braking_instances(log) == 2

    def test_threshold(self):
        b = np.full(2000, 0.01)  # below threshold
        log = synth_log(np.full(2000, 4.0), brake=b)
        assert braking_instances(log) == 0


class TestJamLifetime:
    def test_all_moving_after_transient(self):
        n = steps(480)
        v = np.full((n, 3), 4.0)
        v[: steps(60), 0] = 0.0
        log = synth_log(v)
        assert jam_lifetime(log) == 0.0

    def test_standstill_through_session_capped(self):
        v = np.full((steps(480), 3), 4.0)
        v[:, 2] = 0.0
        log = synth_log(v)
        assert jam_lifetime(log) == 405.0
        assert jam_not_dissipated(405.0)

    def test_last_standstill_arithmetic(self):
        n = steps(480)
        v = np.full((n, 3), 4.0)
        v[: steps(200), 1] = 0.0  # standstill ends at t = 200
        log = synth_log(v)
        assert jam_lifetime(log) == pytest.approx(125.0, abs=1e-9)
        assert not jam_not_dissipated(125.0)

    def test_collision_truncated_log_is_capped(self):
        v = np.full((steps(100), 3), 4.0)
        log = synth_log(v)
        assert jam_lifetime(log) == 405.0

    def test_range_invariant(self):
        rng = np.random.default_rng(2)
        v = rng.uniform(0, 7, (steps(480), 5))
        assert 0.0 <= jam_lifetime(synth_log(v)) <= 405.0


class TestThroughput:
    def test_parked(self):
        log = synth_log(np.zeros((steps(480), 21)), positions=np.zeros((steps(480), 21)))
        assert throughput(log) == 0.0

    def test_steady_state_count(self):
        # 21 cars at a constant 4 m/s: 21 * (4 * 480 / C) crossings / 8 min
        n = steps(480)
        starts = np.linspace(0, CIRC, 21, endpoint=False)
        t = np.arange(n) * 0.01
        pos = (starts[None, :] + 4.0 * t[:, None]) % CIRC
        log = synth_log(np.full((n, 21), 4.0), positions=pos)
        ideal = 21 * (4.0 * 480.0 / CIRC) / 8.0
        assert throughput(log) == pytest.approx(ideal, abs=21 / 8 / 60 + 0.4)
        assert ideal == pytest.approx(19.1, abs=0.01)

    def test_origin_rotation_invariance(self):
        n = steps(480)
        starts = np.linspace(0, CIRC, 21, endpoint=False)
        t = np.arange(n) * 0.01
        pos = (starts[None, :] + 4.0 * t[:, None]) % CIRC
        a = throughput(synth_log(np.full((n, 21), 4.0), positions=pos))
        rotated = (pos + 100.0) % CIRC
        b = throughput(synth_log(np.full((n, 21), 4.0), positions=rotated))
        # full laps dominate: at most one crossing per car of difference
        assert abs(a - b) <= 21 / 8.0


class TestMinGapAfterFailure:
    def failure_log(self, gap_trace, events=None, dt=0.01):
        n = len(gap_trace)
        ev = [{"kind": "failure", "time": 480.0}] + list(events or [])
        v = np.full((n, 2), 4.0)
        log = synth_log(v, ego_gap=np.asarray(gap_trace), events=ev, dt=dt)
        log.time = 480.0 + np.arange(n) * dt
        return log

    def test_v_shaped_trace(self):
        t = np.arange(steps(15))
        gap = np.abs(t - 750) / 750 * 4.3 + 1.7
        log = self.failure_log(gap)
        assert min_gap_after_failure(log) == pytest.approx(1.7, abs=1e-9)

    def test_monotone_increase_takes_left_endpoint(self):
        gap = np.linspace(5.0, 9.0, steps(15))
        log = self.failure_log(gap)
        assert min_gap_after_failure(log) == pytest.approx(5.0, abs=1e-12)

    def test_collision_returns_zero(self):
        gap = np.linspace(5.0, 0.0, steps(10))
        log = self.failure_log(gap, events=[{"kind": "collision", "time": 490.0}])
        assert min_gap_after_failure(log) == 0.0

    def test_requires_failure_event(self):
        log = synth_log(np.full((100, 2), 4.0))
        with pytest.raises(ValueError):
            min_gap_after_failure(log)


def test_session_metrics_pure_function():
    rng = np.random.default_rng(3)
    v = rng.uniform(0, 7, (steps(480), 21))
    b = (rng.uniform(size=steps(480)) < 0.01).astype(float) * 0.5
    log = synth_log(v, brake=b)
    m1 = session_metrics(log)
    m2 = session_metrics(log)
    assert m1 == m2
