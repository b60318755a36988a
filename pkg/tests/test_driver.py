import numpy as np
import pytest

from ringdrive.driver import (
    HARD_DECEL,
    IidmAccParams,
    cah_accel,
    cah_blend,
    equilibrium_gap,
    iidm_accel,
    iidm_accel_scalar,
)
from ringdrive.fastpath import traffic_accel


@pytest.fixture
def params():
    return IidmAccParams()


def test_param_validation():
    with pytest.raises(ValueError):
        IidmAccParams(v0=-1.0)
    with pytest.raises(ValueError):
        IidmAccParams(coolness=1.5)
    with pytest.raises(ValueError):
        IidmAccParams(delta=0.5)


def test_free_flow_fixed_point(params):
    # at desired speed with an enormous gap nothing happens
    assert iidm_accel(params.v0, 1e9, params.v0, params) == pytest.approx(0.0, abs=1e-9)


def test_standstill_equilibrium(params):
    # stopped at the minimum gap behind a stopped leader: z = 1 exactly
    assert iidm_accel(0.0, params.s0, 0.0, params) == pytest.approx(0.0, abs=1e-12)


def test_equilibrium_spacing_calibration(params):
    # the calibrated headway puts the 4 m/s equilibrium at s0 + v*T
    gap = float(equilibrium_gap(4.0, params))
    assert iidm_accel(4.0, gap, 4.0, params) == pytest.approx(0.0, abs=0.05)


def test_rejects_nonpositive_gap(params):
    with pytest.raises(ValueError):
        iidm_accel(1.0, 0.0, 1.0, params)
    with pytest.raises(ValueError):
        iidm_accel_scalar(1.0, -1.0, 1.0, 7.0, 1.6, 2.0, 1.0, 1.5, 4.0)


def test_overspeed_brakes(params):
    a = iidm_accel(params.v0 * 1.5, 1e9, params.v0 * 1.5, params)
    assert a < 0.0


def test_monotone_in_gap(params):
    # accel non-decreasing in gap over a sampled grid of speeds
    gaps = np.linspace(0.5, 60.0, 400)
    for v in (0.0, 2.0, 4.0, 6.9):
        for v_lead in (0.0, 2.0, 4.0, 7.0):
            acc = iidm_accel(np.full_like(gaps, v), gaps, np.full_like(gaps, v_lead), params)
            assert (np.diff(acc) >= -1e-9).all()


def test_scalar_path_matches_vector(params):
    rng = np.random.default_rng(0)
    for _ in range(500):
        v = rng.uniform(0, 10)
        gap = rng.uniform(0.1, 80)
        v_lead = rng.uniform(0, 10)
        ref = float(iidm_accel(v, gap, v_lead, params))
        fast = iidm_accel_scalar(v, gap, v_lead, params.v0, params.T, params.s0,
                                 params.a, params.b, params.delta)
        assert fast == pytest.approx(ref, abs=1e-12)


class TestCah:
    def test_pass_through_when_idm_not_braking_harder(self, params):
        # free flow: IDM accel above the heuristic keeps the IDM value
        a_idm = iidm_accel(3.0, 50.0, 3.0, params)
        out = cah_blend(a_idm, 3.0, 50.0, 3.0, 0.0, params)
        assert out == pytest.approx(float(a_idm), abs=1e-12)

    def test_zero_coolness_is_identity(self):
        p = IidmAccParams(coolness=0.0)
        a_idm = -4.0
        out = cah_blend(a_idm, 6.0, 2.0, 3.0, 0.0, p)
        acah = cah_accel(6.0, 2.0, 3.0, 0.0, p.a)
        # below the heuristic the mix is (1-c) a + c (...) = a at c = 0
        assert float(a_idm) < float(acah)
        assert out == pytest.approx(a_idm, abs=1e-12)

    def test_full_coolness_tanh_saturation(self):
        p = IidmAccParams(coolness=1.0)
        acah = float(cah_accel(5.0, 5.0, 30.0, 0.0, p.a))
        a_idm = acah - 50.0 * p.b
        out = cah_blend(a_idm, 5.0, 5.0, 30.0, 0.0, p)
        assert out == pytest.approx(max(acah - p.b, -HARD_DECEL), abs=1e-6)

    def test_output_bounds(self, params):
        rng = np.random.default_rng(1)
        v = rng.uniform(0, 10, 2000)
        gap = rng.uniform(0.05, 100, 2000)
        v_lead = rng.uniform(0, 10, 2000)
        a_lead = rng.uniform(-8, 2, 2000)
        out = cah_blend(iidm_accel(v, gap, v_lead, params), v, v_lead, gap, a_lead, params)
        assert (out >= -HARD_DECEL - 1e-12).all()
        assert (out <= params.a + 1e-12).all()

    def test_stopped_leader_stopping_branch(self, params):
        # leader fully stopped and braking: heuristic reduces to v^2/(2 gap)
        out = cah_accel(6.0, 0.0, 18.0, -5.0, params.a)
        assert out == pytest.approx(-36.0 / 36.0, abs=1e-12)


def test_fastpath_matches_reference(params):
    rng = np.random.default_rng(2)
    n = 64
    p = IidmAccParams(
        v0=7.0 * np.clip(1 + 0.04 * rng.standard_normal(n), 0.8, 1.2),
        T=1.68 * np.clip(1 + 0.08 * rng.standard_normal(n), 0.6, 1.6),
    )
    v = rng.uniform(0, 9, n)
    gap = rng.uniform(0.1, 60, n)
    v_lead = rng.uniform(0, 9, n)
    a_lead = rng.uniform(-8, 2, n)
    ref = cah_blend(iidm_accel(v, gap, v_lead, p), v, v_lead, gap, a_lead, p)
    arrays = tuple(
        np.broadcast_to(np.asarray(getattr(p, name), dtype=np.float64), (n,)).copy()
        for name in ("v0", "T", "s0", "a", "b", "delta", "coolness")
    )
    fast = traffic_accel(v, gap, v_lead, a_lead, *arrays, HARD_DECEL)
    assert np.allclose(fast, ref, atol=1e-12, rtol=0.0)


def test_platoon_holds_equilibrium(params):
    # 21 identical cars spaced at the equilibrium gap for 4 m/s drift less
    # than 0.01 m/s over 100 s
    from ringdrive.world import RingRoad, VehicleState, WorldState, advance_world

    gap = float(equilibrium_gap(4.0, params))
    length = 4.0
    pitch = gap + length
    n = 21
    road = RingRoad(pitch * n / (2 * np.pi))
    w = WorldState(road, [
        VehicleState(front_position=i * pitch, speed=4.0, length=length, id=i)
        for i in range(n)
    ])
    for _ in range(10000):
        gaps = w.gaps()
        v_lead = w.speeds[w.leader]
        acc = cah_blend(
            iidm_accel(w.speeds, gaps, v_lead, params),
            w.speeds, v_lead, gaps, np.zeros(n), params,
        )
        w = advance_world(w, acc, 0.01)
    assert np.abs(w.speeds - 4.0).max() < 0.01
