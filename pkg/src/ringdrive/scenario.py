"""Session assembly: the closed loop, silent failure injection, cohorts.

One session steps traffic cars (IIDM/ACC), the ego pipeline for the selected
condition (manual, haptic shared, automated) and the virtual pedal rig at a
fixed 100 Hz, writing every sample into a SessionLog. A cohort pairs the same
synthetic participant (human parameters and world jitter) across conditions
while giving each condition its own noise stream.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Protocol

import numpy as np

from .config import ScenarioConfig, TrafficConfig
from .driver import HARD_DECEL, IidmAccParams
from .fastpath import advance, observe, traffic_accel
from .follower_stopper import command_speed
from .human import EgoObs, HumanParams, SyntheticHuman
from .log import SessionLog
from .pedals import Action, Condition, PedalRig, PidController, powertrain_accel, select_action
from .world import init_scenario

#: Gap value (m) the failed range sensor reports to the speed controller.
FAILED_SENSOR_GAP = 1000.0

#: Speed (m/s) below which a vehicle counts as standing still.
STANDSTILL_SPEED = 0.05

#: Action code logged for the manual condition (no controller running).
NO_ACTION = -1


class EgoInput(Protocol):
    """Source of the human pedal forces, one query per step."""

    def step(self, k: int, t: float, obs: EgoObs) -> tuple[float, float]: ...


class ReplayInput:
    """Feed back a recorded force trace (record/replay equivalence)."""

    def __init__(self, accel_force: np.ndarray, brake_force: np.ndarray):
        self.accel_force = np.asarray(accel_force, dtype=np.float64)
        self.brake_force = np.asarray(brake_force, dtype=np.float64)

    def step(self, k: int, t: float, obs: EgoObs) -> tuple[float, float]:
        if k >= self.accel_force.shape[0]:
            return 0.0, 0.0
        return float(self.accel_force[k]), float(self.brake_force[k])


class HeldInput:
    """Hold the latest externally supplied forces until they are replaced.

    Values may arrive as forces (newtons) or desired deflections in [0, 1];
    deflections go through the neuromuscular coupling against the current
    pedal position each step, so stiffness changes still shape the result.
    """

    def __init__(self, limb_stiffness: float, travel: float):
        self.limb_stiffness = limb_stiffness
        self.travel = travel
        self.mode = "force"
        self.accel = 0.0
        self.brake = 0.0

    def set(self, accel: float, brake: float, mode: str = "force") -> None:
        if mode not in ("force", "deflection"):
            raise ValueError(f"unknown input mode: {mode}")
        self.mode = mode
        self.accel = max(0.0, float(accel))
        self.brake = max(0.0, float(brake))

    def step(self, k: int, t: float, obs: EgoObs) -> tuple[float, float]:
        if self.mode == "force":
            return self.accel, self.brake
        kl = self.limb_stiffness
        f_acc = max(0.0, kl * (min(self.accel, 1.0) * self.travel - obs.accel_position))
        f_brake = max(0.0, kl * (min(self.brake, 1.0) * self.travel - obs.brake_position))
        return f_acc, f_brake


def sample_traffic_params(traffic: TrafficConfig, n_cars: int, seed: int) -> IidmAccParams:
    """Per-car parameter arrays with seeded jitter on headway and speed."""
    p = traffic.params
    rng = np.random.Generator(np.random.PCG64(seed))
    T = p.T * np.clip(1.0 + traffic.headway_jitter * rng.standard_normal(n_cars), 0.6, 1.6)
    v0 = p.v0 * np.clip(1.0 + traffic.speed_jitter * rng.standard_normal(n_cars), 0.8, 1.2)
    return replace(p, T=T, v0=v0)


def sample_human_params(base: HumanParams, rng: np.random.Generator) -> HumanParams:
    """One synthetic participant: jitter the base driver, fixed draw order.

    Clip ranges keep the cohort inside the regime where drivers are wave-prone
    but still competent enough not to rear-end anyone outside a failure.
    """
    def factor(sd, lo, hi):
        return float(np.clip(1.0 + sd * rng.standard_normal(), lo, hi))

    cf = base.car_following
    return replace(
        base,
        reaction_delay=base.reaction_delay * factor(0.15, 0.7, 1.2),
        supervisory_delay=base.supervisory_delay * factor(0.30, 0.4, 2.0),
        cue_yield=float(np.clip(base.cue_yield * (1.0 + 0.25 * rng.standard_normal()), 0.3, 1.0)),
        car_following=replace(
            cf,
            T=cf.T * factor(0.10, 0.85, 1.35),
            a=cf.a * factor(0.12, 0.8, 1.2),
            b=cf.b * factor(0.10, 0.85, 1.15),
            v0=cf.v0 * factor(0.05, 0.92, 1.08),
        ),
    )


class SessionEngine:
    """Incrementally steppable session; drives both batch and live modes."""

    def __init__(self, config: ScenarioConfig, ego_input: EgoInput | None = None):
        self.config = config
        dt = config.dt
        self.dt = dt
        self.n_steps = int(round(config.end_time / dt))
        world = init_scenario(config.world)
        n = world.n
        self.n_vehicles = n
        self._pos = world.positions.copy()
        self._v = world.speeds.copy()
        self._lengths = world.lengths
        self._leader = world.leader
        self._circumference = world.road.circumference
        self._free_arc = self._circumference - float(world.lengths.sum())

        self.traffic_params = sample_traffic_params(
            config.traffic, n - 1, config.effective_world_seed
        )
        tp = self.traffic_params
        self._tp_arrays = tuple(
            np.broadcast_to(np.asarray(getattr(tp, name), dtype=np.float64), (n - 1,)).copy()
            for name in ("v0", "T", "s0", "a", "b", "delta", "coolness")
        )
        if ego_input is None:
            ego_input = SyntheticHuman(
                config.human,
                config.pedals,
                config.powertrain,
                config.condition,
                dt,
                self.n_steps,
                config.seed,
            )
        self.ego_input = ego_input
        self._poll_events = getattr(ego_input, "poll_events", None)

        self.rig = PedalRig(config.pedals, config.condition)
        self.acc_pid = PidController(config.pedals.accel_gains)
        self.brake_pid = PidController(config.pedals.brake_gains)
        self._last_action = Action.COAST

        self.controlled = config.condition is not Condition.MANUAL
        self.failure_active = False
        self.jam_dissipated = False
        self.done = False
        self.k = 0
        self.end_time = config.end_time
        self.anomaly_steps = 0
        self.events: list[dict] = []
        self._new_events: list[dict] = []
        self._prev_v_lead = self._v[self._leader].copy()

        shape = (self.n_steps,)
        self._positions = np.empty((self.n_steps, n))
        self._speeds = np.empty((self.n_steps, n))
        self._ego_gap = np.empty(shape)
        self._vcmd = np.full(shape, np.nan)
        self._action = np.full(shape, NO_ACTION, dtype=np.int8)
        self._acc_pos = np.empty(shape)
        self._brake_pos = np.empty(shape)
        self._acc_force = np.empty(shape)
        self._brake_force = np.empty(shape)
        self._acc_stiff = np.empty(shape)
        self._acc_target = np.zeros(shape)
        self._brake_target = np.zeros(shape)

    # -- live observables (used by the session service) ------------------

    @property
    def time(self) -> float:
        return self.k * self.dt

    def _gaps(self) -> np.ndarray:
        return observe(
            self._pos, self._lengths, self._leader, self._circumference, self._free_arc
        )

    def vehicles_snapshot(self) -> list[dict]:
        return [
            {
                "id": i,
                "pos": float(self._pos[i]),
                "speed": float(self._v[i]),
                "length": float(self._lengths[i]),
                "ego": i == 0,
            }
            for i in range(self.n_vehicles)
        ]

    def ego_snapshot(self) -> dict:
        k = self.k - 1
        if k < 0:
            return {
                "gap": float(self._gaps()[0]),
                "v": float(self._v[0]),
                "vcmd": None,
                "S_acc": 0.0,
                "S_brake": 0.0,
                "K_hc": self.config.pedals.stiffness,
                "S_target": 0.0,
            }
        vcmd = float(self._vcmd[k])
        return {
            "gap": float(self._ego_gap[k]),
            "v": float(self._speeds[k, 0]),
            "vcmd": None if math.isnan(vcmd) else vcmd,
            "S_acc": float(self._acc_pos[k]),
            "S_brake": float(self._brake_pos[k]),
            "K_hc": float(self._acc_stiff[k]),
            "S_target": float(self._acc_target[k]),
        }

    # -- failure injection -----------------------------------------------

    def inject_failure(self) -> None:
        """Corrupt the controller's gap input from now on (idempotent).

        Only the speed controller sees the failed value; physics, metrics,
        collision detection and the human all keep the true gap.
        """
        if not self.failure_active:
            self.failure_active = True
            event = {"kind": "failure", "time": self.config.failure_time}
            self.events.append(event)
            self._new_events.append(event)

    # -- stepping ----------------------------------------------------------

    def step(self) -> list[dict]:
        """Advance one dt; returns events raised during this step."""
        if self.done:
            return []
        self._new_events = []
        cfg = self.config
        dt = self.dt
        k = self.k
        t = k * dt
        v = self._v
        gaps = self._gaps()

        # Collision ends the run before anything else happens this step.
        gi = int(gaps.argmin())
        if gaps[gi] <= 0.0:
            event = {
                "kind": "collision",
                "time": t,
                "follower": gi,
                "leader": int(self._leader[gi]),
                "gap": float(gaps[gi]),
            }
            self.events.append(event)
            self._new_events.append(event)
            self._finish(t)
            return self._new_events

        ego_gap = float(gaps[0])
        v_ego = float(v[0])
        v_lead_ego = float(v[self._leader[0]])

        # Ego controller (haptic and automated conditions).
        vcmd = math.nan
        action = NO_ACTION
        target_acc = 0.0
        target_brake = 0.0
        if self.controlled:
            if not self.failure_active and t >= cfg.failure_time:
                self.inject_failure()
            gap_in = FAILED_SENSOR_GAP if self.failure_active else ego_gap
            vcmd = command_speed(gap_in, v_ego, v_lead_ego, cfg.follower_stopper)
            act = select_action(vcmd, v_ego)
            if act is not self._last_action:
                # Fresh activation: seed the PID so the switch itself does not
                # kick the derivative term.
                if act is Action.ACCELERATE:
                    self.acc_pid.reset(vcmd - v_ego)
                elif act is Action.BRAKE:
                    self.brake_pid.reset(v_ego - vcmd)
                self._last_action = act
            if act is Action.ACCELERATE:
                target_acc = self.acc_pid.step(vcmd - v_ego, dt)
            elif act is Action.BRAKE:
                target_brake = self.brake_pid.step(v_ego - vcmd, dt)
            action = int(act)

        # Human (or external) pedal forces, then the pedal plants.
        rig = self.rig
        obs = EgoObs(
            gap=ego_gap,
            v=v_ego,
            v_lead=v_lead_ego,
            action=action,
            accel_position=rig.accel.position,
            brake_position=rig.brake.position,
            accel_stiffness=rig.accel.stiffness,
        )
        f_acc, f_brake = self.ego_input.step(k, t, obs)
        s_acc, s_brake = rig.step(f_acc, f_brake, target_acc, target_brake, dt)

        deadband = cfg.powertrain.deadband
        if s_acc >= deadband and s_brake >= deadband:
            self.anomaly_steps += 1
        a_ego = powertrain_accel(s_acc, s_brake, v_ego, cfg.powertrain)

        # Traffic cars: improved IDM with the ACC blend, leader acceleration
        # estimated by first-differencing leader speeds.
        v_lead_all = v[self._leader]
        a_lead_est = (v_lead_all - self._prev_v_lead) / dt
        self._prev_v_lead = v_lead_all
        a_traffic = traffic_accel(
            v[1:], gaps[1:], v_lead_all[1:], a_lead_est[1:], *self._tp_arrays, HARD_DECEL
        )

        accels = np.empty(self.n_vehicles)
        accels[0] = a_ego
        accels[1:] = a_traffic

        # Log this step's state and controls.
        self._positions[k] = self._pos
        self._speeds[k] = v
        self._ego_gap[k] = ego_gap
        self._vcmd[k] = vcmd
        self._action[k] = action
        self._acc_pos[k] = s_acc
        self._brake_pos[k] = s_brake
        self._acc_force[k] = f_acc
        self._brake_force[k] = f_brake
        self._acc_stiff[k] = rig.accel.stiffness
        self._acc_target[k] = target_acc
        self._brake_target[k] = target_brake

        if not self.jam_dissipated and t >= cfg.transient and float(v.min()) > STANDSTILL_SPEED:
            self.jam_dissipated = True
            event = {"kind": "jam_dissipated", "time": t}
            self.events.append(event)
            self._new_events.append(event)

        if self._poll_events is not None:
            for event in self._poll_events():
                self.events.append(event)
                self._new_events.append(event)

        self._pos, self._v = advance(
            self._pos, self._v, accels, dt, cfg.world.accel_bound, self._circumference
        )
        self.k = k + 1
        if self.k >= self.n_steps:
            self._finish(cfg.end_time)
        return self._new_events

    def _finish(self, end_time: float) -> None:
        self.done = True
        self.end_time = end_time

    def stop(self) -> None:
        """End the session now (client-initiated stop)."""
        self._finish(self.time)

    def run(self) -> SessionLog:
        while not self.done:
            self.step()
        return self.result()

    def result(self) -> SessionLog:
        if not self.done:
            raise RuntimeError("session still running")
        k = self.k
        dt = self.dt
        return SessionLog(
            config=self.config.to_dict(),
            seed=self.config.seed,
            dt=dt,
            time=np.arange(k) * dt,
            positions=self._positions[:k].copy(),
            speeds=self._speeds[:k].copy(),
            ego_gap=self._ego_gap[:k].copy(),
            vcmd=self._vcmd[:k].copy(),
            action=self._action[:k].copy(),
            accel_position=self._acc_pos[:k].copy(),
            brake_position=self._brake_pos[:k].copy(),
            accel_force=self._acc_force[:k].copy(),
            brake_force=self._brake_force[:k].copy(),
            accel_stiffness=self._acc_stiff[:k].copy(),
            accel_target=self._acc_target[:k].copy(),
            brake_target=self._brake_target[:k].copy(),
            events=self.events,
            end_time=self.end_time,
            anomaly_steps=self.anomaly_steps,
        )


def run_session(config: ScenarioConfig, ego_input: EgoInput | None = None) -> SessionLog:
    """Run one complete session and return its log."""
    return SessionEngine(config, ego_input).run()


def participant_config(
    base: ScenarioConfig, base_seed: int, participant: int, condition: Condition
) -> ScenarioConfig:
    """Config for one participant-condition cell of the paired design.

    Human parameters and the traffic world are derived from (base_seed,
    participant) only, so they are identical across that participant's
    conditions; the noise seed additionally hashes the condition, so intent
    noise differs between sessions.
    """
    human_seq = np.random.SeedSequence(entropy=(int(base_seed), int(participant), 0))
    world_seq = np.random.SeedSequence(entropy=(int(base_seed), int(participant), 1))
    cond_index = list(Condition).index(condition)
    noise_seq = np.random.SeedSequence(entropy=(int(base_seed), int(participant), 2 + cond_index))
    rng = np.random.Generator(np.random.PCG64(human_seq))
    human = sample_human_params(base.human, rng)
    world_seed = int(world_seq.generate_state(1)[0])
    noise_seed = int(noise_seq.generate_state(1)[0])
    return replace(
        base,
        condition=condition,
        seed=noise_seed,
        world_seed=world_seed,
        human=human,
    )


def _run_cell(args):
    base, base_seed, participant, condition = args
    from .metrics import session_metrics

    cfg = participant_config(base, base_seed, participant, condition)
    log = run_session(cfg)
    m = session_metrics(log)
    row = {
        "participant": participant,
        "condition": condition.value,
        "seed": cfg.seed,
        "world_seed": cfg.world_seed,
        **m.to_dict(),
    }
    return row, log


def run_cohort(
    n_participants: int,
    conditions: list[Condition],
    base_seed: int,
    base_config: ScenarioConfig | None = None,
    workers: int = 1,
    log_consumer=None,
):
    """Run the full paired design; returns one metrics row per session.

    Rows are ordered by (participant, condition) regardless of worker
    completion order. ``log_consumer(participant, condition, log)`` is called
    once per finished session (in order) and the log is dropped afterwards,
    keeping memory flat.
    """
    if n_participants < 2:
        raise ValueError("a cohort needs at least two participants")
    base = base_config if base_config is not None else ScenarioConfig()
    jobs = [
        (base, base_seed, i, cond) for i in range(n_participants) for cond in conditions
    ]
    rows = []
    if workers <= 1:
        for job in jobs:
            row, session_log = _run_cell(job)
            rows.append(row)
            if log_consumer is not None:
                log_consumer(job[2], job[3], session_log)
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            for job, (row, session_log) in zip(jobs, pool.map(_run_cell, jobs)):
                rows.append(row)
                if log_consumer is not None:
                    log_consumer(job[2], job[3], session_log)
    return rows
