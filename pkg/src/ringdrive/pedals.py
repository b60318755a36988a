"""Virtual control-loader pedals and the powertrain they drive.

Covers the whole pedal half of the control stack: action arbitration between
accelerator and brake, the PID target-position controllers, haptic stiffness
modulation of the accelerator, the spring-damper pedal plant, the pedal to
vehicle-acceleration map, and the per-condition authority rules (manual,
haptic shared, fully automated).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum


class Condition(str, Enum):
    MANUAL = "manual"
    HAPTIC = "haptic"
    AUTOMATED = "automated"


class Action(IntEnum):
    COAST = 0
    ACCELERATE = 1
    BRAKE = 2


#: Speed-deficit band (m/s) inside which both pedals stay released.
COAST_BAND = 0.25


def select_action(v_cmd: float, v: float) -> Action:
    """Arbitrate between the pedals from the commanded-speed deficit.

    Positive deficit accelerates; a deficit in [-COAST_BAND, 0] releases both
    pedals (engine braking); anything below brakes. The three cases partition
    the real line, boundaries included in the coast case.
    """
    d = v_cmd - v
    if d > 0.0:
        return Action.ACCELERATE
    if d >= -COAST_BAND:
        return Action.COAST
    return Action.BRAKE


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float


class PidController:
    """PID with output clamped to [0, 1] and conditional-integration anti-windup.

    Derivative acts on the error through a first-order low-pass (10 Hz cutoff
    by default) to soften the kick at 100 Hz stepping; the integral uses the
    rectangle rule and freezes whenever the output is saturated.
    """

    __slots__ = ("gains", "d_cutoff_tau", "integral", "prev_error", "d_filt")

    def __init__(self, gains: PidGains, d_cutoff_hz: float = 10.0):
        self.gains = gains
        self.d_cutoff_tau = 1.0 / (2.0 * math.pi * d_cutoff_hz)
        self.reset()

    def reset(self, error: float = 0.0) -> None:
        """Clear state; seeding ``error`` suppresses the first-step kick."""
        self.integral = 0.0
        self.prev_error = error
        self.d_filt = 0.0

    def step(self, error: float, dt: float) -> float:
        """Advance one step and return the target position in [0, 1]."""
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        alpha = dt / (self.d_cutoff_tau + dt)
        self.d_filt += alpha * ((error - self.prev_error) / dt - self.d_filt)
        self.prev_error = error
        trial = self.integral + error * dt
        g = self.gains
        u = g.kp * error + g.ki * trial + g.kd * self.d_filt
        if 0.0 <= u <= 1.0:
            self.integral = trial
            return u
        return 0.0 if u < 0.0 else 1.0


@dataclass(frozen=True)
class HapticGains:
    """Stiffness slopes (N/rad^2): stiffer on release, softer on press."""

    release: float = 300.0
    press: float = 30.0

    def __post_init__(self) -> None:
        if self.press < 0.0 or self.release < self.press:
            raise ValueError("need release >= press >= 0")


def haptic_stiffness(
    position: float,
    target: float,
    base_stiffness: float,
    gains: HapticGains,
    floor: float = 5.0,
) -> float:
    """Stiffness (N/rad) cueing the foot toward the target position.

    A pedal pressed past the target stiffens at the release slope, one short
    of the target softens at the (much gentler) press slope; the result never
    drops below ``floor`` so the pedal always springs back.
    """
    offset = position - target
    slope = gains.release if offset > 0.0 else gains.press
    return max(floor, base_stiffness + slope * offset)


def pedal_force(stiffness: float, position: float, velocity: float, damping: float) -> float:
    """Spring-damper reaction force (N) at the pedal face."""
    return stiffness * position + damping * velocity


@dataclass
class PedalState:
    """One virtual pedal: spring-damper plant with travel limits.

    ``stiffness`` is the currently rendered stiffness (haptic modulation
    included); ``base_stiffness`` is the resting spring rate.
    """

    position: float = 0.0
    velocity: float = 0.0
    base_stiffness: float = 60.0
    damping: float = 5.0
    inertia: float = 0.05
    stiffness: float = 60.0
    travel: float = 0.35

    def __post_init__(self) -> None:
        if not (0.0 <= self.position <= self.travel):
            raise ValueError("position outside travel range")
        if min(self.base_stiffness, self.damping, self.inertia, self.stiffness) <= 0.0:
            raise ValueError("plant constants must be positive")

    @property
    def deflection(self) -> float:
        """Normalized position in [0, 1]."""
        return self.position / self.travel


def pedal_dynamics_step(pedal: PedalState, applied_force: float, dt: float) -> None:
    """Advance the pedal plant one step under an external applied force.

    Semi-implicit in velocity with the damping term handled implicitly, which
    keeps the stiff spring stable at 100 Hz. Positions clamp to the travel
    stops with the velocity zeroed there.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    inv_i = 1.0 / pedal.inertia
    v = pedal.velocity + dt * inv_i * (applied_force - pedal.stiffness * pedal.position)
    v /= 1.0 + dt * inv_i * pedal.damping
    s = pedal.position + v * dt
    if s <= 0.0:
        s, v = 0.0, 0.0
    elif s >= pedal.travel:
        s, v = pedal.travel, 0.0
    pedal.position = s
    pedal.velocity = v


def servo_step(pedal: PedalState, target_position: float, bandwidth: float, dt: float) -> None:
    """Critically damped position tracking used by the automated condition."""
    a = bandwidth * bandwidth * (target_position - pedal.position) - 2.0 * bandwidth * pedal.velocity
    v = pedal.velocity + a * dt
    s = pedal.position + v * dt
    if s <= 0.0:
        s, v = 0.0, 0.0
    elif s >= pedal.travel:
        s, v = pedal.travel, 0.0
    pedal.position = s
    pedal.velocity = v


@dataclass(frozen=True)
class PowertrainParams:
    """Pedal-deflection to longitudinal-acceleration map of the ego vehicle."""

    a_max: float = 2.5
    d_max: float = 6.0
    engine_brake: float = 0.7
    drag: float = 0.05
    deadband: float = 0.01

    def __post_init__(self) -> None:
        if min(self.a_max, self.d_max) <= 0.0 or min(self.engine_brake, self.drag) < 0.0:
            raise ValueError("powertrain constants must be non-negative, a_max/d_max positive")
        if self.d_max <= self.a_max:
            raise ValueError("brakes must be stronger than the engine (d_max > a_max)")
        if not 0.0 <= self.deadband < 1.0:
            raise ValueError("deadband must lie in [0, 1)")


def powertrain_accel(s_acc: float, s_brake: float, v: float, p: PowertrainParams) -> float:
    """Vehicle acceleration (m/s^2) from normalized pedal deflections.

    Deflections inside the free-play deadband count as released. If both
    pedals are pressed the brake wins (arbitration should prevent this;
    callers may log it as an anomaly). Released pedals at speed add engine
    braking on top of the speed-proportional drag.
    """
    if s_acc < p.deadband:
        s_acc = 0.0
    if s_brake < p.deadband:
        s_brake = 0.0
    if s_brake > 0.0:
        s_acc = 0.0
    a = p.a_max * s_acc - p.d_max * s_brake - p.drag * v
    if s_acc == 0.0 and s_brake == 0.0 and v > 0.0:
        a -= p.engine_brake
    return a


@dataclass(frozen=True)
class PedalConfig:
    """Plant constants, controller gains and authority thresholds."""

    travel: float = 0.35
    stiffness: float = 60.0
    damping: float = 5.0
    inertia: float = 0.05
    stiffness_floor: float = 5.0
    haptic: HapticGains = field(default_factory=HapticGains)
    accel_gains: PidGains = field(default_factory=lambda: PidGains(1.0, 0.01, 0.05))
    brake_gains: PidGains = field(default_factory=lambda: PidGains(0.7, -0.04, 0.1))
    override_force: float = 20.0
    servo_bandwidth: float = 25.0

    def make_pedal(self) -> PedalState:
        return PedalState(
            base_stiffness=self.stiffness,
            damping=self.damping,
            inertia=self.inertia,
            stiffness=self.stiffness,
            travel=self.travel,
        )


class PedalRig:
    """Both pedals of one session plus the per-condition authority rules.

    Manual: plain spring-damper pedals driven by human force only.
    Haptic: same, but the accelerator stiffness is re-rendered every step
    from the controller target. Automated: pedals servo to their targets;
    a human force at or above the override threshold takes full authority
    of that pedal for as long as it is applied.
    """

    def __init__(self, config: PedalConfig, condition: Condition):
        self.config = config
        self.condition = condition
        self.accel = config.make_pedal()
        self.brake = config.make_pedal()

    def step(
        self,
        f_accel: float,
        f_brake: float,
        target_accel: float,
        target_brake: float,
        dt: float,
    ) -> tuple[float, float]:
        """Advance both pedals one step; returns normalized deflections.

        Targets are normalized [0, 1] controller outputs; forces are the
        human's applied pedal forces in newtons (>= 0).
        """
        cfg = self.config
        acc, brk = self.accel, self.brake
        if self.condition is Condition.AUTOMATED:
            if f_accel >= cfg.override_force:
                acc.stiffness = acc.base_stiffness
                pedal_dynamics_step(acc, f_accel, dt)
            else:
                servo_step(acc, target_accel * cfg.travel, cfg.servo_bandwidth, dt)
            if f_brake >= cfg.override_force:
                brk.stiffness = brk.base_stiffness
                pedal_dynamics_step(brk, f_brake, dt)
            else:
                servo_step(brk, target_brake * cfg.travel, cfg.servo_bandwidth, dt)
        else:
            if self.condition is Condition.HAPTIC:
                acc.stiffness = haptic_stiffness(
                    acc.position,
                    target_accel * cfg.travel,
                    acc.base_stiffness,
                    cfg.haptic,
                    cfg.stiffness_floor,
                )
            else:
                acc.stiffness = acc.base_stiffness
            brk.stiffness = brk.base_stiffness
            pedal_dynamics_step(acc, f_accel, dt)
            pedal_dynamics_step(brk, f_brake, dt)
        return acc.deflection, brk.deflection
