"""Synthetic human driver standing in for experiment participants.

Three pieces: a noisy, reaction-delayed car-following intent; a quasi-static
neuromuscular coupling that turns intent into pedal force against whatever
stiffness the pedal currently renders; and a supervisory monitor that, in the
automated condition, catches runaway acceleration after a delay and stomps
the brake. Real participants are not reproducible, so everything here is a
model with config-exposed parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .driver import IidmAccParams, iidm_accel_scalar
from .pedals import Action, Condition, PedalConfig, PowertrainParams


def default_human_car_following() -> IidmAccParams:
    # Tailgating and hard on both pedals: human following is far less
    # anticipatory than the traffic cars', which is what feeds the
    # stop-and-go waves in the manual condition.
    return IidmAccParams(v0=7.0, T=0.6, s0=1.3, a=2.5, b=2.2, delta=4.0, coolness=0.0)


@dataclass(frozen=True)
class HumanParams:
    """Driver constants; cohort runs jitter these per participant.

    ``cue_yield`` is the passive give-way response to a pedal that resists
    harder than its resting spring: 0 means the driver keeps chasing their
    intended position regardless of felt force, 1 means they hold the force
    they intended to exert and let the pedal place itself. Softening below
    the resting stiffness is not followed (releasing resistance does not pull
    a foot down), which is what keeps the driver's intent in charge during a
    stiffness-corrupting failure.
    """

    reaction_delay: float = 0.7
    supervisory_delay: float = 2.5
    limb_stiffness: float = 600.0
    ou_sigma: float = 0.3
    ou_theta: float = 0.5
    car_following: IidmAccParams = field(default_factory=default_human_car_following)
    cue_yield: float = 1.0
    panic_ttc: float = 3.0
    accel_min: float = -6.0
    accel_max: float = 2.5
    gap_alarm: float = 6.0
    closing_alarm: float = 1.0
    intervene_force: float = 150.0

    def __post_init__(self) -> None:
        if self.reaction_delay < 0.0 or self.supervisory_delay < 0.0:
            raise ValueError("delays must be non-negative")
        if self.limb_stiffness <= 0.0:
            raise ValueError("limb_stiffness must be positive")
        if self.ou_sigma < 0.0 or self.ou_theta <= 0.0:
            raise ValueError("need ou_sigma >= 0 and ou_theta > 0")
        if not 0.0 <= self.cue_yield <= 1.0:
            raise ValueError("cue_yield must lie in [0, 1]")


def neuromuscular_force(desired_position: float, position: float, limb_stiffness: float) -> float:
    """Force (N) the limb applies chasing a desired pedal position.

    The foot can only push: the linear limb spring is clamped at zero, so a
    pedal past the desired position is simply released and returns on its
    own spring.
    """
    return max(0.0, limb_stiffness * (desired_position - position))


def equilibrium_depression(
    desired_position: float,
    limb_stiffness: float,
    pedal: PedalConfig,
    target: float | None = None,
) -> float:
    """Quasi-static pedal position where limb force balances the pedal spring.

    With haptic modulation the pedal stiffness is affine in position, making
    the force balance a quadratic; the root inside the travel range is
    returned. ``target=None`` means no modulation (constant base stiffness).
    """
    kl = limb_stiffness
    if target is None:
        s = kl * desired_position / (kl + pedal.stiffness)
        return min(s, pedal.travel)
    # Solve kl*(s_des - s) = clamp(k + kh*(s - target), floor) * s on [0, travel].
    # Try both stiffness slopes; keep the root consistent with its own regime.
    for slope in (pedal.haptic.release, pedal.haptic.press):
        a = slope
        b = pedal.stiffness + kl - slope * target
        c = -kl * desired_position
        if a == 0.0:
            roots = [-c / b] if b != 0.0 else []
        else:
            disc = b * b - 4.0 * a * c
            if disc < 0.0:
                continue
            sq = math.sqrt(disc)
            roots = [(-b + sq) / (2.0 * a), (-b - sq) / (2.0 * a)]
        for s in roots:
            if not 0.0 <= s <= pedal.travel:
                continue
            regime_release = s > target
            if (slope == pedal.haptic.release) == regime_release:
                k_here = pedal.stiffness + slope * (s - target)
                if k_here >= pedal.stiffness_floor:
                    return s
    # Fallback: stiffness pinned at the floor.
    s = kl * desired_position / (kl + pedal.stiffness_floor)
    return min(s, pedal.travel)


def intent_to_pedals(
    desired_accel: float, v: float, p: PowertrainParams
) -> tuple[float, float]:
    """Invert the powertrain map into mutually exclusive pedal deflections.

    Positive demand goes to the accelerator; demand below what engine braking
    delivers goes to the brake; the band in between is the coast dead zone
    where both pedals stay released.
    """
    coast = -(p.engine_brake if v > 0.0 else 0.0) - p.drag * v
    if desired_accel > max(0.0, coast):
        return min(1.0, (desired_accel + p.drag * v) / p.a_max), 0.0
    if desired_accel < coast:
        return 0.0, min(1.0, -(desired_accel + p.drag * v) / p.d_max)
    return 0.0, 0.0


def ou_path(n: int, sigma: float, theta: float, dt: float, rng: np.random.Generator) -> np.ndarray:
    """Exact-discretization Ornstein-Uhlenbeck sample path of length n."""
    if sigma == 0.0:
        return np.zeros(n)
    decay = math.exp(-theta * dt)
    scale = sigma * math.sqrt((1.0 - decay * decay) / (2.0 * theta))
    noise = scale * rng.standard_normal(n)
    return lfilter([1.0], [1.0, -decay], noise)


@dataclass(frozen=True)
class EgoObs:
    """What the ego input source can see (and feel) at one step."""

    gap: float
    v: float
    v_lead: float
    action: int
    accel_position: float
    brake_position: float
    accel_stiffness: float


def yielded_position(
    desired: float, felt_stiffness: float, base_stiffness: float, cue_yield: float
) -> float:
    """Desired pedal position after giving way to extra pedal resistance.

    A driver pressing against a pedal that is stiffer than usual partially
    holds force instead of position, landing at desired*(K/K_felt)^yield.
    A pedal softer than usual is not followed down.
    """
    if felt_stiffness <= base_stiffness or desired <= 0.0:
        return desired
    return desired * (base_stiffness / felt_stiffness) ** cue_yield


class SyntheticHuman:
    """Per-session human driver state machine.

    In manual and haptic conditions it produces pedal forces from delayed,
    noisy car-following intent every step. In the automated condition it only
    supervises: it arms on runaway acceleration toward a close leader and,
    after the supervisory delay, holds the brake until the gap stabilizes.
    A fixed seed gives an identical intent trace.
    """

    def __init__(
        self,
        params: HumanParams,
        pedal_config: PedalConfig,
        powertrain: PowertrainParams,
        condition: Condition,
        dt: float,
        horizon_steps: int,
        seed: int,
    ):
        self.params = params
        self.pedal_config = pedal_config
        self.powertrain = powertrain
        self.condition = condition
        self.dt = dt
        self.delay_steps = int(round(params.reaction_delay / dt))
        self.noise = ou_path(
            horizon_steps, params.ou_sigma, params.ou_theta, dt, np.random.Generator(np.random.PCG64(seed))
        )
        self._hist_gap = np.empty(horizon_steps, dtype=np.float64)
        self._hist_v = np.empty(horizon_steps, dtype=np.float64)
        self._hist_v_lead = np.empty(horizon_steps, dtype=np.float64)
        self._k = 0
        # Supervisory monitor state (automated condition only).
        self.hazard_onset: float | None = None
        self.intervened_at: float | None = None
        self.alerted = False
        self._hazard_since: float | None = None
        self._braking = False
        self.events: list[dict] = []

    def intent_accel(self, k: int) -> float:
        """Noisy car-following intent from the delayed observation buffer.

        The whole scene is perceived one reaction delay late, which is what
        lets waves grow. Car following runs two regimes: the usual model, and
        an emergency full-brake reflex once the perceived time-to-collision
        drops below the panic threshold (late hard stops are also exactly the
        overreaction that keeps stop-and-go waves alive).
        """
        p = self.params
        j = max(0, k - self.delay_steps)
        gap_obs = float(self._hist_gap[j])
        v_obs = float(self._hist_v[j])
        v_lead_obs = float(self._hist_v_lead[j])
        closing = v_obs - v_lead_obs
        if closing > 0.0 and gap_obs < p.panic_ttc * closing:
            return p.accel_min
        cf = p.car_following
        a = iidm_accel_scalar(
            v_obs, gap_obs, v_lead_obs,
            cf.v0, cf.T, cf.s0, cf.a, cf.b, cf.delta,
        )
        a += self.noise[k]
        return min(p.accel_max, max(p.accel_min, float(a)))

    #: Hazard must persist this long (s) before the clock starts; filters the
    #: one-step coincidences of normal stop-and-go crawling.
    HAZARD_PERSIST = 0.3

    def _supervise(self, t: float, obs: EgoObs) -> float:
        """Supervisory brake force for the automated condition.

        A hazard is sustained runaway acceleration toward a close leader.
        The first reaction comes one supervisory delay after the hazard has
        persisted; once the driver has intervened they stay alert and
        re-engage without the delay. The whole monitor disarms again when
        the gap is open and no longer closing.
        """
        p = self.params
        closing = obs.v - obs.v_lead
        hazard = (
            obs.action == int(Action.ACCELERATE)
            and closing > p.closing_alarm
            and obs.gap < p.gap_alarm
        )
        if self.hazard_onset is None:
            if hazard:
                if self._hazard_since is None:
                    self._hazard_since = t
                elif t - self._hazard_since >= self.HAZARD_PERSIST:
                    self.hazard_onset = t
            else:
                self._hazard_since = None
            if self.hazard_onset is None:
                return 0.0
        if not self.alerted and t - self.hazard_onset < p.supervisory_delay:
            return 0.0
        if self.intervened_at is None:
            self.intervened_at = t
            self.events.append({"kind": "intervention", "time": t})
        self.alerted = True
        # Hold the brake until the hazard has fully cleared: gap back open
        # and no longer closing. Holding (rather than releasing at speed
        # parity) keeps the first dip the deepest one.
        if obs.gap >= p.gap_alarm and closing <= 0.0:
            self.hazard_onset = None
            self._hazard_since = None
            return 0.0
        return p.intervene_force

    def step(self, k: int, t: float, obs: EgoObs) -> tuple[float, float]:
        """Record the observation and return (accel force, brake force) in N."""
        self._hist_gap[k] = obs.gap
        self._hist_v[k] = obs.v
        self._hist_v_lead[k] = obs.v_lead
        self._k = k
        if self.condition is Condition.AUTOMATED:
            return 0.0, self._supervise(t, obs)
        a_des = self.intent_accel(k)
        j = max(0, k - self.delay_steps)
        s_acc, s_brake = intent_to_pedals(a_des, float(self._hist_v[j]), self.powertrain)
        travel = self.pedal_config.travel
        kl = self.params.limb_stiffness
        s_acc = yielded_position(
            s_acc, obs.accel_stiffness, self.pedal_config.stiffness, self.params.cue_yield
        )
        f_acc = neuromuscular_force(s_acc * travel, obs.accel_position, kl)
        f_brake = neuromuscular_force(s_brake * travel, obs.brake_position, kl)
        return f_acc, f_brake

    def poll_events(self) -> list[dict]:
        out, self.events = self.events, []
        return out
