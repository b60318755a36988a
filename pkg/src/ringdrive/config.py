"""Scenario configuration: one dataclass tree, INI file loading, dict echo.

The INI format is the human-editable surface (comments allowed, every key
optional); ``to_dict``/``from_dict`` give the exact round-trippable echo that
session logs embed so a log always reproduces its inputs.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

from .driver import IidmAccParams
from .follower_stopper import FollowerStopperParams
from .human import HumanParams
from .pedals import Condition, HapticGains, PedalConfig, PidGains, PowertrainParams
from .world import WorldConfig


@dataclass(frozen=True)
class TrafficConfig:
    """Traffic-car driver parameters plus per-car jitter magnitudes.

    ``headway_jitter``/``speed_jitter`` are fractional standard deviations
    applied per car to T and v0, seeded by the world seed, so different seeds
    produce genuinely different (but reproducible) platoons.
    """

    params: IidmAccParams = field(default_factory=IidmAccParams)
    headway_jitter: float = 0.08
    speed_jitter: float = 0.04


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one session needs; defaults reproduce the study setup."""

    condition: Condition = Condition.AUTOMATED
    seed: int = 0
    world_seed: int | None = None
    duration: float = 480.0
    transient: float = 75.0
    failure_time: float = 480.0
    failure_window: float = 15.0
    dt: float = 0.01
    world: WorldConfig = field(default_factory=WorldConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    follower_stopper: FollowerStopperParams = field(default_factory=FollowerStopperParams)
    pedals: PedalConfig = field(default_factory=PedalConfig)
    powertrain: PowertrainParams = field(default_factory=PowertrainParams)
    human: HumanParams = field(default_factory=HumanParams)

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.failure_time > self.duration:
            raise ValueError("failure_time must not exceed duration")
        if not 0.0 <= self.transient < self.duration:
            raise ValueError("transient must lie inside the session")
        if self.failure_window < 0.0:
            raise ValueError("failure_window must be non-negative")

    @property
    def end_time(self) -> float:
        """Scheduled session end: manual runs the full duration, the other
        conditions stop one failure window after the failure."""
        if self.condition is Condition.MANUAL:
            return self.duration
        return self.failure_time + self.failure_window

    @property
    def effective_world_seed(self) -> int:
        return self.seed if self.world_seed is None else self.world_seed

    def to_dict(self) -> dict[str, Any]:
        """JSON-canonical echo: enums to strings, tuples to lists."""
        d = asdict(self)
        d["condition"] = self.condition.value
        d["follower_stopper"]["gap0"] = list(d["follower_stopper"]["gap0"])
        d["follower_stopper"]["decel"] = list(d["follower_stopper"]["decel"])
        return d


def config_from_dict(d: dict[str, Any]) -> ScenarioConfig:
    """Rebuild a ScenarioConfig from a ``to_dict`` echo."""
    d = dict(d)
    world = WorldConfig(**d.pop("world"))
    tr = dict(d.pop("traffic"))
    traffic = TrafficConfig(params=IidmAccParams(**tr.pop("params")), **tr)
    fs = dict(d.pop("follower_stopper"))
    follower = FollowerStopperParams(
        gap0=tuple(fs["gap0"]), decel=tuple(fs["decel"]), u_max=fs["u_max"]
    )
    pd = dict(d.pop("pedals"))
    pedals = PedalConfig(
        haptic=HapticGains(**pd.pop("haptic")),
        accel_gains=PidGains(**pd.pop("accel_gains")),
        brake_gains=PidGains(**pd.pop("brake_gains")),
        **pd,
    )
    powertrain = PowertrainParams(**d.pop("powertrain"))
    hu = dict(d.pop("human"))
    human = HumanParams(car_following=IidmAccParams(**hu.pop("car_following")), **hu)
    return ScenarioConfig(
        condition=Condition(d.pop("condition")),
        world=world,
        traffic=traffic,
        follower_stopper=follower,
        pedals=pedals,
        powertrain=powertrain,
        human=human,
        **d,
    )


def _get(section, key, cast, current):
    if section is None or key not in section:
        return current
    if cast is bool:
        return section.getboolean(key)
    return cast(section[key])


def load_config(path: str | Path | None = None, **overrides: Any) -> ScenarioConfig:
    """Build a config from defaults, an optional INI file, then overrides.

    Unknown sections or keys raise so typos do not silently fall back to
    defaults. Overrides are top-level ScenarioConfig fields.
    """
    cfg = ScenarioConfig()
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        read = parser.read(str(path))
        if not read:
            raise FileNotFoundError(f"config file not found: {path}")
        known = {
            "session", "world", "traffic", "follower_stopper",
            "pedals", "powertrain", "human",
        }
        unknown = set(parser.sections()) - known
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        cfg = _apply_ini(cfg, parser)
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def _apply_ini(cfg: ScenarioConfig, parser: configparser.ConfigParser) -> ScenarioConfig:
    def sec(name):
        return parser[name] if parser.has_section(name) else None

    s = sec("session")
    top: dict[str, Any] = {}
    if s is not None:
        _check_keys(s, "session", {
            "condition", "seed", "world_seed", "duration", "transient",
            "failure_time", "failure_window", "dt",
        })
        if "condition" in s:
            top["condition"] = Condition(s["condition"].strip().lower())
        for key, cast in (
            ("seed", int), ("world_seed", int), ("duration", float), ("transient", float),
            ("failure_time", float), ("failure_window", float), ("dt", float),
        ):
            if key in s:
                top[key] = cast(s[key])

    w = sec("world")
    if w is not None:
        _check_keys(w, "world", {"radius", "n_vehicles", "vehicle_length", "jam_gap", "accel_bound"})
        top["world"] = WorldConfig(
            radius=_get(w, "radius", float, cfg.world.radius),
            n_vehicles=_get(w, "n_vehicles", int, cfg.world.n_vehicles),
            vehicle_length=_get(w, "vehicle_length", float, cfg.world.vehicle_length),
            jam_gap=_get(w, "jam_gap", float, cfg.world.jam_gap),
            accel_bound=_get(w, "accel_bound", float, cfg.world.accel_bound),
        )

    t = sec("traffic")
    if t is not None:
        _check_keys(t, "traffic", {
            "v0", "headway", "min_gap", "max_accel", "comfort_decel", "exponent",
            "coolness", "headway_jitter", "speed_jitter",
        })
        base = cfg.traffic.params
        top["traffic"] = TrafficConfig(
            params=IidmAccParams(
                v0=_get(t, "v0", float, base.v0),
                T=_get(t, "headway", float, base.T),
                s0=_get(t, "min_gap", float, base.s0),
                a=_get(t, "max_accel", float, base.a),
                b=_get(t, "comfort_decel", float, base.b),
                delta=_get(t, "exponent", float, base.delta),
                coolness=_get(t, "coolness", float, base.coolness),
            ),
            headway_jitter=_get(t, "headway_jitter", float, cfg.traffic.headway_jitter),
            speed_jitter=_get(t, "speed_jitter", float, cfg.traffic.speed_jitter),
        )

    f = sec("follower_stopper")
    if f is not None:
        _check_keys(f, "follower_stopper", {"gap1", "gap2", "gap3", "decel1", "decel2", "decel3", "u_max"})
        g0 = cfg.follower_stopper.gap0
        dd = cfg.follower_stopper.decel
        top["follower_stopper"] = FollowerStopperParams(
            gap0=(
                _get(f, "gap1", float, g0[0]),
                _get(f, "gap2", float, g0[1]),
                _get(f, "gap3", float, g0[2]),
            ),
            decel=(
                _get(f, "decel1", float, dd[0]),
                _get(f, "decel2", float, dd[1]),
                _get(f, "decel3", float, dd[2]),
            ),
            u_max=_get(f, "u_max", float, cfg.follower_stopper.u_max),
        )

    p = sec("pedals")
    if p is not None:
        _check_keys(p, "pedals", {
            "travel", "stiffness", "damping", "inertia", "stiffness_floor",
            "release_gain", "press_gain", "override_force", "servo_bandwidth",
            "accel_kp", "accel_ki", "accel_kd", "brake_kp", "brake_ki", "brake_kd",
        })
        base_p = cfg.pedals
        top["pedals"] = PedalConfig(
            travel=_get(p, "travel", float, base_p.travel),
            stiffness=_get(p, "stiffness", float, base_p.stiffness),
            damping=_get(p, "damping", float, base_p.damping),
            inertia=_get(p, "inertia", float, base_p.inertia),
            stiffness_floor=_get(p, "stiffness_floor", float, base_p.stiffness_floor),
            haptic=HapticGains(
                release=_get(p, "release_gain", float, base_p.haptic.release),
                press=_get(p, "press_gain", float, base_p.haptic.press),
            ),
            accel_gains=PidGains(
                kp=_get(p, "accel_kp", float, base_p.accel_gains.kp),
                ki=_get(p, "accel_ki", float, base_p.accel_gains.ki),
                kd=_get(p, "accel_kd", float, base_p.accel_gains.kd),
            ),
            brake_gains=PidGains(
                kp=_get(p, "brake_kp", float, base_p.brake_gains.kp),
                ki=_get(p, "brake_ki", float, base_p.brake_gains.ki),
                kd=_get(p, "brake_kd", float, base_p.brake_gains.kd),
            ),
            override_force=_get(p, "override_force", float, base_p.override_force),
            servo_bandwidth=_get(p, "servo_bandwidth", float, base_p.servo_bandwidth),
        )

    pw = sec("powertrain")
    if pw is not None:
        _check_keys(pw, "powertrain", {"a_max", "d_max", "engine_brake", "drag", "deadband"})
        bp = cfg.powertrain
        top["powertrain"] = PowertrainParams(
            a_max=_get(pw, "a_max", float, bp.a_max),
            d_max=_get(pw, "d_max", float, bp.d_max),
            engine_brake=_get(pw, "engine_brake", float, bp.engine_brake),
            drag=_get(pw, "drag", float, bp.drag),
            deadband=_get(pw, "deadband", float, bp.deadband),
        )

    h = sec("human")
    if h is not None:
        _check_keys(h, "human", {
            "reaction_delay", "supervisory_delay", "limb_stiffness", "ou_sigma", "ou_theta",
            "cue_yield", "panic_ttc", "accel_min", "accel_max", "gap_alarm", "closing_alarm",
            "intervene_force", "headway", "min_gap", "max_accel", "comfort_decel",
            "desired_speed",
        })
        bh = cfg.human
        cf = bh.car_following
        top["human"] = HumanParams(
            reaction_delay=_get(h, "reaction_delay", float, bh.reaction_delay),
            supervisory_delay=_get(h, "supervisory_delay", float, bh.supervisory_delay),
            limb_stiffness=_get(h, "limb_stiffness", float, bh.limb_stiffness),
            ou_sigma=_get(h, "ou_sigma", float, bh.ou_sigma),
            ou_theta=_get(h, "ou_theta", float, bh.ou_theta),
            cue_yield=_get(h, "cue_yield", float, bh.cue_yield),
            panic_ttc=_get(h, "panic_ttc", float, bh.panic_ttc),
            car_following=IidmAccParams(
                v0=_get(h, "desired_speed", float, cf.v0),
                T=_get(h, "headway", float, cf.T),
                s0=_get(h, "min_gap", float, cf.s0),
                a=_get(h, "max_accel", float, cf.a),
                b=_get(h, "comfort_decel", float, cf.b),
                delta=cf.delta,
                coolness=cf.coolness,
            ),
            accel_min=_get(h, "accel_min", float, bh.accel_min),
            accel_max=_get(h, "accel_max", float, bh.accel_max),
            gap_alarm=_get(h, "gap_alarm", float, bh.gap_alarm),
            closing_alarm=_get(h, "closing_alarm", float, bh.closing_alarm),
            intervene_force=_get(h, "intervene_force", float, bh.intervene_force),
        )

    return replace(cfg, **top)


def _check_keys(section, name: str, allowed: set[str]) -> None:
    unknown = set(section.keys()) - allowed
    if unknown:
        raise ValueError(f"unknown keys in [{name}]: {sorted(unknown)}")
