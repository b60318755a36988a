"""Longitudinal driver model for the simulated traffic cars.

Improved-IDM car following blended with the constant-acceleration heuristic
(the ACC variant commonly used to keep following behaviour smooth under
transient deficits). Every function broadcasts over numpy arrays so a whole
platoon is evaluated in one call; per-vehicle parameter arrays are allowed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Hard physical deceleration floor applied to the blended output, m/s^2.
HARD_DECEL = 8.0


@dataclass(frozen=True)
class IidmAccParams:
    """Improved-IDM / ACC parameters; fields may be scalars or per-car arrays.

    v0: desired speed (m/s), T: time headway (s), s0: minimum gap (m),
    a: maximum acceleration (m/s^2), b: comfortable deceleration (m/s^2),
    delta: acceleration exponent, coolness: CAH blend factor in [0, 1].
    """

    v0: float | np.ndarray = 7.0
    T: float | np.ndarray = 1.68
    s0: float | np.ndarray = 2.0
    a: float | np.ndarray = 1.0
    b: float | np.ndarray = 1.5
    delta: float | np.ndarray = 4.0
    coolness: float | np.ndarray = 0.99

    def __post_init__(self) -> None:
        for name in ("v0", "T", "s0", "a", "b"):
            if np.any(np.asarray(getattr(self, name)) <= 0.0):
                raise ValueError(f"{name} must be positive")
        if np.any(np.asarray(self.delta) < 1.0):
            raise ValueError("delta must be >= 1")
        c = np.asarray(self.coolness)
        if np.any(c < 0.0) or np.any(c > 1.0):
            raise ValueError("coolness must lie in [0, 1]")


def iidm_accel(v, gap, v_lead, p: IidmAccParams):
    """Improved-IDM acceleration (m/s^2) for speed v, gap and leader speed.

    Unlike the classic IDM, the improved variant keeps the equilibrium gap at
    exactly s0 + v*T and removes the free-flow/interaction cross talk, so a
    platoon spaced at equilibrium holds its speed.
    """
    v = np.asarray(v, dtype=np.float64)
    gap = np.asarray(gap, dtype=np.float64)
    v_lead = np.asarray(v_lead, dtype=np.float64)
    if (gap <= 0.0).any():
        raise ValueError("gap must be positive (collisions end the run first)")

    dv = v - v_lead
    s_star = p.s0 + np.maximum(0.0, v * p.T + v * dv / (2.0 * np.sqrt(p.a * p.b)))
    z = s_star / gap

    over = v > p.v0
    ratio = v / p.v0
    a_free = p.a * (1.0 - ratio**p.delta)
    if over.any():
        inv = 1.0 / np.maximum(ratio, 1.0)
        a_free = np.where(over, -p.b * (1.0 - inv ** (p.a * p.delta / p.b)), a_free)

    # z >= 1: braking interaction; z < 1: relaxation toward the free term.
    # z**(2a/a_free) is written exp((2a/a_free)*log z); the exponent argument
    # is clipped at 0 because the relax branch is only selected for z < 1,
    # and the a_free -> 0 limit comes out as exactly 0 there.
    crit = p.a * (1.0 - z * z)
    safe_free = np.where(a_free == 0.0, 1.0, a_free)
    expo = np.minimum((2.0 * p.a / safe_free) * np.log(z), 0.0)
    relax = a_free * (1.0 - np.exp(expo))

    hi = np.where(over, a_free + crit, crit)
    lo = np.where(over, a_free, relax)
    out = np.where(z >= 1.0, hi, lo)
    return out if out.ndim else float(out)


def iidm_accel_scalar(
    v: float, gap: float, v_lead: float,
    v0: float, T: float, s0: float, a: float, b: float, delta: float,
) -> float:
    """Scalar fast path of :func:`iidm_accel` for per-step single-car use.

    Kept numerically identical to the array version (tested against it);
    exists because the human intent model evaluates it every 10 ms step.
    """
    if gap <= 0.0:
        raise ValueError("gap must be positive (collisions end the run first)")
    dv = v - v_lead
    s_star = s0 + max(0.0, v * T + v * dv / (2.0 * math.sqrt(a * b)))
    z = s_star / gap
    if v > v0:
        a_free = -b * (1.0 - (v0 / v) ** (a * delta / b))
        if z >= 1.0:
            return a_free + a * (1.0 - z * z)
        return a_free
    a_free = a * (1.0 - (v / v0) ** delta)
    if z >= 1.0:
        return a * (1.0 - z * z)
    if a_free == 0.0:
        return 0.0
    return a_free * (1.0 - math.exp(min((2.0 * a / a_free) * math.log(z), 0.0)))


def cah_accel(v, v_lead, gap, a_lead, a_cap):
    """Constant-acceleration-heuristic acceleration (m/s^2).

    Assumes the leader keeps min(a_lead, a_cap) indefinitely and asks what
    constant own acceleration avoids contact; optimistic, so it is only used
    to temper the IDM braking overshoot, never on its own.
    """
    v = np.asarray(v, dtype=np.float64)
    v_lead = np.asarray(v_lead, dtype=np.float64)
    gap = np.asarray(gap, dtype=np.float64)
    a_tilde = np.minimum(np.asarray(a_lead, dtype=np.float64), a_cap)
    dv = v - v_lead
    denom = v_lead * v_lead - 2.0 * gap * a_tilde
    # denom can only vanish where the stopping branch resolves to 0 anyway
    # (v*v_lead = 0); substitute 1 to keep the division clean.
    safe = np.where(denom == 0.0, 1.0, denom)
    stopping = v * v * a_tilde / safe
    approaching = a_tilde - np.where(dv > 0.0, dv * dv, 0.0) / (2.0 * gap)
    out = np.where(v_lead * dv <= -2.0 * gap * a_tilde, stopping, approaching)
    return out if out.ndim else float(out)


def cah_blend(a_iidm, v, v_lead, gap, a_lead, p: IidmAccParams):
    """ACC output: keep the IDM value unless it brakes much harder than the
    constant-acceleration heuristic deems necessary, then pull it back with
    the coolness-weighted tanh mix. Clamped to [-HARD_DECEL, a].
    """
    a_iidm = np.asarray(a_iidm, dtype=np.float64)
    acah = cah_accel(v, v_lead, gap, a_lead, p.a)
    mixed = (1.0 - p.coolness) * a_iidm + p.coolness * (
        acah + p.b * np.tanh((a_iidm - acah) / p.b)
    )
    out = np.where(a_iidm >= acah, a_iidm, mixed)
    out = np.minimum(np.maximum(out, -HARD_DECEL), p.a)
    return out if out.ndim else float(out)


def equilibrium_gap(speed, p: IidmAccParams):
    """Gap at which the improved IDM holds the given speed (s0 + v*T)."""
    return p.s0 + np.asarray(speed, dtype=np.float64) * p.T
