"""FollowerStopper target-speed law.

The controller caps the commanded speed by gap-dependent safety envelopes:
three nested gap thresholds split the state into a stopping region, two
interpolation bands and a free region at the road speed limit. Closing in on
the leader inflates all three thresholds quadratically, so the command backs
off earlier the faster the gap shrinks.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FollowerStopperParams:
    """Base gaps (m), per-band decel constants (m/s^2) and road max speed."""

    gap0: tuple[float, float, float] = (4.5, 5.25, 6.0)
    decel: tuple[float, float, float] = (1.5, 1.0, 0.5)
    u_max: float = 7.0

    def __post_init__(self) -> None:
        if not (0.0 < self.gap0[0] < self.gap0[1] < self.gap0[2]):
            raise ValueError("base gaps must be positive and strictly increasing")
        if not (self.decel[0] > self.decel[1] > self.decel[2] > 0.0):
            raise ValueError("decel constants must be positive and strictly decreasing")
        if self.u_max <= 0.0:
            raise ValueError("u_max must be positive")


def gap_thresholds(
    closing_speed: float, p: FollowerStopperParams
) -> tuple[float, float, float]:
    """Inflated gap thresholds for a given closing speed (<= 0, m/s).

    ``closing_speed`` is the negative part of (v_lead - v_ego): zero while
    opening, negative while closing in. Each threshold grows by the stopping
    distance at its band's deceleration constant, so the triple stays
    strictly increasing for every input.
    """
    if closing_speed > 0.0:
        raise ValueError("closing_speed is a negative part, must be <= 0")
    q = 0.5 * closing_speed * closing_speed
    return (
        p.gap0[0] + q / p.decel[0],
        p.gap0[1] + q / p.decel[1],
        p.gap0[2] + q / p.decel[2],
    )


def command_speed(gap: float, v: float, v_lead: float, p: FollowerStopperParams) -> float:
    """Commanded speed (m/s) from gap, own speed and leader speed.

    Zero below the first threshold, a linear ramp of the current speed up to
    the second, a ramp from current speed to the road maximum up to the
    third, and the road maximum beyond. Continuous in the gap at all knots.
    """
    dv = v_lead - v
    x1, x2, x3 = gap_thresholds(dv if dv < 0.0 else 0.0, p)
    if gap <= x1:
        return 0.0
    if gap <= x2:
        return v * (gap - x1) / (x2 - x1)
    if gap <= x3:
        return v + (p.u_max - v) * (gap - x2) / (x3 - x2)
    return p.u_max
