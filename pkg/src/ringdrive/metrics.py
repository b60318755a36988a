"""Per-session metrics computed from a SessionLog.

Every function is a pure function of the log, so recomputation always yields
identical values. Windows are [start, stop) over the sample times.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .log import SessionLog

#: Analysis window: transient end to session end, seconds.
DEFAULT_WINDOW = (75.0, 480.0)

#: Brake deflection that counts as a braking instance, and the merge time.
BRAKE_THRESHOLD = 0.02
BRAKE_DEBOUNCE = 0.2

#: Standstill threshold (m/s) and the jam lifetime cap (s).
STANDSTILL_SPEED = 0.05
JAM_LIFETIME_CAP = 405.0

#: A jam counts as never dissipated when standstills still occur this close
#: to the session end (waves recur every 10-25 s, so an exact-at-the-cap
#: test would undercount jams that are plainly alive).
JAM_PERSISTED_LIFETIME = JAM_LIFETIME_CAP - 15.0


def jam_not_dissipated(lifetime: float) -> bool:
    """Discrete outcome fed to the McNemar comparisons."""
    return lifetime >= JAM_PERSISTED_LIFETIME


@dataclass(frozen=True)
class SessionMetrics:
    ego_speed_std: float
    platoon_speed_std: float
    braking_instances: int
    jam_lifetime: float
    throughput: float
    min_gap_after_failure: Optional[float]
    collision: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _window_mask(log: SessionLog, window: tuple[float, float]) -> np.ndarray:
    start, stop = window
    if start >= stop:
        raise ValueError("empty metric window")
    mask = log.window(start, stop)
    if not mask.any():
        raise ValueError(
            f"log (0..{log.time[-1] if log.n_steps else 0.0:.2f} s) does not cover "
            f"window [{start}, {stop})"
        )
    return mask


def ego_speed_std(log: SessionLog, window: tuple[float, float] = DEFAULT_WINDOW) -> float:
    """Sample standard deviation of the ego speed inside the window."""
    mask = _window_mask(log, window)
    return float(np.std(log.speeds[mask, 0], ddof=1))


def platoon_speed_std(log: SessionLog, window: tuple[float, float] = DEFAULT_WINDOW) -> float:
    """Mean over vehicles of each vehicle's speed standard deviation."""
    mask = _window_mask(log, window)
    return float(np.mean(np.std(log.speeds[mask, :], axis=0, ddof=1)))


def braking_instances(
    log: SessionLog,
    threshold: float = BRAKE_THRESHOLD,
    debounce: float = BRAKE_DEBOUNCE,
) -> int:
    """Rising edges of ego brake depression, debounced.

    An edge within ``debounce`` seconds of the previously counted edge merges
    into it (pumping the pedal counts once).
    """
    pressed = log.brake_position >= threshold
    if pressed.shape[0] == 0:
        return 0
    edges = np.flatnonzero(pressed[1:] & ~pressed[:-1]) + 1
    if pressed[0]:
        edges = np.concatenate(([0], edges))
    count = 0
    last_counted = -np.inf
    for idx in edges:
        t = log.time[idx]
        if t - last_counted >= debounce:
            count += 1
            last_counted = t
    return count


def jam_lifetime(
    log: SessionLog,
    transient: float = 75.0,
    session_end: float = 480.0,
    standstill: float = STANDSTILL_SPEED,
    cap: float = JAM_LIFETIME_CAP,
) -> float:
    """Seconds from the fixed jam start until no vehicle stands still anymore.

    The jam start is pinned to the transient end; the jam is dissolved at the
    end of the last standstill before ``session_end``. No standstill at all
    gives 0; a standstill surviving to the session end gives the cap. A run
    that ended early (collision) cannot demonstrate dissolution, so it also
    reports the cap.
    """
    mask = log.window(transient, session_end)
    if not mask.any():
        return cap
    t_w = log.time[mask]
    if t_w[-1] < session_end - 1.5 * log.dt:
        return cap
    still = log.speeds[mask].min(axis=1) <= standstill
    idx = np.flatnonzero(still)
    if idx.size == 0:
        return 0.0
    t_end = float(t_w[idx[-1]]) + log.dt
    return min(t_end - transient, cap)


def throughput(log: SessionLog, horizon: float = 480.0) -> float:
    """Vehicles crossing the ring origin per minute over the horizon.

    A crossing is a wrap of the front bumper position (it only decreases when
    passing the origin, since nothing reverses).
    """
    mask = log.window(0.0, horizon + log.dt / 2)
    pos = log.positions[mask]
    if pos.shape[0] < 2:
        return 0.0
    crossings = int((pos[1:] < pos[:-1]).sum())
    return crossings / (horizon / 60.0)


def min_gap_after_failure(log: SessionLog, window: float = 15.0) -> float:
    """Minimum ego gap within ``window`` seconds after the failure; 0 if the
    run ended in a collision inside that window."""
    failure = log.first_event("failure")
    if failure is None:
        raise ValueError("log has no failure event")
    t0 = failure["time"]
    collision = log.first_event("collision")
    if collision is not None and t0 <= collision["time"] <= t0 + window:
        return 0.0
    mask = log.window(t0, t0 + window + log.dt / 2)
    if not mask.any():
        raise ValueError("log does not cover the failure window")
    return max(0.0, float(log.ego_gap[mask].min()))


def session_metrics(log: SessionLog) -> SessionMetrics:
    """Standard metric row for one session.

    Speed-variation metrics use the overlap of the standard window with the
    actual log (a collision may have ended the run early); the full-window
    contract is enforced by the individual functions when called directly.
    """
    end = float(log.time[-1]) + log.dt if log.n_steps else 0.0
    window = (DEFAULT_WINDOW[0], min(DEFAULT_WINDOW[1], end))
    covered = log.n_steps > 0 and window[1] > window[0]
    collision = log.first_event("collision") is not None
    failure = log.first_event("failure") is not None
    return SessionMetrics(
        ego_speed_std=ego_speed_std(log, window) if covered else float("nan"),
        platoon_speed_std=platoon_speed_std(log, window) if covered else float("nan"),
        braking_instances=braking_instances(log),
        jam_lifetime=jam_lifetime(log),
        throughput=throughput(log),
        min_gap_after_failure=min_gap_after_failure(log) if failure else None,
        collision=collision,
    )
