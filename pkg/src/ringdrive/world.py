"""Single-lane circular road: geometry, vehicle kinematics, collisions.

Positions are arc lengths measured along the lane in the driving direction,
wrapped to [0, circumference). Each vehicle's coordinate is its front bumper,
so the bumper-to-bumper gap to the leader is
(leader_front - leader_length - own_front) modulo circumference.

The cyclic order of vehicles is fixed when a world is built and never changes
during a run; a run that would change it has already ended in a collision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class RingRoad:
    """Closed single-lane loop of the given radius (meters)."""

    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def circumference(self) -> float:
        return 2.0 * math.pi * self.radius


@dataclass(frozen=True)
class VehicleState:
    """Point-mass vehicle; front bumper arc position in [0, circumference)."""

    front_position: float
    speed: float
    length: float
    id: int
    is_ego: bool = False

    def __post_init__(self) -> None:
        if self.speed < 0.0:
            raise ValueError("speed must be non-negative")
        if self.length <= 0.0:
            raise ValueError("length must be positive")


@dataclass(frozen=True)
class CollisionEvent:
    """Bumper contact between a follower and its leader (gap <= 0)."""

    follower_id: int
    leader_id: int
    gap: float
    time: float


@dataclass(frozen=True)
class WorldConfig:
    radius: float = 42.0
    n_vehicles: int = 21
    vehicle_length: float = 4.0
    jam_gap: float = 1.5
    accel_bound: float = 8.0

    def __post_init__(self) -> None:
        if self.n_vehicles < 2:
            raise ValueError("need at least two vehicles on the ring")
        if self.vehicle_length <= 0.0 or self.jam_gap < 0.0:
            raise ValueError("vehicle_length must be > 0 and jam_gap >= 0")
        if self.accel_bound <= 0.0:
            raise ValueError("accel_bound must be positive")


class WorldState:
    """All vehicles on the ring at one instant.

    Array-backed for speed: ``positions``, ``speeds``, ``lengths`` are float64
    arrays indexed by vehicle id (ego is id 0 in simulation scenarios).
    ``leader[i]`` is the index of the vehicle immediately ahead of ``i``,
    derived from arc positions at construction and constant afterwards.
    Treat instances as values: ``advance_world`` returns a new state.
    """

    __slots__ = ("road", "time", "positions", "speeds", "lengths", "is_ego", "leader")

    def __init__(self, road: RingRoad, vehicles: Sequence[VehicleState], time: float = 0.0):
        c = road.circumference
        self.road = road
        self.time = float(time)
        self.positions = np.array([v.front_position % c for v in vehicles], dtype=np.float64)
        self.speeds = np.array([v.speed for v in vehicles], dtype=np.float64)
        self.lengths = np.array([v.length for v in vehicles], dtype=np.float64)
        self.is_ego = np.array([v.is_ego for v in vehicles], dtype=bool)
        self.leader = _leader_indices(self.positions)

    @classmethod
    def _from_arrays(cls, road, time, positions, speeds, lengths, is_ego, leader) -> "WorldState":
        w = cls.__new__(cls)
        w.road = road
        w.time = time
        w.positions = positions
        w.speeds = speeds
        w.lengths = lengths
        w.is_ego = is_ego
        w.leader = leader
        return w

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def vehicles(self) -> tuple[VehicleState, ...]:
        return tuple(
            VehicleState(
                front_position=float(self.positions[i]),
                speed=float(self.speeds[i]),
                length=float(self.lengths[i]),
                id=i,
                is_ego=bool(self.is_ego[i]),
            )
            for i in range(self.n)
        )

    def gaps(self) -> np.ndarray:
        """Bumper-to-bumper gap from every vehicle to its leader.

        A value can only exceed the total free arc length if the follower
        overran its leader during the last step; such wrapped values are
        mapped back to the (negative) overlap so collisions stay visible.
        """
        c = self.road.circumference
        lead = self.leader
        raw = (self.positions[lead] - self.lengths[lead] - self.positions) % c
        free = c - float(self.lengths.sum())
        return np.where(raw <= free + 1e-9, raw, raw - c)

    def conservation_error(self) -> float:
        """Sum of gaps plus sum of lengths minus circumference (should be ~0)."""
        return float(self.gaps().sum() + self.lengths.sum() - self.road.circumference)


def _leader_indices(positions: np.ndarray) -> np.ndarray:
    order = np.argsort(positions, kind="stable")
    leader = np.empty_like(order)
    leader[order] = np.roll(order, -1)
    return leader


def init_scenario(config: WorldConfig) -> WorldState:
    """Build the concentrated initial jam: all cars stopped behind the ego.

    The ego front sits at arc position 0; traffic car k (1..n-1) is parked
    k*(length + jam_gap) behind it, leaving one long open arc ahead of the
    ego so it drives into the tail of its own queue.
    """
    road = RingRoad(config.radius)
    c = road.circumference
    n = config.n_vehicles
    length = config.vehicle_length
    occupied = n * length + (n - 1) * config.jam_gap
    if occupied >= c:
        raise ValueError(
            f"{n} vehicles of {length} m with {config.jam_gap} m jam gaps "
            f"need {occupied:.3f} m but the ring is only {c:.3f} m"
        )
    pitch = length + config.jam_gap
    vehicles = [VehicleState(front_position=0.0, speed=0.0, length=length, id=0, is_ego=True)]
    vehicles += [
        VehicleState(front_position=(-k * pitch) % c, speed=0.0, length=length, id=k)
        for k in range(1, n)
    ]
    return WorldState(road, vehicles, time=0.0)


def gap_to_leader(world: WorldState, i: int) -> float:
    """Bumper-to-bumper gap from vehicle ``i`` to its leader, in meters."""
    return float(world.gaps()[i])


def advance_world(
    world: WorldState,
    accelerations: np.ndarray,
    dt: float,
    accel_bound: float = 8.0,
) -> WorldState:
    """One fixed integration step; returns the new world state.

    Speeds update semi-implicitly and clamp at zero (no reversing);
    positions advance by the step-average speed, which reproduces constant
    acceleration trajectories exactly instead of carrying the O(a*T*dt)
    bias of a plain rectangle-rule drift.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    a = np.asarray(accelerations, dtype=np.float64)
    a = np.minimum(np.maximum(a, -accel_bound), accel_bound)
    v_old = world.speeds
    v_new = np.maximum(0.0, v_old + a * dt)
    pos = (world.positions + 0.5 * (v_old + v_new) * dt) % world.road.circumference
    return WorldState._from_arrays(
        world.road, world.time + dt, pos, v_new, world.lengths, world.is_ego, world.leader
    )


def detect_collision(world: WorldState) -> Optional[CollisionEvent]:
    """Return the deepest bumper contact (gap <= 0) if any, else None."""
    gaps = world.gaps()
    i = int(np.argmin(gaps))
    g = float(gaps[i])
    if g <= 0.0:
        return CollisionEvent(
            follower_id=i, leader_id=int(world.leader[i]), gap=g, time=world.time
        )
    return None
