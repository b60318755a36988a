"""Session logs: the full 100 Hz record of one run, plus disk round-trip.

A log is two files: ``<stem>.npz`` holding the time series (self-describing
numpy archive) and ``<stem>.json`` holding the schema version, seed, config
echo and event list. Writing is deterministic: identical runs produce
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

FORMAT_NAME = "ringdrive-session"
FORMAT_VERSION = 1

#: Names of the per-step series stored in the npz archive.
SERIES = (
    "time",
    "positions",
    "speeds",
    "ego_gap",
    "vcmd",
    "action",
    "accel_position",
    "brake_position",
    "accel_force",
    "brake_force",
    "accel_stiffness",
    "accel_target",
    "brake_target",
)


@dataclass
class SessionLog:
    """Everything recorded during one session.

    ``positions``/``speeds`` are (steps, n_vehicles); the remaining series are
    per-step scalars for the ego vehicle. Pedal positions and targets are
    normalized deflections in [0, 1]; forces are newtons, stiffness N/rad.
    ``events`` is an ordered list of dicts with at least ``kind`` and ``time``.
    """

    config: dict[str, Any]
    seed: int
    dt: float
    time: np.ndarray
    positions: np.ndarray
    speeds: np.ndarray
    ego_gap: np.ndarray
    vcmd: np.ndarray
    action: np.ndarray
    accel_position: np.ndarray
    brake_position: np.ndarray
    accel_force: np.ndarray
    brake_force: np.ndarray
    accel_stiffness: np.ndarray
    accel_target: np.ndarray
    brake_target: np.ndarray
    events: list[dict[str, Any]] = field(default_factory=list)
    end_time: float = 0.0
    anomaly_steps: int = 0

    @property
    def n_steps(self) -> int:
        return int(self.time.shape[0])

    @property
    def n_vehicles(self) -> int:
        return int(self.positions.shape[1])

    def events_of(self, kind: str) -> list[dict[str, Any]]:
        return [e for e in self.events if e["kind"] == kind]

    def first_event(self, kind: str) -> dict[str, Any] | None:
        for e in self.events:
            if e["kind"] == kind:
                return e
        return None

    def window(self, start: float, stop: float) -> np.ndarray:
        """Boolean mask of samples with start <= t < stop."""
        return (self.time >= start) & (self.time < stop)

    def save(self, stem: str | Path) -> tuple[Path, Path]:
        """Write ``<stem>.npz`` and ``<stem>.json``; returns both paths."""
        stem = Path(stem)
        stem.parent.mkdir(parents=True, exist_ok=True)
        npz_path = stem.with_suffix(".npz")
        meta_path = stem.with_suffix(".json")
        arrays = {name: getattr(self, name) for name in SERIES}
        with open(npz_path, "wb") as fh:
            np.savez(fh, **arrays)
        meta = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "seed": self.seed,
            "dt": self.dt,
            "end_time": self.end_time,
            "anomaly_steps": self.anomaly_steps,
            "events": self.events,
            "config": self.config,
        }
        meta_path.write_text(json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n")
        return npz_path, meta_path


def load_log(stem: str | Path) -> SessionLog:
    """Read a log written by :meth:`SessionLog.save`."""
    stem = Path(stem)
    meta = json.loads(stem.with_suffix(".json").read_text())
    if meta.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} log: {stem}")
    if meta.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported log version {meta.get('version')}")
    with np.load(stem.with_suffix(".npz")) as data:
        arrays = {name: data[name] for name in SERIES}
    return SessionLog(
        config=meta["config"],
        seed=meta["seed"],
        dt=meta["dt"],
        events=meta["events"],
        end_time=meta["end_time"],
        anomaly_steps=meta["anomaly_steps"],
        **arrays,
    )
