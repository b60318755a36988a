"""Real-time session service: one interactive simulation per connection.

The protocol core (:class:`SessionDriver`) is transport-free so it can be
driven directly in tests; a thin websocket adapter owns one driver per
connection, forwards client messages to it and runs the wall-clock tick loop.
Messages are JSON, one per websocket frame, schema version 1:

    client -> server: {"v":1,"type":"start","condition":...,"seed":...}
                      {"v":1,"type":"input","accel_force":...,"brake_force":...}
                      {"v":1,"type":"stop"}
    server -> client: {"v":1,"type":"state","t":...,"vehicles":[...],"ego":{...}}
                      {"v":1,"type":"event","kind":...,"time":...}
                      {"v":1,"type":"end","metrics":{...}}
                      {"v":1,"type":"error","reason":...}

The ego block carries gap, v, vcmd, S_acc, S_brake, K_hc and S_target.
``input`` values are forces in newtons by default; with ``"mode":
"deflection"`` they are desired deflections in [0, 1], converted through the
neuromuscular coupling so haptic stiffness still shapes the realized pedal
position. A ``start`` may optionally override ``duration`` and
``failure_time`` for short demo sessions.
"""

from __future__ import annotations

import asyncio
import json
import logging
import math
import time
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional

from .config import ScenarioConfig
from .log import SessionLog
from .metrics import session_metrics
from .pedals import Condition
from .scenario import HeldInput, SessionEngine

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = 1

#: Fixed sub-step cap per tick; wall time beyond it is dropped.
MAX_SUBSTEPS_PER_TICK = 5

#: Heartbeat interval and timeout for the websocket transport, seconds.
HEARTBEAT_S = 10.0


def _error(reason: str) -> dict:
    return {"v": PROTOCOL_VERSION, "type": "error", "reason": reason}


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


class SessionDriver:
    """Protocol state machine: idle -> running -> ended.

    ``handle`` processes one client message and returns the replies;
    ``tick`` advances the simulation by elapsed wall time in fixed dt
    sub-steps and returns the messages to broadcast. Out-of-order or
    malformed messages produce an error reply and leave the state unchanged.
    """

    def __init__(self, base_config: ScenarioConfig | None = None):
        self.base_config = base_config if base_config is not None else ScenarioConfig()
        self.state = "idle"
        self.engine: Optional[SessionEngine] = None
        self.input: Optional[HeldInput] = None
        self._accumulator = 0.0
        self._log: Optional[SessionLog] = None

    @property
    def result_log(self) -> Optional[SessionLog]:
        return self._log

    def handle(self, msg: Any) -> list[dict]:
        if not isinstance(msg, dict) or "type" not in msg:
            return [_error("malformed message")]
        kind = msg.get("type")
        if kind == "start":
            return self._on_start(msg)
        if kind == "input":
            return self._on_input(msg)
        if kind == "stop":
            return self._on_stop()
        return [_error(f"unknown message type: {kind!r}")]

    def _on_start(self, msg: dict) -> list[dict]:
        if self.state != "idle":
            return [_error("session already started")]
        try:
            condition = Condition(msg["condition"])
            seed = int(msg["seed"])
            overrides: dict[str, Any] = {"condition": condition, "seed": seed}
            if "duration" in msg:
                duration = float(msg["duration"])
                overrides["duration"] = duration
                overrides["failure_time"] = duration
                if self.base_config.transient >= duration:
                    overrides["transient"] = duration / 2.0
            if "failure_time" in msg:
                overrides["failure_time"] = float(msg["failure_time"])
            config = replace(self.base_config, **overrides)
        except (KeyError, ValueError, TypeError) as exc:
            return [_error(f"bad start message: {exc}")]
        held = HeldInput(config.human.limb_stiffness, config.pedals.travel)
        self.engine = SessionEngine(config, ego_input=held)
        self.input = held
        self.state = "running"
        self._accumulator = 0.0
        return [self._state_message()]

    def _on_input(self, msg: dict) -> list[dict]:
        if self.state != "running":
            return [_error("no running session")]
        try:
            assert self.input is not None
            self.input.set(
                float(msg.get("accel_force", 0.0)),
                float(msg.get("brake_force", 0.0)),
                mode=str(msg.get("mode", "force")),
            )
        except (ValueError, TypeError) as exc:
            return [_error(f"bad input message: {exc}")]
        return []

    def _on_stop(self) -> list[dict]:
        if self.state != "running":
            return [_error("no running session")]
        assert self.engine is not None
        self.engine.stop()
        return self._end_messages()

    def tick(self, wall_dt: float) -> list[dict]:
        """Advance by elapsed wall time; returns state/event/end messages."""
        if self.state != "running":
            return []
        assert self.engine is not None
        if wall_dt < 0.0:
            wall_dt = 0.0
        self._accumulator += wall_dt
        dt = self.engine.dt
        # tiny epsilon absorbs float residue from the accumulator arithmetic
        steps = int((self._accumulator + 1e-12) / dt)
        if steps > MAX_SUBSTEPS_PER_TICK:
            dropped = (steps - MAX_SUBSTEPS_PER_TICK) * dt
            logger.warning("tick lagging: dropping %.3f s of wall time", dropped)
            self._accumulator -= dropped
            steps = MAX_SUBSTEPS_PER_TICK
        self._accumulator -= steps * dt
        out: list[dict] = []
        for _ in range(steps):
            for event in self.engine.step():
                out.append({
                    "v": PROTOCOL_VERSION, "type": "event",
                    "kind": event["kind"], "time": event["time"],
                })
            if self.engine.done:
                out.extend(self._end_messages())
                return out
        out.append(self._state_message())
        return out

    def _state_message(self) -> dict:
        assert self.engine is not None
        ego = {k: _jsonable(v) for k, v in self.engine.ego_snapshot().items()}
        return {
            "v": PROTOCOL_VERSION,
            "type": "state",
            "t": self.engine.time,
            "vehicles": self.engine.vehicles_snapshot(),
            "ego": ego,
        }

    def _end_messages(self) -> list[dict]:
        assert self.engine is not None
        self._log = self.engine.result()
        self.state = "ended"
        metrics = {k: _jsonable(v) for k, v in session_metrics(self._log).to_dict().items()}
        return [{"v": PROTOCOL_VERSION, "type": "end", "metrics": metrics}]


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


def _static_responder(ui_dir: str | Path):
    from websockets.datastructures import Headers
    from websockets.http11 import Response

    root = Path(ui_dir).resolve()

    def respond(connection, request):
        # Websocket handshakes pass through; plain HTTP GETs serve the UI.
        if "Upgrade" in request.headers.get("Connection", "") or request.headers.get("Upgrade"):
            return None
        path = request.path.split("?", 1)[0]
        if path.endswith("/"):
            path += "index.html"
        target = (root / path.lstrip("/")).resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            return Response(404, "Not Found", Headers([("Content-Type", "text/plain")]), b"not found")
        body = target.read_bytes()
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        return Response(
            200, "OK",
            Headers([("Content-Type", ctype), ("Content-Length", str(len(body)))]),
            body,
        )

    return respond


async def _connection_handler(websocket, base_config: ScenarioConfig, tick_hz: float) -> None:
    driver = SessionDriver(base_config)
    lock = asyncio.Lock()

    async def send_all(messages: list[dict]) -> None:
        for msg in messages:
            await websocket.send(json.dumps(msg))

    async def ticker() -> None:
        last = time.monotonic()
        while True:
            await asyncio.sleep(1.0 / tick_hz)
            now = time.monotonic()
            async with lock:
                msgs = driver.tick(now - last)
            last = now
            await send_all(msgs)

    tick_task = asyncio.create_task(ticker())
    try:
        async for raw in websocket:
            try:
                msg = json.loads(raw)
            except json.JSONDecodeError:
                await send_all([_error("invalid JSON")])
                continue
            async with lock:
                replies = driver.handle(msg)
            await send_all(replies)
    finally:
        tick_task.cancel()


async def serve_forever(
    host: str,
    port: int,
    base_config: ScenarioConfig | None = None,
    ui_dir: str | Path | None = None,
    tick_hz: float = 60.0,
) -> None:
    """Run the websocket service until cancelled."""
    from websockets.asyncio.server import serve

    base = base_config if base_config is not None else ScenarioConfig()

    async def handler(websocket):
        await _connection_handler(websocket, base, tick_hz)

    process_request = _static_responder(ui_dir) if ui_dir else None
    async with serve(
        handler, host, port,
        process_request=process_request,
        ping_interval=HEARTBEAT_S,
        ping_timeout=HEARTBEAT_S,
    ):
        await asyncio.Future()
