"""Interactive session host: one simulation loop, many websocket viewers.

The loop owns all mutable state.  Clients talk JSON over a websocket
(``/ws``): the server streams ``snapshot`` frames every ``decimation``
steps and accepts ``command`` frames (``set_force``, ``release``,
``pause``, ``resume``, ``reset``, ``set_config_overrides``).  Commands
land on an ordered queue and are applied at the next step boundary, so
the freshest force command wins within a step window and latency is at
most one simulation step.  Forces are clamped server-side; the snapshot
stream echoes the clamped value.

Frame-by-frame format lives in ``wire_schema.md`` at the repository
root; ``SCHEMA_VERSION`` here and the version stamped on every frame
must match that document.

The full-rate trace keeps recording server-side regardless of clients;
``GET /trace.csv`` exports it at any time.  ``GET /`` serves a summary
with the active scenario.  One session per server instance.
"""

from __future__ import annotations

import asyncio
import contextlib
import io
import json
import logging
import time

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse

from .config import (ScenarioConfig, apply_overrides, assemble,
                     config_from_dict, config_to_dict)
from .errors import AdmitSwitchError
from .sim import Simulator

log = logging.getLogger("admitswitch.live")

SCHEMA_VERSION = 1

#: outbound frames buffered per client before the oldest are dropped
CLIENT_QUEUE_LIMIT = 256

COMMAND_KINDS = ("set_force", "release", "pause", "resume", "reset",
                 "set_config_overrides")


def _bad_command(message: str) -> dict:
    return {"type": "error", "schema_version": SCHEMA_VERSION,
            "label": "bad_command", "message": message}


def parse_command(raw) -> tuple[str, object]:
    """Validate one client frame into ``(kind, payload)``.

    Raises ``ValueError`` with a human-readable reason on anything
    malformed; the caller turns that into an error frame for the sender.
    """
    if not isinstance(raw, dict):
        raise ValueError("frame must be a JSON object")
    if raw.get("type") != "command":
        raise ValueError("frame type must be 'command'")
    kind = raw.get("kind")
    if kind not in COMMAND_KINDS:
        raise ValueError(f"unknown command kind {kind!r}")
    if kind == "set_force":
        force = raw.get("force_n")
        try:
            fx, fy = force
            return kind, (float(fx), float(fy))
        except (TypeError, ValueError):
            raise ValueError("set_force needs force_n: [fx, fy]") from None
    if kind == "set_config_overrides":
        overrides = raw.get("overrides")
        if (not isinstance(overrides, list)
                or not all(isinstance(o, str) for o in overrides)):
            raise ValueError("set_config_overrides needs overrides: [str, ...]")
        return kind, list(overrides)
    return kind, None


class LiveSession:
    """Exclusive owner of one simulator plus the client registry."""

    def __init__(self, cfg: ScenarioConfig, decimation: int = 20,
                 pace: bool = True):
        if decimation < 1:
            raise ValueError("decimation must be >= 1")
        self.cfg = cfg
        self.bundle = assemble(cfg)
        self.sim = Simulator(self.bundle, audit="none")
        self.decimation = decimation
        self.pace = pace
        self.seq = 0
        self.epoch = 0
        self.paused = False
        self.terminated: str | None = None
        self._terminal_frame: dict | None = None
        self.clients: set[asyncio.Queue] = set()
        self.commands: asyncio.Queue = asyncio.Queue()
        self._wall_start = time.perf_counter()

    # -- client registry ----------------------------------------------------

    def attach(self) -> asyncio.Queue:
        queue = asyncio.Queue(maxsize=CLIENT_QUEUE_LIMIT)
        self.clients.add(queue)
        self._offer(queue, self.hello_frame())
        if self._terminal_frame is not None:
            # a late joiner must still learn the session stopped
            self._offer(queue, self._terminal_frame)
        return queue

    def detach(self, queue: asyncio.Queue):
        self.clients.discard(queue)

    @staticmethod
    def _offer(queue: asyncio.Queue, frame: dict):
        while True:
            try:
                queue.put_nowait(frame)
                return
            except asyncio.QueueFull:
                # slow client: drop its oldest pending frame
                with contextlib.suppress(asyncio.QueueEmpty):
                    queue.get_nowait()

    def _broadcast(self, frame: dict):
        for queue in self.clients:
            self._offer(queue, frame)

    # -- frames ---------------------------------------------------------------

    def hello_frame(self) -> dict:
        return {"type": "hello", "schema_version": SCHEMA_VERSION,
                "epoch": self.epoch, "decimation": self.decimation,
                "dt_s": self.cfg.dt_s, "paused": self.paused,
                "terminated": self.terminated,
                "config": config_to_dict(self.cfg),
                "snapshot": self.sim.snapshot()}

    def snapshot_frame(self) -> dict:
        self.seq += 1
        return {"type": "snapshot", "schema_version": SCHEMA_VERSION,
                "seq": self.seq, "epoch": self.epoch,
                "data": self.sim.snapshot()}

    def _event(self, kind: str):
        return {"type": "event", "schema_version": SCHEMA_VERSION,
                "kind": kind, "epoch": self.epoch, "t_s": self.sim.t}

    def _terminate(self, reason: str, message: str):
        self.terminated = reason
        log.info("session terminal: %s (%s)", reason, message)
        self._terminal_frame = {
            "type": "terminal", "schema_version": SCHEMA_VERSION,
            "reason": reason, "message": message,
            "epoch": self.epoch, "t_s": self.sim.t}
        self._broadcast(self._terminal_frame)

    # -- command handling -------------------------------------------------------

    def submit(self, origin: asyncio.Queue | None, raw):
        """Queue one raw client frame (validation errors go back to origin)."""
        try:
            kind, payload = parse_command(raw)
        except ValueError as exc:
            if origin is not None:
                self._offer(origin, _bad_command(str(exc)))
            return
        self.commands.put_nowait((origin, kind, payload))

    def _apply(self, origin: asyncio.Queue | None, kind: str, payload):
        if kind == "set_force":
            self.sim.set_force(*payload)
        elif kind == "release":
            self.sim.clear_force()
        elif kind == "pause":
            if not self.paused:
                self.paused = True
                self._broadcast(self._event("paused"))
        elif kind == "resume":
            if self.paused:
                self.paused = False
                self._wall_start = time.perf_counter() - self.sim.t
                self._broadcast(self._event("resumed"))
        elif kind == "reset":
            self.sim.reset()
            self.epoch += 1
            self.terminated = None
            self._terminal_frame = None
            self._wall_start = time.perf_counter()
            self._broadcast(self._event("reset"))
            self._broadcast(self.snapshot_frame())
        elif kind == "set_config_overrides":
            try:
                data = apply_overrides(config_to_dict(self.cfg), payload)
                cfg = config_from_dict(data)
                bundle = assemble(cfg)
            except AdmitSwitchError as exc:
                if origin is not None:
                    self._offer(origin, _bad_command(f"{exc.label}: {exc}"))
                return
            self.cfg = cfg
            self.bundle = bundle
            self.sim = Simulator(bundle, audit="none")
            self.epoch += 1
            self.terminated = None
            self._terminal_frame = None
            self._wall_start = time.perf_counter()
            self._broadcast(self._event("config_updated"))
            self._broadcast(self.snapshot_frame())

    def _drain(self):
        while True:
            try:
                origin, kind, payload = self.commands.get_nowait()
            except asyncio.QueueEmpty:
                return
            self._apply(origin, kind, payload)

    # -- simulation loop -----------------------------------------------------------

    def _idle(self) -> bool:
        return (self.paused or self.terminated is not None
                or self.sim.step_count >= self.cfg.n_steps)

    async def run(self):
        """Own the simulator until cancelled.

        Steps in chunks of ``decimation`` (one snapshot per chunk),
        draining the command queue before every single step and yielding
        to the event loop so receipt-to-application latency stays within
        one step.  When paused, finished or terminal, blocks on the
        command queue instead of spinning.
        """
        self._wall_start = time.perf_counter() - self.sim.t
        while True:
            if self._idle():
                if (self.terminated is None and not self.paused
                        and self.sim.step_count >= self.cfg.n_steps):
                    self._terminate("complete", "scenario duration reached")
                origin, kind, payload = await self.commands.get()
                self._apply(origin, kind, payload)
                continue
            steps = 0
            while steps < self.decimation and not self._idle():
                self._drain()
                if self._idle():
                    break
                try:
                    self.sim.advance(1)
                except AdmitSwitchError as exc:
                    self._terminate(exc.label, str(exc))
                    break
                steps += 1
                # let receiver tasks deliver fresh commands mid-chunk
                await asyncio.sleep(0)
            if steps:
                self._broadcast(self.snapshot_frame())
            if self.pace and steps:
                deadline = self._wall_start + self.sim.t
                delay = deadline - time.perf_counter()
                if delay > 0.0:
                    await asyncio.sleep(delay)


def create_app(cfg: ScenarioConfig, decimation: int = 20,
               pace: bool = True) -> FastAPI:
    """FastAPI app hosting exactly one live session."""
    session = LiveSession(cfg, decimation=decimation, pace=pace)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(session.run())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(lifespan=lifespan)
    app.state.session = session

    @app.get("/")
    def index():
        return {"service": "admitswitch-live",
                "schema_version": SCHEMA_VERSION,
                "endpoints": {"websocket": "/ws", "trace": "/trace.csv"},
                "decimation": session.decimation,
                "epoch": session.epoch,
                "t_s": session.sim.t,
                "config": config_to_dict(session.cfg)}

    @app.get("/trace.csv")
    def trace():
        buf = io.StringIO()
        session.sim.trace.write(buf)
        return PlainTextResponse(buf.getvalue(), media_type="text/csv")

    @app.websocket("/ws")
    async def websocket_endpoint(websocket: WebSocket):
        await websocket.accept()
        queue = session.attach()

        async def sender():
            while True:
                frame = await queue.get()
                await websocket.send_text(json.dumps(frame))

        send_task = asyncio.create_task(sender())
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    raw = json.loads(text)
                except json.JSONDecodeError as exc:
                    session._offer(queue, _bad_command(f"invalid JSON: {exc}"))
                    continue
                session.submit(queue, raw)
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await send_task
            session.detach(queue)

    return app


def serve(cfg: ScenarioConfig, host: str = "127.0.0.1", port: int = 8000):
    """Blocking entry point used by the ``serve`` CLI subcommand."""
    import uvicorn

    log.info("hosting live session on %s:%d", host, port)
    uvicorn.run(create_app(cfg), host=host, port=port, log_level="warning")
