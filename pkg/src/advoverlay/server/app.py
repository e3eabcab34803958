"""WebSocket attack service.

One /attack endpoint. Connections join a session via ?session=<id>; the
role and adv-frame subscription ride the query string too (the message
envelope itself never changes shape). Messages within a session are handled
in arrival order by a per-session worker; if frames arrive faster than they
can be processed the newest frame replaces the queued one and the displaced
frame is answered with a frame_dropped error.
"""

from __future__ import annotations

import asyncio
import time
from collections import deque
from pathlib import Path

import anyio.to_thread
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from ..attack.config import AttackConfig
from ..detector.decode import DEFAULT_CONF_THRESHOLD, DEFAULT_IOU_THRESHOLD
from .protocol import MalformedMessage, canonical_json, parse_client_message
from .session import DEFAULT_ITERS_PER_FRAME, DEFAULT_MAX_FRAME_BYTES, SessionCore


class _Connection:
    def __init__(self, ws: WebSocket, role: str, wants_adv: bool):
        self.ws = ws
        self.role = role
        self.wants_adv = wants_adv
        self.last_seq = 0


class _Session:
    """Connection bookkeeping and the serialized message queue for one session."""

    def __init__(self, core: SessionCore):
        self.core = core
        self.connections: list[_Connection] = []
        self.writer: _Connection | None = None  # mask/config authority, first-come
        self.queue: deque = deque()
        self.wakeup = asyncio.Event()
        self.worker: asyncio.Task | None = None
        self.closed = False

    def start(self):
        self.worker = asyncio.create_task(self._run())

    async def send(self, conn: _Connection, message: dict):
        try:
            await conn.ws.send_text(canonical_json(message))
        except Exception:
            pass  # connection already gone; cleanup happens in its handler

    async def emit(self, sender: _Connection, results):
        for audience, message in results:
            if audience == "sender":
                await self.send(sender, message)
            elif audience == "adv":
                for c in list(self.connections):
                    if c.wants_adv:
                        await self.send(c, message)
            else:
                for c in list(self.connections):
                    await self.send(c, message)

    def enqueue(self, conn: _Connection, msg: dict) -> dict | None:
        """Queue a message; returns a drop notice if a stale frame was replaced."""
        dropped = None
        if msg["type"] == "frame":
            for item in self.queue:
                if item[1]["type"] == "frame":
                    dropped = self.core.frame_dropped(item[1]["sequence"])
                    item[0], item[1] = conn, msg
                    break
            else:
                self.queue.append([conn, msg])
        else:
            self.queue.append([conn, msg])
        self.wakeup.set()
        return dropped

    async def _run(self):
        while not self.closed:
            await self.wakeup.wait()
            self.wakeup.clear()
            while self.queue:
                conn, msg = self.queue.popleft()
                seq = msg["sequence"]
                payload = msg["payload"]
                if msg["type"] == "frame":
                    results = await anyio.to_thread.run_sync(
                        self.core.process_frame, payload, seq
                    )
                elif msg["type"] == "mask_update":
                    results = self.core.process_mask_update(payload, seq)
                else:
                    results = self.core.process_config_update(payload, seq)
                await self.emit(conn, results)

    async def close(self):
        self.closed = True
        if self.worker:
            self.worker.cancel()
        for c in list(self.connections):
            try:
                await c.ws.close(code=1008)
            except Exception:
                pass
        self.connections.clear()


def create_app(detector, default_config: AttackConfig | None = None,
               iters_per_frame: int = DEFAULT_ITERS_PER_FRAME,
               clock=time.perf_counter,
               conf_threshold: float = DEFAULT_CONF_THRESHOLD,
               iou_threshold: float = DEFAULT_IOU_THRESHOLD,
               max_frame_bytes: int = DEFAULT_MAX_FRAME_BYTES,
               static_dir: str | Path | None = None) -> FastAPI:
    """Build the service. The detector's immutable weights are shared by all sessions."""
    app = FastAPI(title="advoverlay attack server")
    sessions: dict[str, _Session] = {}
    app.state.sessions = sessions

    def get_session(session_id: str) -> _Session:
        sess = sessions.get(session_id)
        if sess is None or sess.closed:
            core = SessionCore(
                session_id, detector,
                config=default_config or AttackConfig(),
                iters_per_frame=iters_per_frame,
                clock=clock,
                conf_threshold=conf_threshold,
                iou_threshold=iou_threshold,
                max_frame_bytes=max_frame_bytes,
            )
            sess = _Session(core)
            sess.start()
            sessions[session_id] = sess
        return sess

    async def terminate(session_id: str):
        sess = sessions.pop(session_id, None)
        if sess is not None:
            await sess.close()

    @app.websocket("/attack")
    async def attack_endpoint(ws: WebSocket):
        await ws.accept()
        params = ws.query_params
        session_id = params.get("session", "default")
        role = params.get("role", "source")
        wants_adv = params.get("adv", "0") == "1"
        sess = get_session(session_id)
        conn = _Connection(ws, role, wants_adv)
        sess.connections.append(conn)
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = parse_client_message(text)
                    if msg["session_id"] != session_id:
                        raise MalformedMessage(
                            f"session_id {msg['session_id']!r} does not match "
                            f"connection session {session_id!r}"
                        )
                    if msg["sequence"] <= conn.last_seq:
                        raise MalformedMessage(
                            f"sequence {msg['sequence']} is not greater than "
                            f"{conn.last_seq}"
                        )
                except MalformedMessage as exc:
                    await sess.send(conn, sess.core._error("malformed", str(exc)))
                    await terminate(session_id)
                    return
                conn.last_seq = msg["sequence"]

                if msg["type"] in ("mask_update", "config_update"):
                    if sess.writer is None:
                        sess.writer = conn
                    elif sess.writer is not conn:
                        await sess.send(conn, sess.core._error(
                            "not_authorized",
                            "another connection holds mask-write authority",
                        ))
                        continue
                dropped = sess.enqueue(conn, msg)
                if dropped is not None:
                    await sess.send(conn, dropped)
        except WebSocketDisconnect:
            pass
        finally:
            if conn in sess.connections:
                sess.connections.remove(conn)
            if sess.writer is conn:
                sess.writer = None
            if not sess.connections and not sess.closed:
                await terminate(session_id)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="panel")

    return app
