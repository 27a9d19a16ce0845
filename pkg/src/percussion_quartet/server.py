"""Live mode: runs the simulation paced against the wall clock and serves
the control/visualization bridge plus the static browser client on one port.

The simulation loop is the single writer. Client commands land on one
merged arrival-order queue drained once per step; acks are sent exactly
once, in send order, after the step that applies the command. Snapshots
broadcast at 30 Hz; sound/light events broadcast right after the step
that emits them. Connecting clients get a snapshot immediately.
"""

from __future__ import annotations

import asyncio
import http
import mimetypes
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from websockets.asyncio.server import ServerConnection, serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Request, Response

from . import bridge
from .eventlog import KIND_LIGHT, KIND_SOUND
from .patterns import PatternLibrary
from .performance import Performance, PerformanceConfig

SNAPSHOT_HZ = 30.0
WS_PATH = "/ws"


@dataclass
class _PendingAck:
    connection: Optional[ServerConnection]
    command_id: Optional[object]


def _plain_response(status: http.HTTPStatus, body: bytes, ctype: str = "text/plain") -> Response:
    headers = Headers(
        [
            ("Content-Type", ctype),
            ("Content-Length", str(len(body))),
            ("Cache-Control", "no-cache"),
            ("Connection", "close"),
        ]
    )
    return Response(status.value, status.phrase, headers, body)


def _ack_detail(payload: dict) -> str:
    if "reason" in payload:
        return str(payload["reason"])
    rejections = payload.get("rejections")
    if rejections:
        return "; ".join(f"robot {rid}: {why}" for rid, why in sorted(rejections.items()))
    return ""


class LiveServer:
    def __init__(
        self,
        config: PerformanceConfig,
        library: Optional[PatternLibrary] = None,
        static_dir: Optional[Path] = None,
        host: str = "127.0.0.1",
        port: int = 8765,
        time_scale: float = 1.0,
    ):
        self.performance = Performance(config, library=library)
        self.static_dir = Path(static_dir).resolve() if static_dir else None
        self.host = host
        self.port = port
        self.time_scale = time_scale  # >1 runs faster than real time (tests)
        # One outbound queue per client so a slow reader never stalls the
        # simulation loop; a writer task drains each queue in order.
        self.clients: dict[ServerConnection, asyncio.Queue[str]] = {}
        self.inbox: asyncio.Queue[tuple[bridge.CommandMessage, ServerConnection]] = asyncio.Queue()
        self._pending_acks: list[_PendingAck] = []
        self._msg_seq = 0
        self._log_cursor = len(self.performance.log.records)
        self.started = asyncio.Event()
        self.finished = asyncio.Event()

    # -- message plumbing ---------------------------------------------------

    def _next_seq(self) -> int:
        seq = self._msg_seq
        self._msg_seq += 1
        return seq

    def _snapshot_message(self) -> bridge.Snapshot:
        snap = self.performance.snapshot()
        return bridge.Snapshot(
            seq=self._next_seq(),
            t=snap["t"],
            clock_phase=snap["clock_phase"],
            robots=tuple(snap["robots"]),
        )

    def _send(self, connection: ServerConnection, msg: bridge.ServerMessage) -> None:
        queue = self.clients.get(connection)
        if queue is not None:
            queue.put_nowait(bridge.encode_server(msg))

    def _broadcast(self, msg: bridge.ServerMessage) -> None:
        frame = bridge.encode_server(msg)
        for queue in self.clients.values():
            queue.put_nowait(frame)

    async def _client_writer(self, connection: ServerConnection, queue: asyncio.Queue) -> None:
        try:
            while True:
                await connection.send(await queue.get())
        except ConnectionClosed:
            self.clients.pop(connection, None)

    def _flush_log(self) -> None:
        """Broadcast new sound/light records and ack applied commands."""
        records = self.performance.log.records
        while self._log_cursor < len(records):
            record = records[self._log_cursor]
            self._log_cursor += 1
            seq = self._next_seq()
            if record["kind"] == KIND_SOUND:
                self._broadcast(bridge.SoundMessage(seq=seq, t=record["t"], event=record["payload"]))
            elif record["kind"] == KIND_LIGHT:
                self._broadcast(bridge.LightMessage(seq=seq, t=record["t"], event=record["payload"]))
            elif record["kind"] == "command":
                payload = record["payload"]
                pending = self._pending_acks.pop(0) if self._pending_acks else None
                ack = bridge.CommandAck(
                    seq=seq,
                    t=record["t"],
                    command_id=pending.command_id if pending else None,
                    accepted=bool(payload.get("accepted", False)),
                    detail=_ack_detail(payload),
                )
                if pending and pending.connection is not None:
                    self._send(pending.connection, ack)

    # -- connection handling ------------------------------------------------

    async def _handle_client(self, connection: ServerConnection) -> None:
        queue: asyncio.Queue[str] = asyncio.Queue()
        self.clients[connection] = queue
        writer = asyncio.create_task(self._client_writer(connection, queue))
        self._send(connection, self._snapshot_message())
        try:
            async for frame in connection:
                try:
                    msg = bridge.decode_client(frame)
                except bridge.BridgeError as exc:
                    self._send(
                        connection,
                        bridge.ErrorMessage(
                            seq=self._next_seq(),
                            t=self.performance.t,
                            code=exc.code,
                            detail=exc.detail,
                        ),
                    )
                    continue
                await self.inbox.put((msg, connection))
        except ConnectionClosed:
            pass
        finally:
            writer.cancel()
            self.clients.pop(connection, None)

    def _process_request(self, connection: ServerConnection, request: Request) -> Optional[Response]:
        path = request.path.split("?", 1)[0]
        if path == WS_PATH:
            return None  # proceed with the websocket handshake
        if self.static_dir is None:
            return _plain_response(http.HTTPStatus.NOT_FOUND, b"no static assets\n")
        if path == "/":
            path = "/index.html"
        target = (self.static_dir / path.lstrip("/")).resolve()
        if not str(target).startswith(str(self.static_dir)) or not target.is_file():
            return _plain_response(http.HTTPStatus.NOT_FOUND, b"not found\n")
        body = target.read_bytes()
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        return _plain_response(http.HTTPStatus.OK, body, ctype)

    # -- main loop ----------------------------------------------------------

    async def _drain_inbox(self) -> None:
        while not self.inbox.empty():
            msg, connection = self.inbox.get_nowait()
            self.performance.submit_command(msg.command)
            self._pending_acks.append(_PendingAck(connection=connection, command_id=msg.command_id))

    async def _run_loop(self) -> None:
        perf = self.performance
        loop = asyncio.get_running_loop()
        start = loop.time()
        next_snapshot = 0.0
        while perf.t < perf.config.duration:
            target = start + (perf.t + perf.config.dt) / self.time_scale
            delay = target - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                await asyncio.sleep(0)  # keep the loop cooperative when behind
            await self._drain_inbox()
            perf.step()
            self._flush_log()
            if perf.t >= next_snapshot:
                self._broadcast(self._snapshot_message())
                next_snapshot += 1.0 / SNAPSHOT_HZ
        self.finished.set()

    async def run(self) -> None:
        async with serve(
            self._handle_client,
            self.host,
            self.port,
            process_request=self._process_request,
            close_timeout=1.0,
        ):
            self.started.set()
            await self._run_loop()


def serve_forever(
    config: PerformanceConfig,
    library: Optional[PatternLibrary] = None,
    static_dir: Optional[Path] = None,
    host: str = "127.0.0.1",
    port: int = 8765,
    time_scale: float = 1.0,
) -> None:
    server = LiveServer(
        config, library=library, static_dir=static_dir, host=host, port=port, time_scale=time_scale
    )
    asyncio.run(server.run())
