"""Frame streaming service: one engine session per connected client.

A single listening port accepts two framings of the same JSON payloads:

* plain TCP with one JSON object per line, and
* WebSocket text frames (the connection is upgraded when the first line
  looks like an HTTP GET), so browsers can connect directly.

Protocol, schema 1.  Server sends ``hello`` first, then ``frame`` messages
at the configured rate, plus ``error``/``pong`` as needed.  Clients send
``pose`` (latest wins within a frame interval), ``config`` (validated
atomically; rejected updates leave the session unchanged), and ``ping``.
A slow reader only ever costs itself frames: each session buffers at most
QUEUE_LIMIT snapshots and drops the oldest beyond that.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import json
import logging
import math
from dataclasses import dataclass
from typing import Optional

from . import __version__
from .geo import DevicePose
from .pipeline import ConfigError, LabelEngine, snapshot_to_dict
from .scene import SCHEMA_VERSION, GeoCoordinate, Scene, WorldPosition

log = logging.getLogger("arlabels.service")

DEFAULT_PORT = 7788
QUEUE_LIMIT = 8  # buffered frames per session; oldest dropped first

# How long to wait for first bytes to tell a WebSocket upgrade apart from a
# plain TCP client.  Browsers send their GET immediately; a silent connection
# is a passive line-framing client that just wants the stream.
SNIFF_TIMEOUT_S = 0.3

_WS_MAGIC = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
_MAX_LINE = 1 << 20
_MAX_WS_PAYLOAD = 1 << 22


class ProtocolError(Exception):
    """The peer violated the wire protocol; the connection must close."""


# ---------------------------------------------------------------------------
# Framings: line-delimited JSON over TCP, or WebSocket text frames
# ---------------------------------------------------------------------------


class LineFraming:
    def __init__(
        self,
        reader: asyncio.StreamReader,
        writer: asyncio.StreamWriter,
        first_line: Optional[bytes] = None,
    ):
        self._reader = reader
        self._writer = writer
        self._first = first_line

    async def recv_text(self) -> Optional[str]:
        if self._first is not None:
            line, self._first = self._first, None
        else:
            line = await self._reader.readline()
        if not line:
            return None
        if len(line) > _MAX_LINE:
            raise ProtocolError("line too long")
        return line.decode("utf-8", errors="replace").rstrip("\r\n")

    async def send_text(self, text: str) -> None:
        self._writer.write(text.encode("utf-8") + b"\n")
        await self._writer.drain()


class WebSocketFraming:
    """Minimal RFC 6455 server side: text frames, ping/pong, close."""

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self._reader = reader
        self._writer = writer

    @staticmethod
    def accept_key(client_key: str) -> str:
        digest = hashlib.sha1((client_key + _WS_MAGIC).encode("ascii")).digest()
        return base64.b64encode(digest).decode("ascii")

    async def handshake(self, request_line: bytes) -> bool:
        raw = bytearray()
        while not raw.endswith(b"\r\n\r\n"):
            chunk = await self._reader.read(1)
            if not chunk:
                return False
            raw += chunk
            if len(raw) > _MAX_LINE:
                return False
        headers: dict[str, str] = {}
        for line in bytes(raw).decode("latin-1").split("\r\n"):
            if ":" in line:
                name, _, value = line.partition(":")
                headers[name.strip().lower()] = value.strip()
        key = headers.get("sec-websocket-key")
        if "websocket" not in headers.get("upgrade", "").lower() or not key:
            self._writer.write(b"HTTP/1.1 400 Bad Request\r\nConnection: close\r\n\r\n")
            await self._writer.drain()
            return False
        response = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {self.accept_key(key)}\r\n"
            "\r\n"
        )
        self._writer.write(response.encode("ascii"))
        await self._writer.drain()
        log.debug("websocket upgrade: %s", request_line.decode("latin-1", "replace").strip())
        return True

    async def _read_raw(self) -> Optional[tuple[bool, int, bytes]]:
        try:
            head = await self._reader.readexactly(2)
            fin = bool(head[0] & 0x80)
            opcode = head[0] & 0x0F
            masked = bool(head[1] & 0x80)
            length = head[1] & 0x7F
            if length == 126:
                length = int.from_bytes(await self._reader.readexactly(2), "big")
            elif length == 127:
                length = int.from_bytes(await self._reader.readexactly(8), "big")
            if length > _MAX_WS_PAYLOAD:
                raise ProtocolError("websocket payload too large")
            if not masked:
                raise ProtocolError("client frames must be masked")
            mask = await self._reader.readexactly(4)
            payload = bytearray(await self._reader.readexactly(length))
        except (asyncio.IncompleteReadError, ConnectionError):
            return None
        for i in range(len(payload)):
            payload[i] ^= mask[i & 3]
        return fin, opcode, bytes(payload)

    async def recv_text(self) -> Optional[str]:
        fragments = bytearray()
        in_message = False
        while True:
            raw = await self._read_raw()
            if raw is None:
                return None
            fin, opcode, payload = raw
            if opcode == 0x9:  # ping: answer and keep reading
                await self._send_raw(0xA, payload)
            elif opcode == 0xA:  # unsolicited pong: ignore
                continue
            elif opcode == 0x8:  # close: echo and report end of stream
                await self._send_raw(0x8, payload[:2])
                return None
            elif opcode == 0x1:  # text, possibly fragmented
                if in_message:
                    raise ProtocolError("interleaved websocket messages")
                if fin:
                    return payload.decode("utf-8", errors="replace")
                fragments += payload
                in_message = True
            elif opcode == 0x0:  # continuation
                if not in_message:
                    raise ProtocolError("continuation frame without a message")
                fragments += payload
                if len(fragments) > _MAX_WS_PAYLOAD:
                    raise ProtocolError("websocket message too large")
                if fin:
                    return fragments.decode("utf-8", errors="replace")
            else:
                raise ProtocolError(f"unsupported websocket opcode {opcode}")

    async def _send_raw(self, opcode: int, payload: bytes) -> None:
        header = bytearray([0x80 | opcode])
        n = len(payload)
        if n <= 125:
            header.append(n)
        elif n <= 0xFFFF:
            header.append(126)
            header += n.to_bytes(2, "big")
        else:
            header.append(127)
            header += n.to_bytes(8, "big")
        self._writer.write(bytes(header) + payload)
        await self._writer.drain()

    async def send_text(self, text: str) -> None:
        await self._send_raw(0x1, text.encode("utf-8"))


# ---------------------------------------------------------------------------
# Wire message parsing
# ---------------------------------------------------------------------------


def pose_from_wire(msg: dict) -> DevicePose:
    pos = msg.get("position")
    if not isinstance(pos, dict):
        raise ValueError("pose needs a position object")
    try:
        yaw = float(msg.get("yaw_deg", 0.0))
        pitch = float(msg.get("pitch_deg", 0.0))
        if "lat" in pos or "lon" in pos:
            geo = GeoCoordinate(float(pos["lat"]), float(pos["lon"]))
            height = float(pos.get("y", 0.0))
            return DevicePose(
                position=WorldPosition(0.0, height, 0.0), yaw_deg=yaw, pitch_deg=pitch, geo=geo
            )
        position = WorldPosition(float(pos["x"]), float(pos.get("y", 0.0)), float(pos["z"]))
        return DevicePose(position=position, yaw_deg=yaw, pitch_deg=pitch)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad pose: {exc}") from exc


def hello_message(scene: Scene, fps: float) -> dict:
    return {
        "type": "hello",
        "schema": SCHEMA_VERSION,
        "server": f"arlabels/{__version__}",
        "fps": fps,
        "scene": {
            "name": scene.name,
            "poi_count": len(scene.pois),
            "group_count": len(scene.groups),
            "transition_duration_s": scene.transition_duration_s,
            "easing": scene.easing.value,
            "thresholds": {
                "t_deg": scene.thresholds.t_deg,
                "m1_deg": scene.thresholds.m1_deg,
                "m2_deg": scene.thresholds.m2_deg,
            },
        },
    }


# ---------------------------------------------------------------------------
# Sessions
# ---------------------------------------------------------------------------


@dataclass
class _SessionStats:
    frames_sent: int = 0
    frames_dropped: int = 0
    poses_seen: int = 0


class Session:
    """One client: its own engine, frame clock, and bounded frame buffer."""

    def __init__(self, scene: Scene, framing, fps: float, name: str):
        self.engine = LabelEngine(scene)
        self.framing = framing
        self.fps = fps
        self.name = name
        self.stats = _SessionStats()
        self._pose = DevicePose(position=WorldPosition(0.0, 0.0, 0.0))
        self._frames: asyncio.Queue[str] = asyncio.Queue(maxsize=QUEUE_LIMIT)
        self._send_lock = asyncio.Lock()
        self._closed = asyncio.Event()

    async def send_json(self, obj: dict) -> None:
        async with self._send_lock:
            await self.framing.send_text(json.dumps(obj, separators=(",", ":")))

    async def send_error(self, message: str) -> None:
        log.info("session %s: client error: %s", self.name, message)
        await self.send_json({"type": "error", "schema": SCHEMA_VERSION, "message": message})

    # -- client message intake ---------------------------------------------

    async def handle_text(self, text: str) -> None:
        try:
            msg = json.loads(text)
        except json.JSONDecodeError:
            await self.send_error("message is not valid JSON")
            return
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            await self.send_error("message must be an object with a type")
            return
        kind = msg["type"]
        if kind == "pose":
            try:
                self._pose = pose_from_wire(msg)  # latest wins
                self.stats.poses_seen += 1
            except ValueError as exc:
                await self.send_error(str(exc))
        elif kind == "config":
            overrides = {k: v for k, v in msg.items() if k != "type"}
            try:
                self.engine.apply_config(overrides)
            except ConfigError as exc:
                await self.send_error(str(exc))
        elif kind == "ping":
            reply = {"type": "pong", "schema": SCHEMA_VERSION}
            if "t" in msg:
                reply["t"] = msg["t"]
            await self.send_json(reply)
        else:
            await self.send_error(f"unknown message type {kind!r}")

    # -- frame production and delivery ---------------------------------------

    async def frame_loop(self) -> None:
        loop = asyncio.get_running_loop()
        interval = 1.0 / self.fps
        t0 = loop.time()
        next_tick = t0
        last_t = -math.inf
        while not self._closed.is_set():
            t_now = max(loop.time() - t0, last_t + 1e-9)  # strictly increasing
            last_t = t_now
            snapshot = self.engine.update_frame(self._pose, t_now)
            line = json.dumps(
                {"type": "frame", **snapshot_to_dict(snapshot)}, separators=(",", ":")
            )
            if self._frames.full():
                self._frames.get_nowait()  # drop the oldest buffered frame
                self.stats.frames_dropped += 1
            self._frames.put_nowait(line)
            next_tick += interval
            delay = next_tick - loop.time()
            if delay < 0:
                next_tick = loop.time()  # fell behind; resynchronize
                delay = 0.0
            await asyncio.sleep(delay)

    async def writer_loop(self) -> None:
        while True:
            line = await self._frames.get()
            async with self._send_lock:
                await self.framing.send_text(line)
            self.stats.frames_sent += 1

    def close(self) -> None:
        self._closed.set()


# ---------------------------------------------------------------------------
# Server
# ---------------------------------------------------------------------------


class StreamServer:
    def __init__(self, scene: Scene, host: str = "127.0.0.1", port: int = DEFAULT_PORT, fps: float = 30.0):
        if not 1.0 <= fps <= 240.0:
            raise ValueError(f"fps must be within [1, 240], got {fps}")
        self.scene = scene
        self.host = host
        self.port = port
        self.fps = fps
        self._server: Optional[asyncio.base_events.Server] = None
        self._session_seq = 0

    @property
    def bound_port(self) -> int:
        assert self._server is not None and self._server.sockets, "server not started"
        return self._server.sockets[0].getsockname()[1]

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._on_connect, self.host, self.port)
        log.info("listening on %s:%d (%s)", self.host, self.bound_port, self.scene.name or "scene")

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None

    async def serve_forever(self) -> None:
        if self._server is None:
            await self.start()
        assert self._server is not None
        async with self._server:
            await self._server.serve_forever()

    async def _on_connect(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        self._session_seq += 1
        name = f"s{self._session_seq}"
        peer = writer.get_extra_info("peername")
        log.info("session %s: connected from %s", name, peer)
        try:
            try:
                first_line: Optional[bytes] = await asyncio.wait_for(reader.readline(), SNIFF_TIMEOUT_S)
                if not first_line:
                    return
            except asyncio.TimeoutError:
                first_line = None  # silent client: plain line framing
            if first_line is not None and first_line.startswith(b"GET "):
                ws = WebSocketFraming(reader, writer)
                if not await ws.handshake(first_line):
                    return
                framing = ws
            else:
                framing = LineFraming(reader, writer, first_line)

            session = Session(self.scene, framing, self.fps, name)
            await session.send_json(hello_message(self.scene, self.fps))

            frame_task = asyncio.create_task(session.frame_loop())
            writer_task = asyncio.create_task(session.writer_loop())
            try:
                while True:
                    text = await framing.recv_text()
                    if text is None:
                        break
                    if text.strip():
                        await session.handle_text(text)
            finally:
                session.close()
                frame_task.cancel()
                writer_task.cancel()
                for task in (frame_task, writer_task):
                    try:
                        await task
                    except (asyncio.CancelledError, ConnectionError):
                        pass
            log.info(
                "session %s: closed (%d frames sent, %d dropped, %d poses)",
                name, session.stats.frames_sent, session.stats.frames_dropped, session.stats.poses_seen,
            )
        except (ProtocolError, ConnectionError, asyncio.IncompleteReadError) as exc:
            log.info("session %s: terminated: %s", name, exc)
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass


async def serve_forever(scene: Scene, host: str = "127.0.0.1", port: int = DEFAULT_PORT, fps: float = 30.0) -> None:
    server = StreamServer(scene, host=host, port=port, fps=fps)
    await server.serve_forever()
