"""Bidirectional control protocol: source list and levels out, gain commands in.

Wire format is one JSON object per line over a persistent TCP stream. The
same port also accepts RFC 6455 WebSocket upgrades (sniffed from the first
bytes) so browser clients can speak the identical protocol, one JSON object
per text frame. Every server message carries a strictly increasing sequence
number; SetGain commands are queued and drained by the pipeline at chunk
boundaries.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import queue
import socket
import struct
import threading

import numpy as np

from soundscape.core import GainVector, SourceTrack, clamp_gain

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
LEVEL_FLOOR_EPS = 1e-12
_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


def compute_levels(scaled: dict[str, np.ndarray]) -> list[dict]:
    """Post-gain RMS level per stem key, in dB (epsilon floor for silence)."""
    out = []
    for key, samples in scaled.items():
        rms = float(np.sqrt(np.mean(samples**2))) if len(samples) else 0.0
        out.append({"id": key, "rms_db": round(20.0 * np.log10(rms + LEVEL_FLOOR_EPS), 2)})
    return out


def track_payload(tracks: list[SourceTrack], gains: GainVector) -> list[dict]:
    return [
        {
            "id": t.id,
            "kind": t.kind,
            "coords": [round(t.coords[0], 3), round(t.coords[1], 3)],
            "gain": gains.get(t.id),
            "active": t.active,
        }
        for t in tracks
    ]


# ── Transports ───────────────────────────────────────────────────────────────


class _LineTransport:
    """Raw NDJSON over the socket."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self._reader = sock.makefile("rb")
        self._send_lock = threading.Lock()

    def recv_text(self) -> str | None:
        line = self._reader.readline()
        if not line:
            return None
        return line.decode("utf-8", errors="replace")

    def send_text(self, text: str) -> None:
        with self._send_lock:
            self.sock.sendall((text + "\n").encode("utf-8"))

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


class _WebSocketTransport:
    """Server side of RFC 6455: one protocol line per text frame."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self._send_lock = threading.Lock()

    def _recv_exact(self, n: int) -> bytes:
        buf = b""
        while len(buf) < n:
            part = self.sock.recv(n - len(buf))
            if not part:
                raise ConnectionError("websocket peer closed")
            buf += part
        return buf

    def handshake(self, initial: bytes) -> None:
        request = initial
        while b"\r\n\r\n" not in request:
            part = self.sock.recv(4096)
            if not part:
                raise ConnectionError("websocket handshake truncated")
            request += part
        key = None
        for line in request.split(b"\r\n"):
            if line.lower().startswith(b"sec-websocket-key:"):
                key = line.split(b":", 1)[1].strip().decode()
        if key is None:
            raise ConnectionError("missing Sec-WebSocket-Key")
        accept = base64.b64encode(hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
        self.sock.sendall(
            (
                "HTTP/1.1 101 Switching Protocols\r\n"
                "Upgrade: websocket\r\n"
                "Connection: Upgrade\r\n"
                f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
            ).encode()
        )

    def recv_text(self) -> str | None:
        while True:
            try:
                head = self._recv_exact(2)
            except (ConnectionError, OSError):
                return None
            fin = head[0] & 0x80
            opcode = head[0] & 0x0F
            masked = head[1] & 0x80
            length = head[1] & 0x7F
            if length == 126:
                length = struct.unpack(">H", self._recv_exact(2))[0]
            elif length == 127:
                length = struct.unpack(">Q", self._recv_exact(8))[0]
            mask = self._recv_exact(4) if masked else b""
            payload = self._recv_exact(length) if length else b""
            if masked:
                payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            if opcode == 0x8:  # close
                return None
            if opcode == 0x9:  # ping -> pong
                self._send_frame(0xA, payload)
                continue
            if opcode == 0xA:  # pong
                continue
            if not fin:
                raise ConnectionError("fragmented websocket frames unsupported")
            if opcode == 0x1:
                return payload.decode("utf-8", errors="replace")
            # Ignore other opcodes (binary etc.)

    def _send_frame(self, opcode: int, payload: bytes) -> None:
        header = bytes([0x80 | opcode])
        n = len(payload)
        if n < 126:
            header += bytes([n])
        elif n < 65536:
            header += bytes([126]) + struct.pack(">H", n)
        else:
            header += bytes([127]) + struct.pack(">Q", n)
        with self._send_lock:
            self.sock.sendall(header + payload)

    def send_text(self, text: str) -> None:
        self._send_frame(0x1, text.encode("utf-8"))

    def close(self) -> None:
        try:
            self._send_frame(0x8, b"")
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


# ── Server ───────────────────────────────────────────────────────────────────


class ControlServer:
    """Serves the live pipeline state to any number of concurrent clients."""

    def __init__(self, gains: GainVector, host: str = "127.0.0.1", port: int = 0):
        self.gains = gains
        self.host = host
        self._requested_port = port
        self.port: int | None = None
        self._sock: socket.socket | None = None
        self._seq = 0
        self._seq_lock = threading.Lock()
        self._clients: list = []
        self._clients_lock = threading.Lock()
        self._pending: "queue.Queue[tuple[str, float]]" = queue.Queue()
        self._running = False
        self._state_lock = threading.Lock()
        self._tracks: list[SourceTrack] = []
        self._time = 0.0
        self._last_payload: list[dict] | None = None

    # ── lifecycle ──

    def start(self) -> None:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((self.host, self._requested_port))
        except OSError as exc:
            raise OSError(f"bind-failure: {self.host}:{self._requested_port}: {exc}") from exc
        sock.listen(8)
        sock.settimeout(0.25)
        self._sock = sock
        self.port = sock.getsockname()[1]
        self._running = True
        threading.Thread(target=self._accept_loop, name="control-accept", daemon=True).start()

    def stop(self) -> None:
        self._running = False
        with self._clients_lock:
            clients = list(self._clients)
            self._clients.clear()
        for transport in clients:
            transport.close()
        if self._sock is not None:
            self._sock.close()

    def _accept_loop(self) -> None:
        while self._running:
            try:
                conn, _ = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            threading.Thread(
                target=self._client_session, args=(conn,), daemon=True
            ).start()

    def _client_session(self, conn: socket.socket) -> None:
        try:
            # WebSocket clients send their HTTP request immediately; raw
            # NDJSON clients may stay silent (the server speaks first), so a
            # quiet peek window means plain line transport.
            conn.settimeout(0.25)
            try:
                head = conn.recv(4, socket.MSG_PEEK)
            except socket.timeout:
                head = b""
            conn.settimeout(None)
            if head.startswith(b"G"):
                initial = conn.recv(4096)
                transport = _WebSocketTransport(conn)
                transport.handshake(initial)
            else:
                transport = _LineTransport(conn)
        except (ConnectionError, OSError) as exc:
            logger.debug("client handshake failed: %s", exc)
            conn.close()
            return

        with self._clients_lock:
            self._clients.append(transport)
        try:
            self._send(transport, self._snapshot_message())
            while self._running:
                line = transport.recv_text()
                if line is None:
                    break
                if not line.strip():
                    continue
                self._handle_frame(transport, line)
        except OSError:
            pass
        finally:
            with self._clients_lock:
                if transport in self._clients:
                    self._clients.remove(transport)
            transport.close()

    # ── inbound ──

    def _handle_frame(self, transport, line: str) -> None:
        try:
            msg = json.loads(line)
            if not isinstance(msg, dict):
                raise ValueError("frame is not an object")
        except ValueError:
            self._send(transport, self._error("bad_frame", "not a JSON object"))
            return
        mtype = msg.get("type")
        if mtype == "set_gain":
            try:
                track_id = str(msg["id"])
                gain = clamp_gain(float(msg["gain"]))
            except (KeyError, TypeError, ValueError):
                self._send(transport, self._error("bad_set_gain", "need id and numeric gain"))
                return
            self._pending.put((track_id, gain))
        else:
            self._send(transport, self._error("unknown_type", f"unsupported type {mtype!r}"))

    def drain_pending(self) -> int:
        """Apply queued gain commands; called by the engine at chunk boundaries."""
        applied = 0
        while True:
            try:
                track_id, gain = self._pending.get_nowait()
            except queue.Empty:
                return applied
            self.gains.set(track_id, gain)
            applied += 1

    # ── outbound ──

    def _next_seq(self) -> int:
        with self._seq_lock:
            seq = self._seq
            self._seq += 1
            return seq

    def _send(self, transport, message: dict) -> None:
        message["seq"] = self._next_seq()
        try:
            transport.send_text(json.dumps(message))
        except OSError:
            with self._clients_lock:
                if transport in self._clients:
                    self._clients.remove(transport)
            transport.close()

    def _broadcast(self, message: dict) -> None:
        with self._clients_lock:
            clients = list(self._clients)
        for transport in clients:
            self._send(transport, dict(message))

    def _error(self, code: str, detail: str) -> dict:
        return {"type": "error", "code": code, "detail": detail}

    def _snapshot_message(self) -> dict:
        with self._state_lock:
            return {
                "type": "snapshot",
                "protocol_version": PROTOCOL_VERSION,
                "time": self._time,
                "tracks": track_payload(self._tracks, self.gains),
            }

    def publish_chunk(
        self, stream_time: float, tracks: list[SourceTrack], scaled: dict[str, np.ndarray]
    ) -> None:
        """Push SourceList (on change) then Levels for one chunk."""
        with self._state_lock:
            self._tracks = list(tracks)
            self._time = stream_time
        payload = track_payload(tracks, self.gains)
        if payload != self._last_payload:
            self._last_payload = payload
            self._broadcast({"type": "source_list", "time": stream_time, "tracks": payload})
        self._broadcast(
            {"type": "levels", "time": stream_time, "levels": compute_levels(scaled)}
        )


# ── Scripted client (tests, CLI automation) ─────────────────────────────────


class ControlClient:
    """Minimal line-oriented client for the raw TCP transport."""

    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self._reader = self.sock.makefile("rb")
        self._seq = 0
        self.messages: list[dict] = []

    def recv(self) -> dict | None:
        line = self._reader.readline()
        if not line:
            return None
        msg = json.loads(line)
        self.messages.append(msg)
        return msg

    def recv_until(self, mtype: str, limit: int = 200) -> dict | None:
        for _ in range(limit):
            msg = self.recv()
            if msg is None:
                return None
            if msg.get("type") == mtype:
                return msg
        return None

    def send(self, message: dict) -> None:
        message.setdefault("seq", self._seq)
        self._seq += 1
        self.sock.sendall((json.dumps(message) + "\n").encode("utf-8"))

    def set_gain(self, track_id: str, gain: float) -> None:
        self.send({"type": "set_gain", "id": track_id, "gain": gain})

    def send_raw(self, text: str) -> None:
        self.sock.sendall((text + "\n").encode("utf-8"))

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass
