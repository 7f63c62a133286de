from __future__ import annotations

import base64
import hashlib
import json
import os
import socket
import struct
import threading
import time

import numpy as np
import pytest

from soundscape.control import ControlClient, ControlServer, compute_levels
from soundscape.core import GainVector, PipelineConfig, SourceTrack
from soundscape.pipeline import run_stream
from soundscape.scenario import bundled_specs, synthesize

SR = 16000


# ── compute_levels ───────────────────────────────────────────────────────────


def test_levels_full_scale_sine():
    t = np.arange(SR) / SR
    levels = compute_levels({"t1": np.sin(2 * np.pi * 440.0 * t)})
    assert levels[0]["id"] == "t1"
    assert levels[0]["rms_db"] == pytest.approx(-3.01, abs=0.02)


def test_levels_silence_hits_epsilon_floor():
    levels = compute_levels({"t1": np.zeros(SR)})
    assert levels[0]["rms_db"] == pytest.approx(-240.0, abs=0.01)


def test_levels_zero_gain_stem_at_floor():
    t = np.arange(SR) / SR
    stem = 0.0 * np.sin(2 * np.pi * 440.0 * t)
    levels = compute_levels({"t1": stem})
    assert levels[0]["rms_db"] == pytest.approx(-240.0, abs=0.01)


# ── server basics ────────────────────────────────────────────────────────────


@pytest.fixture
def server():
    gains = GainVector()
    srv = ControlServer(gains)
    srv.start()
    yield srv
    srv.stop()


def _tracks():
    return [
        SourceTrack("t1", "speaker", (0.25, 0.5)),
        SourceTrack("t2", "Violin", (0.75, 0.5)),
    ]


def test_connect_receives_snapshot_first(server):
    client = ControlClient("127.0.0.1", server.port)
    msg = client.recv()
    assert msg["type"] == "snapshot"
    assert msg["protocol_version"] == 1
    client.close()


def test_snapshot_reflects_current_tracks(server):
    server.publish_chunk(1.0, _tracks(), {"t1": np.zeros(4)})
    client = ControlClient("127.0.0.1", server.port)
    msg = client.recv()
    assert msg["type"] == "snapshot"
    assert [t["id"] for t in msg["tracks"]] == ["t1", "t2"]
    assert msg["tracks"][0]["coords"] == [0.25, 0.5]
    client.close()


def test_set_gain_applied_at_drain(server):
    client = ControlClient("127.0.0.1", server.port)
    client.recv()
    client.set_gain("t1", 2.5)
    deadline = time.time() + 2.0
    while server.drain_pending() == 0:
        assert time.time() < deadline, "gain command never arrived"
        time.sleep(0.01)
    assert server.gains.get("t1") == 2.5
    client.close()


def test_set_gain_clamped_server_side(server):
    client = ControlClient("127.0.0.1", server.port)
    client.recv()
    client.set_gain("t1", 99.0)
    deadline = time.time() + 2.0
    while server.drain_pending() == 0:
        assert time.time() < deadline
        time.sleep(0.01)
    assert server.gains.get("t1") == 10.0
    client.close()


def test_set_gain_idempotent(server):
    client = ControlClient("127.0.0.1", server.port)
    client.recv()
    client.set_gain("t1", 3.0)
    client.set_gain("t1", 3.0)
    drained = 0
    deadline = time.time() + 2.0
    while drained < 2:
        drained += server.drain_pending()
        assert time.time() < deadline
        time.sleep(0.01)
    assert server.gains.get("t1") == 3.0
    client.close()


def test_malformed_frame_gets_error_and_connection_survives(server):
    client = ControlClient("127.0.0.1", server.port)
    client.recv()
    client.send_raw("{not json")
    msg = client.recv_until("error")
    assert msg["code"] == "bad_frame"
    client.set_gain("t1", 4.0)
    deadline = time.time() + 2.0
    while server.drain_pending() == 0:
        assert time.time() < deadline
        time.sleep(0.01)
    assert server.gains.get("t1") == 4.0
    client.close()


def test_seq_strictly_increasing_across_messages(server):
    client = ControlClient("127.0.0.1", server.port)
    client.recv()
    for k in range(5):
        server.publish_chunk(float(k), _tracks(), {"t1": np.zeros(4)})
    # snapshot + one source_list (payload unchanged afterwards) + 5 levels.
    seen_levels = 0
    while seen_levels < 5:
        msg = client.recv()
        assert msg is not None
        if msg["type"] == "levels":
            seen_levels += 1
    seqs = [m["seq"] for m in client.messages]
    assert seqs == sorted(seqs)
    assert len(set(seqs)) == len(seqs)
    client.close()


def test_levels_never_precede_source_list(server):
    client = ControlClient("127.0.0.1", server.port)
    client.recv()
    server.publish_chunk(1.0, _tracks(), {"t1": np.zeros(4), "t2": np.zeros(4)})
    first = client.recv()
    second = client.recv()
    assert first["type"] == "source_list"
    assert second["type"] == "levels"
    client.close()


def test_two_concurrent_clients(server):
    a = ControlClient("127.0.0.1", server.port)
    b = ControlClient("127.0.0.1", server.port)
    assert a.recv()["type"] == "snapshot"
    assert b.recv()["type"] == "snapshot"
    server.publish_chunk(1.0, _tracks(), {"t1": np.zeros(4)})
    assert a.recv_until("levels") is not None
    assert b.recv_until("levels") is not None
    a.close()
    b.close()


# ── WebSocket transport ──────────────────────────────────────────────────────


class TinyWsClient:
    """Just enough RFC 6455 client to exercise the upgrade path."""

    def __init__(self, host, port):
        self.sock = socket.create_connection((host, port), timeout=5.0)
        key = base64.b64encode(os.urandom(16)).decode()
        self.sock.sendall(
            (
                f"GET / HTTP/1.1\r\nHost: {host}\r\nUpgrade: websocket\r\n"
                f"Connection: Upgrade\r\nSec-WebSocket-Key: {key}\r\n"
                "Sec-WebSocket-Version: 13\r\n\r\n"
            ).encode()
        )
        response = b""
        while b"\r\n\r\n" not in response:
            response += self.sock.recv(4096)
        header, _, remainder = response.partition(b"\r\n\r\n")
        self._pending = remainder  # frame bytes may ride along with the 101
        assert b"101" in header.split(b"\r\n")[0]
        expected = base64.b64encode(
            hashlib.sha1((key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11").encode()).digest()
        ).decode()
        assert expected.encode() in header

    def _recv_exact(self, n):
        buf = self._pending[:n]
        self._pending = self._pending[n:]
        while len(buf) < n:
            part = self.sock.recv(n - len(buf))
            assert part, "peer closed"
            buf += part
        return buf

    def recv_json(self):
        head = self._recv_exact(2)
        opcode = head[0] & 0x0F
        length = head[1] & 0x7F
        if length == 126:
            length = struct.unpack(">H", self._recv_exact(2))[0]
        elif length == 127:
            length = struct.unpack(">Q", self._recv_exact(8))[0]
        payload = self._recv_exact(length)
        assert opcode == 0x1
        return json.loads(payload.decode())

    def send_json(self, obj):
        payload = json.dumps(obj).encode()
        mask = os.urandom(4)
        masked = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        header = bytes([0x81])
        n = len(payload)
        if n < 126:
            header += bytes([0x80 | n])
        else:
            header += bytes([0x80 | 126]) + struct.pack(">H", n)
        self.sock.sendall(header + mask + masked)

    def close(self):
        self.sock.close()


def test_websocket_upgrade_and_set_gain(server):
    ws = TinyWsClient("127.0.0.1", server.port)
    snapshot = ws.recv_json()
    assert snapshot["type"] == "snapshot"
    ws.send_json({"type": "set_gain", "seq": 0, "id": "t9", "gain": 7.0})
    deadline = time.time() + 2.0
    while server.drain_pending() == 0:
        assert time.time() < deadline
        time.sleep(0.01)
    assert server.gains.get("t9") == 7.0
    ws.close()


# ── engine loopback ──────────────────────────────────────────────────────────


def test_loopback_set_gain_reflected_in_levels():
    """Scripted client against a live engine run: SetGain -> Levels drop."""
    spec = bundled_specs()["c2_disjoint"]
    out = synthesize(spec)
    config = PipelineConfig(window_size=2.0, chunk_size=1.0)
    gains = GainVector()
    server = ControlServer(gains)
    server.start()

    levels_by_chunk: list[dict[str, float]] = []
    target_chunk = 3

    def before(k):
        server.drain_pending()

    def after(k, result, scaled, mono):
        server.publish_chunk((k + 1) * config.chunk_size, result.tracks, scaled)
        levels_by_chunk.append({lv["id"]: lv["rms_db"] for lv in compute_levels(scaled)})

    client = ControlClient("127.0.0.1", server.port)
    client.recv()  # snapshot

    muted_track = {}

    def run():
        run_stream(
            out.mixture,
            out.annotations,
            config,
            gains=gains,
            before_chunk=before,
            after_chunk=after,
            pace_s=0.05,
        )

    def script():
        # Wait for the first source_list, then mute the first speaker track.
        msg = client.recv_until("source_list")
        track_id = msg["tracks"][0]["id"]
        muted_track["id"] = track_id
        while len(levels_by_chunk) < target_chunk:
            time.sleep(0.005)
        client.set_gain(track_id, 0.0)

    engine = threading.Thread(target=run)
    scripted = threading.Thread(target=script)
    engine.start()
    scripted.start()
    engine.join()
    scripted.join()
    server.stop()
    client.close()

    track_id = muted_track["id"]
    before_db = levels_by_chunk[target_chunk - 1][track_id]
    # Applied at the next chunk boundary; fully in effect within 2 chunks.
    after_db = min(lv[track_id] for lv in levels_by_chunk[target_chunk:target_chunk + 2])
    assert after_db <= before_db - 40.0
