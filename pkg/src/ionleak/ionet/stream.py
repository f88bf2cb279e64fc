"""Replay a stored trace over TCP and capture it at the other end.

Session layout: the server sends the sidecar as one UTF-8 JSON line
(including ``n_samples``), then a run of frames until the payload is
exhausted, then closes.  Each frame is::

    b"RFSC" | seq: uint32 LE | n_samples: uint32 LE | n_samples x int16 LE

``seq`` starts at 0 and increases by one per frame.
"""

from __future__ import annotations

import json
import logging
import socket
import struct
import time
from pathlib import Path

import numpy as np

from ..errors import ConnectionLost, MalformedFrame
from .tracefile import PAYLOAD_DTYPE, TraceFile, read_trace_file, write_trace_file

log = logging.getLogger(__name__)

MAGIC = b"RFSC"
HEADER = struct.Struct("<4sII")
MAX_FRAME_SAMPLES = 65536
DEFAULT_FRAME_SAMPLES = 4096
MAX_HANDSHAKE_BYTES = 1 << 16


def encode_frame(seq: int, samples: np.ndarray) -> bytes:
    samples = np.asarray(samples)
    if samples.size > MAX_FRAME_SAMPLES:
        raise ValueError(f"frame holds at most {MAX_FRAME_SAMPLES} samples")
    return HEADER.pack(MAGIC, seq, samples.size) + samples.astype(PAYLOAD_DTYPE).tobytes()


def encode_handshake(sidecar: dict) -> bytes:
    return (json.dumps(sidecar, separators=(",", ":")) + "\n").encode()


class StreamServer:
    """Serves one trace file to one client at a time.

    The listening socket is bound on construction, so ``port`` is valid
    (also when 0 was requested) before :meth:`serve` is called.
    """

    def __init__(self, trace_file, port: int = 0, host: str = "127.0.0.1", realtime: bool = False,
                 frame_samples: int = DEFAULT_FRAME_SAMPLES):
        if not 0 < frame_samples <= MAX_FRAME_SAMPLES:
            raise ValueError(f"frame_samples must be in 1..{MAX_FRAME_SAMPLES}")
        self.trace = trace_file if isinstance(trace_file, TraceFile) else read_trace_file(trace_file)
        self.realtime = realtime
        self.frame_samples = frame_samples
        self._sock = socket.create_server((host, port))
        self.host, self.port = self._sock.getsockname()[:2]

    def close(self):
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def serve(self, sessions: int | None = 1) -> None:
        """Handle ``sessions`` clients sequentially (forever if None)."""
        done = 0
        while sessions is None or done < sessions:
            conn, addr = self._sock.accept()
            log.info("client %s connected", addr)
            with conn:
                self._session(conn)
            done += 1

    def _session(self, conn: socket.socket) -> int:
        payload = self.trace.payload
        sidecar = {**self.trace.sidecar, "n_samples": int(payload.size)}
        sidecar.pop("truncated", None)
        fs = self.trace.sample_rate_hz
        sent, seq = 0, 0
        t0 = time.monotonic()
        try:
            conn.sendall(encode_handshake(sidecar))
            while sent < payload.size:
                chunk = payload[sent:sent + self.frame_samples]
                if self.realtime:
                    # a frame is released once its samples would have been acquired
                    wait = t0 + (sent + chunk.size) / fs - time.monotonic()
                    if wait > 0:
                        time.sleep(wait)
                conn.sendall(encode_frame(seq, chunk))
                sent += chunk.size
                seq += 1
        except (BrokenPipeError, ConnectionResetError):
            log.info("client disconnected after %d frames", seq)
        return seq


def serve_stream(trace_file, port: int, realtime: bool = False, host: str = "127.0.0.1",
                 sessions: int | None = 1, frame_samples: int = DEFAULT_FRAME_SAMPLES) -> None:
    with StreamServer(trace_file, port, host, realtime, frame_samples) as server:
        server.serve(sessions)


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            break
        buf += chunk
    return bytes(buf)


def _read_handshake(sock: socket.socket) -> dict:
    line = bytearray()
    while not line.endswith(b"\n"):
        b = sock.recv(1)
        if not b:
            raise ConnectionLost("connection closed during handshake")
        line += b
        if len(line) > MAX_HANDSHAKE_BYTES:
            raise MalformedFrame("handshake line too long")
    try:
        sidecar = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedFrame(f"handshake is not JSON: {exc}") from None
    if not isinstance(sidecar, dict) or not float(sidecar.get("sample_rate_hz", 0)) > 0:
        raise MalformedFrame("handshake lacks a positive sample_rate_hz")
    if not isinstance(sidecar.get("n_samples"), int) or sidecar["n_samples"] < 0:
        raise MalformedFrame("handshake lacks n_samples")
    return sidecar


def capture_stream(host: str, port: int, duration_s: float | None = None, out_path=None,
                   timeout: float = 10.0) -> TraceFile:
    """Receive a served trace.

    Stops after ``duration_s`` worth of samples (the result is then marked
    truncated) or when the server finishes.  On a protocol violation or a
    dropped connection the samples received so far are written to
    ``out_path`` (flagged truncated) before the error propagates.

    Raises:
        MalformedFrame: bad magic, oversize frame or sequence gap.
        ConnectionLost: the stream ended before the announced sample count.
        ConnectionRefusedError: nothing is listening.
    """
    chunks: list[np.ndarray] = []
    sidecar: dict = {}
    received = 0

    def result(truncated: bool) -> TraceFile:
        payload = np.concatenate(chunks) if chunks else np.zeros(0, dtype=PAYLOAD_DTYPE)
        tf = TraceFile(payload, {**sidecar, "n_samples": int(payload.size), "truncated": truncated})
        if out_path is not None and sidecar:
            write_trace_file(tf, out_path)
        return tf

    with socket.create_connection((host, port), timeout=timeout) as sock:
        sidecar = _read_handshake(sock)
        total = sidecar["n_samples"]
        wanted = total
        if duration_s is not None:
            wanted = min(total, int(round(duration_s * float(sidecar["sample_rate_hz"]))))
        expected_seq = 0
        try:
            while received < wanted:
                head = _recv_exact(sock, HEADER.size)
                if len(head) < HEADER.size:
                    raise ConnectionLost(f"stream ended after {received} of {wanted} samples")
                magic, seq, n = HEADER.unpack(head)
                if magic != MAGIC:
                    raise MalformedFrame(f"frame {expected_seq}: bad magic {magic!r}")
                if n > MAX_FRAME_SAMPLES:
                    raise MalformedFrame(f"frame {seq}: {n} samples exceeds {MAX_FRAME_SAMPLES}")
                if seq != expected_seq:
                    raise MalformedFrame(f"sequence error: expected frame {expected_seq}, got {seq}")
                body = _recv_exact(sock, 2 * n)
                if len(body) < 2 * n:
                    raise ConnectionLost(f"stream ended inside frame {seq}")
                chunks.append(np.frombuffer(body, dtype=PAYLOAD_DTYPE))
                received += n
                expected_seq += 1
        except (MalformedFrame, ConnectionLost) as exc:
            result(truncated=True)
            exc.partial_path = Path(out_path) if out_path is not None else None
            raise
        except (ConnectionResetError, socket.timeout) as exc:
            result(truncated=True)
            raise ConnectionLost(f"connection lost: {exc}",
                                 Path(out_path) if out_path is not None else None) from exc

    if chunks and received > wanted:
        chunks[-1] = chunks[-1][: chunks[-1].size - (received - wanted)]
    return result(truncated=wanted < total)
