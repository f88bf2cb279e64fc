import json
import socket
import struct
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ionleak.errors import ConnectionLost, DataError, MalformedFrame
from ionleak.ionet import (
    StreamServer,
    capture_stream,
    encode_frame,
    encode_handshake,
    quantize,
    read_trace,
    read_trace_file,
    write_trace,
)
from ionleak.ionet.tracefile import sidecar_path
from ionleak.sigproc import SampleTrace

FS = 122.88e6


def make_trace(n=20_000, seed=0):
    return SampleTrace(np.random.default_rng(seed).normal(size=n), FS, 0.25)


# --- trace files ------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(x=arrays(np.float64, st.integers(1, 300), elements=st.floats(-1e6, 1e6)))
def test_round_trip_within_one_lsb(x, tmp_path_factory):
    path = tmp_path_factory.mktemp("rt") / "t.rftrace"
    write_trace(SampleTrace(x, FS), path)
    back = read_trace(path)
    scale = json.loads(sidecar_path(path).read_text())["scale"]
    assert np.max(np.abs(back.samples - x)) <= scale


def test_unit_extremes_map_to_full_scale():
    tf, clipped = quantize(SampleTrace(np.array([-1.0, 1.0]), FS))
    assert tf.payload.tolist() == [-32767, 32767]
    assert clipped == 0


def test_all_zero_trace_gets_unit_scale(tmp_path):
    write_trace(SampleTrace(np.zeros(10), FS), tmp_path / "z.rftrace")
    assert read_trace_file(tmp_path / "z.rftrace").scale == 1.0


def test_zero_length_trace_rejected():
    with pytest.raises(DataError):
        quantize(SampleTrace(np.zeros(0), FS))


def test_explicit_scale_reports_clipping():
    _, clipped = quantize(SampleTrace(np.array([0.0, 1.0, -2.0]), FS), scale=1 / 32767)
    assert clipped == 1


def test_sidecar_contents(tmp_path):
    path = tmp_path / "a.rftrace"
    write_trace(make_trace(100), path, description="bench")
    side = json.loads((tmp_path / "a.rftrace.json").read_text())
    assert side["n_samples"] == 100 and side["sample_rate_hz"] == FS
    assert side["start_time_s"] == 0.25 and side["description"] == "bench"
    assert path.stat().st_size == 200


def test_odd_payload_and_missing_sidecar(tmp_path):
    (tmp_path / "odd.rftrace").write_bytes(b"\x00\x01\x02")
    with pytest.raises(DataError):
        read_trace_file(tmp_path / "odd.rftrace")
    (tmp_path / "lone.rftrace").write_bytes(b"\x00\x01")
    with pytest.raises(DataError):
        read_trace_file(tmp_path / "lone.rftrace")


# --- streaming ----------------------------------------------------------------

def serve_in_thread(server, sessions=1):
    th = threading.Thread(target=server.serve, args=(sessions,), daemon=True)
    th.start()
    return th


def test_loopback_is_bit_identical(tmp_path):
    src = tmp_path / "src.rftrace"
    write_trace(make_trace(50_001), src)
    with StreamServer(src, frame_samples=4096) as server:
        th = serve_in_thread(server)
        tf = capture_stream("127.0.0.1", server.port, out_path=tmp_path / "cap.rftrace")
        th.join(5)
    assert (tmp_path / "cap.rftrace").read_bytes() == src.read_bytes()
    assert not tf.truncated
    side = json.loads((tmp_path / "cap.rftrace.json").read_text())
    assert side["sample_rate_hz"] == FS and side["truncated"] is False


def test_duration_capture_is_prefix(tmp_path):
    src = tmp_path / "src.rftrace"
    write_trace(make_trace(30_000), src)
    with StreamServer(src, frame_samples=1000) as server:
        th = serve_in_thread(server)
        tf = capture_stream("127.0.0.1", server.port, duration_s=12_345 / FS, out_path=tmp_path / "p.rftrace")
        th.join(5)
    full = read_trace_file(src).payload
    assert tf.truncated
    assert np.array_equal(tf.payload, full[:12_345])
    assert read_trace_file(tmp_path / "p.rftrace").truncated


class ScriptedServer:
    """Sends a handshake and a caller-supplied list of raw frames."""

    def __init__(self, frames, n_samples):
        self.sock = socket.create_server(("127.0.0.1", 0))
        self.port = self.sock.getsockname()[1]
        self.frames = frames
        self.n_samples = n_samples
        self.thread = threading.Thread(target=self.run, daemon=True)
        self.thread.start()

    def run(self):
        conn, _ = self.sock.accept()
        with conn:
            conn.sendall(encode_handshake({"sample_rate_hz": FS, "scale": 1.0, "n_samples": self.n_samples}))
            for f in self.frames:
                conn.sendall(f)
        self.sock.close()


def frames_of(n_frames, size=100):
    data = [np.full(size, k, dtype="<i2") for k in range(n_frames)]
    return data, [encode_frame(k, d) for k, d in enumerate(data)]


def test_corrupt_magic_in_third_frame(tmp_path):
    data, frames = frames_of(5)
    frames[2] = b"XXXX" + frames[2][4:]
    srv = ScriptedServer(frames, 500)
    out = tmp_path / "c.rftrace"
    with pytest.raises(MalformedFrame) as info:
        capture_stream("127.0.0.1", srv.port, out_path=out)
    assert info.value.partial_path == out
    tf = read_trace_file(out)
    assert tf.truncated
    assert np.array_equal(tf.payload, np.concatenate(data[:2]))


def test_sequence_gap_detected(tmp_path):
    data, frames = frames_of(4)
    del frames[1]
    srv = ScriptedServer(frames, 400)
    with pytest.raises(MalformedFrame, match="sequence"):
        capture_stream("127.0.0.1", srv.port, out_path=tmp_path / "g.rftrace")
    assert np.array_equal(read_trace_file(tmp_path / "g.rftrace").payload, data[0])


def test_oversize_frame_rejected():
    bogus = struct.pack("<4sII", b"RFSC", 0, 70_000)
    srv = ScriptedServer([bogus], 70_000)
    with pytest.raises(MalformedFrame):
        capture_stream("127.0.0.1", srv.port)


def test_early_close_is_connection_lost(tmp_path):
    data, frames = frames_of(2)
    srv = ScriptedServer(frames, 1000)
    with pytest.raises(ConnectionLost) as info:
        capture_stream("127.0.0.1", srv.port, out_path=tmp_path / "e.rftrace")
    tf = read_trace_file(info.value.partial_path)
    assert tf.truncated and tf.payload.size == 200


def test_corruption_aborts_deterministically(tmp_path):
    outcomes = []
    for k in range(3):
        _, frames = frames_of(5)
        frames[3] = frames[3][:4] + struct.pack("<I", 9) + frames[3][8:]
        srv = ScriptedServer(frames, 500)
        with pytest.raises(MalformedFrame) as info:
            capture_stream("127.0.0.1", srv.port, out_path=tmp_path / f"d{k}.rftrace")
        outcomes.append((str(info.value), (tmp_path / f"d{k}.rftrace").read_bytes()))
    assert outcomes[0] == outcomes[1] == outcomes[2]


def test_frame_size_limit():
    with pytest.raises(ValueError):
        encode_frame(0, np.zeros(65537, dtype="<i2"))
    assert len(encode_frame(0, np.zeros(65536, dtype="<i2"))) == 12 + 2 * 65536


def test_refused_connection():
    with socket.create_server(("127.0.0.1", 0)) as s:
        port = s.getsockname()[1]
    with pytest.raises(ConnectionRefusedError):
        capture_stream("127.0.0.1", port, timeout=2)
