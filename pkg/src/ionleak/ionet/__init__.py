"""Trace persistence and stream replay/capture."""

from .stream import (
    HEADER,
    MAGIC,
    MAX_FRAME_SAMPLES,
    StreamServer,
    capture_stream,
    encode_frame,
    encode_handshake,
    serve_stream,
)
from .tracefile import TraceFile, quantize, read_trace, read_trace_file, sidecar_path, write_trace, write_trace_file
