"""16-bit trace files: ``<name>.rftrace`` payload plus ``<name>.rftrace.json`` sidecar.

The payload is little-endian signed 16-bit, single channel.  The sidecar
holds ``sample_rate_hz``, ``start_time_s``, ``scale`` (amplitude units per
ADC step), ``description``, ``n_samples`` and, for captures, ``truncated``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..sigproc import SampleTrace

FULL_SCALE = 32767
PAYLOAD_DTYPE = np.dtype("<i2")


@dataclass
class TraceFile:
    payload: np.ndarray
    sidecar: dict = field(default_factory=dict)

    @property
    def sample_rate_hz(self) -> float:
        return float(self.sidecar["sample_rate_hz"])

    @property
    def scale(self) -> float:
        return float(self.sidecar.get("scale", 1.0))

    @property
    def truncated(self) -> bool:
        return bool(self.sidecar.get("truncated", False))

    def to_trace(self) -> SampleTrace:
        return SampleTrace(self.payload.astype(np.float64) * self.scale, self.sample_rate_hz,
                           float(self.sidecar.get("start_time_s", 0.0)))

    def payload_bytes(self) -> bytes:
        return self.payload.astype(PAYLOAD_DTYPE, copy=False).tobytes()


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def quantize(trace: SampleTrace, scale: float | None = None, description: str = "") -> tuple[TraceFile, int]:
    """Scale to 16 bits; returns the file image and the number of clipped samples.

    The default scale maps the largest magnitude to full scale; an all-zero
    trace gets scale 1.
    """
    x = trace.samples
    if x.size == 0:
        raise DataError("cannot store a zero-length trace")
    if not np.all(np.isfinite(x)):
        raise DataError("trace contains non-finite samples")
    if scale is None:
        peak = float(np.max(np.abs(x)))
        scale = peak / FULL_SCALE if peak > 0 else 1.0
    if not scale > 0:
        raise DataError("scale must be positive")
    q = np.rint(x / scale)
    clipped = int(np.count_nonzero((q > FULL_SCALE) | (q < -FULL_SCALE)))
    q = np.clip(q, -FULL_SCALE, FULL_SCALE).astype(PAYLOAD_DTYPE)
    sidecar = {"sample_rate_hz": trace.sample_rate_hz, "start_time_s": trace.start_time_s,
               "scale": scale, "description": description, "n_samples": int(q.size)}
    return TraceFile(q, sidecar), clipped


def write_trace_file(tf: TraceFile, path) -> None:
    path = Path(path)
    if not tf.sidecar.get("sample_rate_hz", 0) > 0:
        raise DataError("sidecar sample_rate_hz must be positive")
    sidecar = {**tf.sidecar, "n_samples": int(tf.payload.size)}
    path.write_bytes(tf.payload_bytes())
    sidecar_path(path).write_text(json.dumps(sidecar, indent=2) + "\n")


def write_trace(trace: SampleTrace, path, scale: float | None = None, description: str = "") -> int:
    """Store ``trace``; returns the clip count (0 unless an explicit scale is too small)."""
    tf, clipped = quantize(trace, scale, description)
    write_trace_file(tf, path)
    return clipped


def read_trace_file(path) -> TraceFile:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) % 2:
        raise DataError(f"{path}: payload length {len(raw)} is not a whole number of 16-bit samples")
    try:
        sidecar = json.loads(sidecar_path(path).read_text())
    except FileNotFoundError:
        raise DataError(f"{path}: missing sidecar {sidecar_path(path).name}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed sidecar ({exc})") from None
    if not float(sidecar.get("sample_rate_hz", 0)) > 0:
        raise DataError(f"{path}: sidecar sample_rate_hz must be positive")
    return TraceFile(np.frombuffer(raw, dtype=PAYLOAD_DTYPE).copy(), sidecar)


def read_trace(path) -> SampleTrace:
    return read_trace_file(path).to_trace()
