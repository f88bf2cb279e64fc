"""Time-frequency pulse detection.

The pipeline is: STFT -> power spectrogram -> global threshold from the
time-averaged power profile -> binary mask -> 8-connected components ->
one pulse record per component.  Alias arithmetic for undersampled
acquisition lives here as well because it only needs the sampling rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy import fft as sfft
from scipy import ndimage

from .errors import InvalidBand, ShapeMismatch, TraceTooShort

DEFAULT_ALPHA = 4.0
AOM_BAND_HZ = (80e6, 250e6)

# frames transformed per FFT call; bounds the float64 scratch buffer
_FRAMES_PER_CHUNK = 2048


@dataclass(frozen=True)
class SampleTrace:
    """Uniformly sampled real-valued RF recording."""

    samples: np.ndarray
    sample_rate_hz: float
    start_time_s: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return self.start_time_s + np.arange(self.samples.size) / self.sample_rate_hz


@dataclass(frozen=True)
class StftConfig:
    segment_len: int = 2048
    overlap_len: int = 1024
    window: str = "hann"

    def __post_init__(self):
        if self.segment_len <= 0:
            raise ValueError("segment_len must be positive")
        if not 0 <= self.overlap_len < self.segment_len:
            raise ValueError("overlap_len must satisfy 0 <= overlap_len < segment_len")
        if self.window.lower() != "hann":
            raise ValueError(f"unsupported window {self.window!r}")

    @property
    def hop(self) -> int:
        return self.segment_len - self.overlap_len

    def window_array(self) -> np.ndarray:
        # symmetric Hann, N-1 denominator
        return np.hanning(self.segment_len)


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """One-sided complex STFT grid indexed ``values[f, t]``.

    Stored as complex64 to keep long captures in memory; power is
    computed in float64.
    """

    values: np.ndarray
    sample_rate_hz: float
    segment_len: int
    overlap_len: int
    origin_time_s: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2:
            raise ValueError("values must be a 2-D (frequency, time) grid")
        if not np.iscomplexobj(values):
            values = values.astype(np.complex128)
        object.__setattr__(self, "values", values)

    @property
    def bin_hz(self) -> float:
        return self.sample_rate_hz / self.segment_len

    @property
    def hop_s(self) -> float:
        return (self.segment_len - self.overlap_len) / self.sample_rate_hz

    @property
    def n_freq(self) -> int:
        return self.values.shape[0]

    @property
    def n_time(self) -> int:
        return self.values.shape[1]

    @cached_property
    def power(self) -> np.ndarray:
        v = self.values
        return v.real.astype(np.float64) ** 2 + v.imag.astype(np.float64) ** 2

    def freqs_hz(self) -> np.ndarray:
        return np.arange(self.n_freq) * self.bin_hz

    def frame_times_s(self) -> np.ndarray:
        return self.origin_time_s + np.arange(self.n_time) * self.hop_s


@dataclass(frozen=True)
class ThresholdStats:
    mu_per_freq: np.ndarray
    mu_bar: float
    sigma_mu: float
    alpha: float
    threshold: float


@dataclass(frozen=True)
class DetectionMask:
    bits: np.ndarray

    @property
    def shape(self):
        return self.bits.shape

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))


class Component(NamedTuple):
    """Cells of one connected component as parallel index arrays."""

    freq_idx: np.ndarray
    time_idx: np.ndarray

    @property
    def size(self) -> int:
        return int(self.freq_idx.size)

    def cells(self) -> frozenset:
        return frozenset(zip(self.freq_idx.tolist(), self.time_idx.tolist()))


@dataclass(frozen=True)
class Pulse:
    t_start_s: float
    t_end_s: float
    duration_s: float
    center_freq_hz: float
    peak_power: float = 0.0
    component_id: int = -1

    @property
    def sort_key(self):
        return (self.t_start_s, self.center_freq_hz)


def compute_stft(trace: SampleTrace, cfg: StftConfig | None = None) -> Spectrogram:
    """One-sided Hann-windowed STFT of ``trace``.

    Frame ``t`` covers samples ``[t*hop, t*hop + segment_len)``; trailing
    samples that do not fill a whole frame are dropped.

    Raises:
        TraceTooShort: if the trace holds fewer samples than one segment.
    """
    cfg = cfg or StftConfig()
    x = trace.samples
    n_seg, hop = cfg.segment_len, cfg.hop
    if x.size < n_seg:
        raise TraceTooShort(f"trace has {x.size} samples, need at least {n_seg}")
    n_time = 1 + (x.size - n_seg) // hop
    n_freq = n_seg // 2 + 1
    win = cfg.window_array()
    frames = np.lib.stride_tricks.as_strided(
        x, shape=(n_time, n_seg), strides=(hop * x.strides[0], x.strides[0]), writeable=False
    )
    out = np.empty((n_freq, n_time), dtype=np.complex64)
    for lo in range(0, n_time, _FRAMES_PER_CHUNK):
        hi = min(lo + _FRAMES_PER_CHUNK, n_time)
        out[:, lo:hi] = sfft.rfft(frames[lo:hi] * win, axis=1).T
    return Spectrogram(out, trace.sample_rate_hz, n_seg, cfg.overlap_len, trace.start_time_s)


def compute_threshold(spec: Spectrogram, alpha: float = DEFAULT_ALPHA) -> ThresholdStats:
    """Global detection threshold ``mu_bar + alpha * sigma_mu``.

    ``mu_per_freq`` is the time-averaged power of each bin; ``mu_bar`` and
    ``sigma_mu`` are its mean and population standard deviation across bins.
    """
    power = spec.power
    if power.size == 0:
        raise ValueError("empty spectrogram")
    mu = power.mean(axis=1)
    mu_bar = float(mu.mean())
    sigma_mu = float(np.sqrt(np.mean((mu - mu_bar) ** 2)))
    return ThresholdStats(mu, mu_bar, sigma_mu, float(alpha), mu_bar + alpha * sigma_mu)


def apply_threshold(spec: Spectrogram, stats: ThresholdStats) -> DetectionMask:
    if np.shape(stats.mu_per_freq) != (spec.n_freq,):
        raise ShapeMismatch(
            f"threshold stats cover {np.size(stats.mu_per_freq)} bins, spectrogram has {spec.n_freq}"
        )
    return DetectionMask(spec.power > stats.threshold)


_EIGHT = np.ones((3, 3), dtype=bool)


def label_components(mask: DetectionMask | np.ndarray, min_cells: int = 1) -> list[Component]:
    """Maximal 8-connected components of the set bits.

    Components are ordered by (min time index, min frequency index).
    Components smaller than ``min_cells`` are discarded.
    """
    bits = mask.bits if isinstance(mask, DetectionMask) else np.asarray(mask, dtype=bool)
    if bits.size == 0 or not bits.any():
        return []
    labels, n = ndimage.label(bits, structure=_EIGHT)
    flat = np.flatnonzero(labels)
    lab = labels.ravel()[flat]
    order = np.argsort(lab, kind="stable")
    flat, lab = flat[order], lab[order]
    bounds = np.flatnonzero(np.diff(lab)) + 1
    n_time = bits.shape[1]
    comps = []
    for chunk in np.split(flat, bounds):
        if chunk.size < min_cells:
            continue
        f_idx, t_idx = np.divmod(chunk, n_time)
        comps.append(Component(f_idx, t_idx))
    comps.sort(key=lambda c: (int(c.time_idx.min()), int(c.freq_idx.min())))
    return comps


def extract_pulses(spec: Spectrogram, components: Sequence[Component]) -> list[Pulse]:
    """Convert components to pulse records.

    Start/end come from the extreme frame indices, the centre frequency is
    the power-weighted mean bin frequency.  Output is sorted by
    (t_start, center_freq).
    """
    power = spec.power
    hop, bin_hz, t0 = spec.hop_s, spec.bin_hz, spec.origin_time_s
    pulses = []
    for cid, comp in enumerate(components):
        p = power[comp.freq_idx, comp.time_idx]
        total = p.sum()
        if total > 0:
            fc = float(np.dot(p, comp.freq_idx) / total) * bin_hz
        else:
            fc = float(comp.freq_idx.mean()) * bin_hz
        ts = t0 + int(comp.time_idx.min()) * hop
        te = t0 + int(comp.time_idx.max()) * hop
        pulses.append(Pulse(ts, te, te - ts, fc, float(p.max()), cid))
    pulses.sort(key=lambda q: q.sort_key)
    return pulses


@dataclass
class Detection:
    """Everything produced by one pass of :func:`detect_pulses`."""

    spectrogram: Spectrogram
    stats: ThresholdStats
    mask: DetectionMask
    components: list[Component]
    pulses: list[Pulse]


def detect_pulses(
    trace: SampleTrace,
    cfg: StftConfig | None = None,
    alpha: float = DEFAULT_ALPHA,
    min_cells: int = 1,
) -> Detection:
    spec = compute_stft(trace, cfg)
    stats = compute_threshold(spec, alpha)
    mask = apply_threshold(spec, stats)
    comps = label_components(mask, min_cells=min_cells)
    return Detection(spec, stats, mask, comps, extract_pulses(spec, comps))


def fold_frequency(f_sig_hz: float, f_s_hz: float) -> float:
    """Alias of a real tone at ``f_sig_hz`` sampled at ``f_s_hz``, in [0, f_s/2]."""
    r = np.mod(f_sig_hz, f_s_hz)
    return float(min(r, f_s_hz - r))


def dealias_candidates(
    f_alias_hz: float,
    f_s_hz: float,
    k_max: int = 3,
    band: tuple[float, float] = AOM_BAND_HZ,
) -> list[float]:
    """All distinct ``|k*f_s +/- f_alias|`` for ``k = 0..k_max`` inside ``band``, ascending."""
    low, high = band
    if low > high:
        raise InvalidBand(f"band low {low} exceeds high {high}")
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    if not 0 <= f_alias_hz <= f_s_hz / 2:
        raise ValueError(f"alias frequency {f_alias_hz} outside [0, f_s/2]")
    found = set()
    for k in range(k_max + 1):
        for f in (abs(k * f_s_hz + f_alias_hz), abs(k * f_s_hz - f_alias_hz)):
            if low <= f <= high:
                found.add(f)
    return sorted(found)
