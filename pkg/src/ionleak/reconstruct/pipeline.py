"""Trace-to-gates analysis pipeline."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..sigproc import DEFAULT_ALPHA, Detection, SampleTrace, StftConfig, detect_pulses
from .classify import AddressingTable, ClassifierConfig, GateEvent, classify_gates, default_addressing_table
from .shots import DEFAULT_GAP_THRESHOLD_S, BaselineProfile, Shot, label_regions, profile_baseline, segment_shots
from .stats import StatsTable, aggregate_stats


@dataclass
class Analysis:
    detection: Detection
    shots: list[Shot]
    events: list[list[GateEvent]]
    stats: StatsTable | None

    @property
    def pulses(self):
        return self.detection.pulses

    def gate_sequence(self, shot: int) -> list[tuple[str, frozenset]]:
        return [("MS" if e.kind == "MS" else "R", e.ion_set) for e in self.events[shot]]


def analyze_trace(
    trace: SampleTrace,
    *,
    alpha: float = DEFAULT_ALPHA,
    gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S,
    profile: BaselineProfile | None = None,
    table: AddressingTable | None = None,
    classifier: ClassifierConfig | None = None,
    stft: StftConfig | None = None,
    min_cells: int = 1,
) -> Analysis:
    """Detect pulses, split shots, label regions and classify gates.

    Without a baseline profile every pulse is treated as region B; preamble
    and readout tones then drop out only because they match no ion.
    """
    det = detect_pulses(trace, stft, alpha, min_cells)
    table = table or default_addressing_table(det.spectrogram.bin_hz)
    shots = segment_shots(det.pulses, gap_threshold_s)
    if profile is not None:
        shots = [label_regions(s, profile) for s in shots]
    else:
        shots = [replace(s, region_labels=("B",) * len(s.pulses)) for s in shots]
    events = [classify_gates(s, table, classifier) for s in shots]
    stats = aggregate_stats(events) if any(events) else None
    return Analysis(det, shots, events, stats)


def profile_from_trace(
    trace: SampleTrace,
    *,
    alpha: float = DEFAULT_ALPHA,
    gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S,
    stft: StftConfig | None = None,
    min_occurrence: float = 0.8,
) -> BaselineProfile:
    """Baseline profile from a multi-shot empty-circuit recording."""
    det = detect_pulses(trace, stft, alpha)
    shots = segment_shots(det.pulses, gap_threshold_s)
    spec = det.spectrogram
    return profile_baseline(shots, spec.bin_hz, spec.hop_s, min_occurrence)
