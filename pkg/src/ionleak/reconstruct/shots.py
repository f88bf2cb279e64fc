"""Shot segmentation, empty-circuit baseline profiling, region labels."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import InsufficientShots
from ..sigproc import Pulse

REGIONS = ("A", "B", "C", "Unknown")
DEFAULT_GAP_THRESHOLD_S = 1e-3


@dataclass(frozen=True)
class Shot:
    index: int
    pulses: tuple[Pulse, ...]
    t_start_s: float
    t_end_s: float
    region_labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        labels = tuple(self.region_labels) or ("Unknown",) * len(self.pulses)
        if len(labels) != len(self.pulses):
            raise ValueError("one region label per pulse required")
        object.__setattr__(self, "region_labels", labels)

    def in_region(self, region: str) -> list[Pulse]:
        return [p for p, r in zip(self.pulses, self.region_labels) if r == region]


def segment_shots(pulses, gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S) -> list[Shot]:
    """Split a time-sorted pulse list wherever the idle time exceeds the threshold.

    Idle time is measured from the latest end seen so far to the next
    start, so overlapping (concurrent) pulses never open a spurious gap.
    """
    pulses = sorted(pulses, key=lambda p: p.sort_key)
    groups, current, last_end = [], [], None
    for p in pulses:
        if current and p.t_start_s - last_end > gap_threshold_s:
            groups.append(current)
            current = []
        if not current:
            last_end = p.t_end_s
        current.append(p)
        last_end = max(last_end, p.t_end_s)
    if current:
        groups.append(current)
    return [Shot(k, g, g[0].t_start_s, max(p.t_end_s for p in g)) for k, g in enumerate(groups)]


def shot_gaps(shots) -> np.ndarray:
    """Idle time between consecutive shots."""
    return np.array([b.t_start_s - a.t_end_s for a, b in zip(shots, shots[1:])])


@dataclass(frozen=True)
class TemplatePulse:
    center_freq_hz: float
    duration_s: float
    offset_s: float  # start relative to the shot start
    freq_tol_hz: float
    duration_tol_s: float
    occurrence: float  # fraction of profiled shots containing it

    def matches_freq(self, pulse: Pulse) -> bool:
        return abs(pulse.center_freq_hz - self.center_freq_hz) <= self.freq_tol_hz

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class BaselineProfile:
    preamble_pulses: tuple[TemplatePulse, ...]
    readout_pulses: tuple[TemplatePulse, ...]
    n_shots: int = 0

    @property
    def preamble_span_s(self) -> float:
        if not self.preamble_pulses:
            return 0.0
        last = max(self.preamble_pulses, key=lambda t: t.offset_s + t.duration_s)
        return last.offset_s + last.duration_s + last.duration_tol_s

    @property
    def readout_span_s(self) -> float:
        if not self.readout_pulses:
            return 0.0
        first = min(t.offset_s for t in self.readout_pulses)
        end = max(t.offset_s + t.duration_s for t in self.readout_pulses)
        tol = max(t.duration_tol_s for t in self.readout_pulses)
        return end - first + tol

    def to_dict(self) -> dict:
        return {"n_shots": self.n_shots,
                "preamble_pulses": [t.to_dict() for t in self.preamble_pulses],
                "readout_pulses": [t.to_dict() for t in self.readout_pulses]}

    @classmethod
    def from_dict(cls, doc: dict) -> BaselineProfile:
        return cls(tuple(TemplatePulse(**t) for t in doc["preamble_pulses"]),
                   tuple(TemplatePulse(**t) for t in doc["readout_pulses"]),
                   int(doc.get("n_shots", 0)))


@dataclass
class _Cluster:
    freq: float
    dur: float
    members: list = field(default_factory=list)  # (shot index, pulse)


def profile_baseline(
    shots,
    bin_hz: float,
    hop_s: float,
    min_occurrence: float = 0.8,
) -> BaselineProfile:
    """Learn the circuit-independent preamble/readout pattern from empty-circuit shots.

    Pulses are clustered on (centre frequency, duration, occurrence rank
    within the shot).  Clusters present in at least ``min_occurrence`` of
    the shots form the template, which is split at its longest internal
    idle gap into preamble and readout parts.

    Raises:
        InsufficientShots: with fewer than three shots.
    """
    shots = list(shots)
    if len(shots) < 3:
        raise InsufficientShots(f"baseline profiling needs >= 3 shots, got {len(shots)}")
    f_tol, d_tol = bin_hz, 2 * hop_s

    clusters: list[_Cluster] = []
    for s_idx, shot in enumerate(shots):
        for p in shot.pulses:
            for c in clusters:
                if abs(p.center_freq_hz - c.freq) <= f_tol and abs(p.duration_s - c.dur) <= d_tol:
                    break
            else:
                c = _Cluster(p.center_freq_hz, p.duration_s)
                clusters.append(c)
            c.members.append((s_idx, p))

    # split clusters by occurrence rank so a pulse repeated within a shot
    # becomes several template entries
    entries = []
    for c in clusters:
        by_rank: dict[int, list] = {}
        seen: dict[int, int] = {}
        for s_idx, p in sorted(c.members, key=lambda m: (m[0], m[1].t_start_s)):
            rank = seen.get(s_idx, 0)
            seen[s_idx] = rank + 1
            by_rank.setdefault(rank, []).append((s_idx, p))
        for members in by_rank.values():
            frac = len({s for s, _ in members}) / len(shots)
            if frac < min_occurrence:
                continue
            f = np.array([p.center_freq_hz for _, p in members])
            d = np.array([p.duration_s for _, p in members])
            off = np.array([p.t_start_s - shots[s].t_start_s for s, p in members])
            entries.append(TemplatePulse(
                float(f.mean()), float(d.mean()), float(np.median(off)),
                float(max(3 * f.std(), bin_hz)), float(max(3 * d.std(), d_tol)), frac,
            ))
    entries.sort(key=lambda t: (t.offset_s, t.center_freq_hz))
    if len(entries) < 2:
        return BaselineProfile(tuple(entries), (), len(shots))

    ends = np.maximum.accumulate([t.offset_s + t.duration_s for t in entries])
    gaps = np.array([entries[k + 1].offset_s - ends[k] for k in range(len(entries) - 1)])
    cut = int(np.argmax(gaps)) + 1
    return BaselineProfile(tuple(entries[:cut]), tuple(entries[cut:]), len(shots))


def label_regions(shot: Shot, profile: BaselineProfile) -> Shot:
    """Mark preamble (A), gate (B) and readout (C) pulses of one shot.

    A pulse is A when it lies in the shot's leading window (the profiled
    preamble span) and its frequency matches a preamble template; C is the
    mirror image at the trailing end.  Everything else is B.
    """
    lead_end = shot.t_start_s + profile.preamble_span_s
    trail_start = shot.t_end_s - profile.readout_span_s
    labels = []
    for p in shot.pulses:
        if p.t_end_s <= lead_end and any(t.matches_freq(p) for t in profile.preamble_pulses):
            labels.append("A")
        elif p.t_start_s >= trail_start and any(t.matches_freq(p) for t in profile.readout_pulses):
            labels.append("C")
        else:
            labels.append("B")
    return replace(shot, region_labels=tuple(labels))
