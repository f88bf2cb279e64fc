"""Per-ion addressing pulse statistics in the layout of the published table."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .classify import MS, SINGLE

CSV_COLUMNS = (
    "ion",
    "x_dur_mean_us", "x_dur_sigma_us", "x_freq_mean_mhz", "x_freq_sigma_mhz",
    "ms_dur_mean_us", "ms_dur_sigma_us", "ms_freq_mean_mhz", "ms_freq_sigma_mhz",
)


@dataclass(frozen=True)
class PulseStats:
    count: int
    dur_mean_us: float
    dur_sigma_us: float
    freq_mean_mhz: float
    freq_sigma_mhz: float


@dataclass(frozen=True)
class StatsTable:
    entries: dict  # (ion, kind) -> PulseStats

    def get(self, ion: int, kind: str) -> PulseStats | None:
        return self.entries.get((ion, kind))

    @property
    def ions(self) -> list[int]:
        return sorted({ion for ion, _ in self.entries})

    @property
    def total_count(self) -> int:
        return sum(s.count for s in self.entries.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for ion in self.ions:
            row = [ion]
            for kind in (SINGLE, MS):
                s = self.get(ion, kind)
                if s is None:
                    row += [""] * 4
                else:
                    row += [f"{s.dur_mean_us:.4f}", f"{s.dur_sigma_us:.4f}",
                            f"{s.freq_mean_mhz:.6f}", f"{s.freq_sigma_mhz:.6f}"]
            w.writerow(row)
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [{"ion": ion, "kind": kind, **s.__dict__} for (ion, kind), s in sorted(self.entries.items())]
        return json.dumps(rows, indent=2)


def aggregate_stats(classified) -> StatsTable:
    """Mean and population sigma of duration/frequency per (ion, gate kind).

    ``classified`` is an iterable of per-shot event lists (a flat event
    list is accepted too).  An MS event contributes its own pulse to each
    participating ion.
    """
    samples: dict = {}
    for item in classified:
        events = [item] if hasattr(item, "kind") else item
        for ev in events:
            if ev.kind == MS:
                for ion, p in zip(ev.ions, ev.pulses):
                    samples.setdefault((ion, MS), []).append((p.duration_s, p.center_freq_hz))
            else:
                p = ev.pulses[0]
                samples.setdefault((ev.ions[0], SINGLE), []).append((p.duration_s, p.center_freq_hz))
    if not samples:
        raise ValueError("no classified pulses to aggregate")
    entries = {}
    for key in sorted(samples):
        arr = np.array(sorted(samples[key]))
        d, f = arr[:, 0] * 1e6, arr[:, 1] * 1e-6
        entries[key] = PulseStats(len(arr), float(d.mean()), float(d.std()), float(f.mean()), float(f.std()))
    return StatsTable(entries)
