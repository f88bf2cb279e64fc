"""Ion assignment and gate classification of region-B pulses."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..emitsim.config import DEFAULT_RABI, SAMPLE_RATE_HZ, TABLE_ONE_ALIAS_HZ
from ..sigproc import Pulse

SINGLE = "SingleQuditRotation"
MS = "MS"

# per-ion frequency spread of addressing pulses, X gates, in Hz
TABLE_ONE_FREQ_SIGMA_HZ = (0.0006e6, 0.045e6, 0.16e6)
DEFAULT_BIN_HZ = SAMPLE_RATE_HZ / 2048


@dataclass(frozen=True)
class AddressingTable:
    freqs_hz: tuple[float, ...]
    tolerances_hz: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "freqs_hz", tuple(float(f) for f in self.freqs_hz))
        object.__setattr__(self, "tolerances_hz", tuple(float(t) for t in self.tolerances_hz))
        if len(self.freqs_hz) != len(self.tolerances_hz):
            raise ValueError("one tolerance per ion required")
        order = np.argsort(self.freqs_hz)
        f = np.asarray(self.freqs_hz)[order]
        t = np.asarray(self.tolerances_hz)[order]
        for k in range(len(f) - 1):
            if f[k + 1] - f[k] <= 2 * max(t[k], t[k + 1]):
                raise ValueError(
                    f"addressing frequencies {f[k]:.0f} and {f[k + 1]:.0f} Hz are not separated "
                    "by more than twice their tolerance"
                )

    def __len__(self):
        return len(self.freqs_hz)

    @classmethod
    def from_measurements(cls, freqs_hz, sigmas_hz, bin_hz: float = DEFAULT_BIN_HZ) -> AddressingTable:
        """Tolerance per ion is ``max(3 sigma, one STFT bin)``."""
        return cls(tuple(freqs_hz), tuple(max(3 * s, bin_hz) for s in sigmas_hz))

    def extended(self, freqs_hz, bin_hz: float = DEFAULT_BIN_HZ) -> AddressingTable:
        """Append ions (e.g. decoys) at one-bin tolerance."""
        return AddressingTable(self.freqs_hz + tuple(freqs_hz), self.tolerances_hz + (bin_hz,) * len(freqs_hz))

    def to_dict(self) -> dict:
        return {"freqs_hz": list(self.freqs_hz), "tolerances_hz": list(self.tolerances_hz)}


def default_addressing_table(bin_hz: float = DEFAULT_BIN_HZ) -> AddressingTable:
    """Three-ion table from the published addressing statistics."""
    return AddressingTable.from_measurements(TABLE_ONE_ALIAS_HZ, TABLE_ONE_FREQ_SIGMA_HZ, bin_hz)


def assign_ions(pulses, table: AddressingTable) -> list[int | None]:
    """Nearest addressing frequency within tolerance, else None."""
    freqs = np.asarray(table.freqs_hz)
    tols = np.asarray(table.tolerances_hz)
    out = []
    for p in pulses:
        d = np.abs(freqs - p.center_freq_hz)
        ok = d <= tols
        if not ok.any():
            out.append(None)
            continue
        d = np.where(ok, d, np.inf)
        out.append(int(np.argmin(d)))
    return out


@dataclass(frozen=True)
class ClassifierConfig:
    """Calibration priors used to turn pulses into gate events.

    ``rabi_rad_per_s`` may hold one value per ion; the last entry covers
    ions beyond the list.
    """

    rabi_rad_per_s: tuple[float, ...] = (DEFAULT_RABI,)
    pad_s: float = 10e-6
    min_overlap: float = 0.5
    anomaly_duration_s: float = 100e-6
    anomaly_confidence_scale: float = 0.25

    def rabi_for(self, ion: int) -> float:
        r = self.rabi_rad_per_s
        return r[ion] if len(r) > ion else r[-1]


@dataclass(frozen=True)
class GateEvent:
    kind: str
    ions: tuple[int, ...]
    theta_est_rad: float | None
    t_start_s: float
    t_end_s: float
    confidence: float
    duration_anomalous: bool = False
    pulses: tuple[Pulse, ...] = field(default=(), repr=False, compare=False)

    @property
    def ion_set(self) -> frozenset:
        return frozenset(self.ions)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "ions": list(self.ions), "theta_est_rad": self.theta_est_rad,
                "t_start_s": self.t_start_s, "t_end_s": self.t_end_s, "confidence": self.confidence,
                "duration_anomalous": self.duration_anomalous}


def overlap_fraction(a: Pulse, b: Pulse) -> float:
    """Temporal overlap as a fraction of the shorter interval."""
    ov = min(a.t_end_s, b.t_end_s) - max(a.t_start_s, b.t_start_s)
    shorter = min(a.duration_s, b.duration_s)
    if ov < 0:
        return 0.0
    if shorter <= 0:
        # zero-length pulses overlap fully when they coincide
        return 1.0 if ov >= 0 else 0.0
    return min(ov / shorter, 1.0)


def classify_gates(shot, table: AddressingTable, cfg: ClassifierConfig | None = None) -> list[GateEvent]:
    """Gate events from the region-B pulses of a labelled shot.

    Two pulses on different ions overlapping by at least ``min_overlap`` of
    the shorter one form an MS event (confidence = overlap fraction).  Every
    other assigned pulse is a single-qudit rotation whose angle is
    estimated from its duration (confidence = closeness of the frequency
    match).  Pulses with no ion are ignored.
    """
    cfg = cfg or ClassifierConfig()
    pulses = [p for p, r in zip(shot.pulses, shot.region_labels) if r == "B"]
    ions = assign_ions(pulses, table)
    cand = [(p, i) for p, i in zip(pulses, ions) if i is not None]
    # canonical order so the outcome never depends on enumeration order
    cand.sort(key=lambda pi: (pi[0].t_start_s, pi[0].center_freq_hz, pi[0].t_end_s, pi[1]))

    pairs = []
    for a in range(len(cand)):
        for b in range(a + 1, len(cand)):
            pa, ia = cand[a]
            pb, ib = cand[b]
            if pb.t_start_s > pa.t_end_s:
                break
            if ia == ib:
                continue
            frac = overlap_fraction(pa, pb)
            if frac >= cfg.min_overlap:
                pairs.append((-frac, a, b))
    pairs.sort()

    used = set()
    events = []
    for neg_frac, a, b in pairs:
        if a in used or b in used:
            continue
        used.update((a, b))
        (pa, ia), (pb, ib) = cand[a], cand[b]
        first, second = (pa, pb) if ia < ib else (pb, pa)
        events.append(GateEvent(MS, tuple(sorted((ia, ib))), None,
                                min(pa.t_start_s, pb.t_start_s), max(pa.t_end_s, pb.t_end_s),
                                float(-neg_frac), False, (first, second)))
    for k, (p, ion) in enumerate(cand):
        if k in used:
            continue
        closeness = 1.0 - abs(p.center_freq_hz - table.freqs_hz[ion]) / table.tolerances_hz[ion]
        conf = float(np.clip(closeness, 0.0, 1.0))
        anomalous = p.duration_s > cfg.anomaly_duration_s
        if anomalous:
            conf *= cfg.anomaly_confidence_scale
        theta = cfg.rabi_for(ion) * max(p.duration_s - cfg.pad_s, 0.0)
        events.append(GateEvent(SINGLE, (ion,), theta, p.t_start_s, p.t_end_s, conf, anomalous, (p,)))
    events.sort(key=lambda e: (e.t_start_s, e.ions))
    return events
