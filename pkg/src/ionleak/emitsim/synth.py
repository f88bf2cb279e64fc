"""Circuit-to-emission synthesis.

A shot is laid out as: preamble template (cooling/preparation), gates,
readout template, then a silent inter-shot gap.  Every pulse is a
constant-amplitude tone with raised-cosine edges generated at its true
frequency and sampled directly, so tones above Nyquist alias naturally.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConfigInvalid
from ..sigproc import SampleTrace, fold_frequency
from .circuit import CircuitSpec, NativeGate
from .config import DecoyConfig, EmissionConfig, _per_ion

DECOY_ANGLES = (math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi)
DECOY_LEVELS = 3


@dataclass
class TruthPulse:
    """One emitted tone.  MS gates produce two of these with equal times."""

    t_start_s: float
    t_end_s: float
    freq_hz: float
    alias_hz: float
    region: str
    kind: str
    ion: int | None = None
    gate_ions: tuple[int, ...] = ()
    gate_index: int | None = None
    decoy: bool = False
    emitted: bool = True


@dataclass
class ShotTruth:
    index: int
    t_start_s: float
    t_end_s: float
    regions: dict
    pulses: list[TruthPulse] = field(default_factory=list)

    def region_pulses(self, region: str, emitted_only: bool = True) -> list[TruthPulse]:
        return [p for p in self.pulses if p.region == region and (p.emitted or not emitted_only)]


@dataclass
class GroundTruth:
    sample_rate_hz: float
    n_samples: int
    shots: list[ShotTruth]
    circuit: CircuitSpec

    def to_dict(self) -> dict:
        return {
            "sample_rate_hz": self.sample_rate_hz,
            "n_samples": self.n_samples,
            "circuit": self.circuit.to_dict(),
            "shots": [
                {"index": s.index, "t_start_s": s.t_start_s, "t_end_s": s.t_end_s,
                 "regions": {k: list(v) if v else None for k, v in s.regions.items()},
                 "pulses": [{**asdict(p), "gate_ions": list(p.gate_ions)} for p in s.pulses]}
                for s in self.shots
            ],
        }

    def gate_sequence(self, shot: int = 0) -> list[tuple[str, frozenset]]:
        """(kind, ion set) of every region-B gate in time order, MS counted once."""
        seen, seq = set(), []
        for p in self.shots[shot].pulses:
            if p.region != "B" or p.gate_index is None or p.gate_index in seen:
                continue
            seen.add(p.gate_index)
            seq.append(("MS" if p.kind == "MS" else "R", frozenset(p.gate_ions)))
        return seq


def duration_for(gate: NativeGate, cfg: EmissionConfig) -> float:
    """Nominal addressing-pulse duration of ``gate`` in seconds.

    Rotations last ``theta / Omega + pad`` with the Rabi frequency of the
    addressed ion; MS uses the configured per-pair constant.
    """
    if gate.kind == "MS":
        return cfg.ms_duration_for(gate.ions)
    return gate.theta_rad / cfg.rabi_for(gate.ions[0]) + cfg.pad_s


def apply_decoys(circuit: CircuitSpec, decoy: DecoyConfig, seed=None) -> CircuitSpec:
    """Interleave random plausible gates on extra decoy ions.

    Decoy ions get indices ``n_ions .. n_ions + n_decoys - 1``.  The number
    of inserted gates is ``round(gate_rate * len(gates))``; they occupy
    uniformly random slots while the computational gates keep their order.
    """
    n_new = int(round(decoy.gate_rate * len(circuit.gates)))
    if n_new == 0:
        return circuit
    rng = np.random.default_rng(decoy.rng_seed if seed is None else seed)
    decoy_ions = list(range(circuit.n_ions, circuit.n_ions + decoy.n_decoys))
    total = len(circuit.gates) + n_new
    slots = set(rng.choice(total, size=n_new, replace=False).tolist())
    comp = iter(circuit.gates)
    gates = []
    for k in range(total):
        if k not in slots:
            gates.append(next(comp))
            continue
        use_ms = len(decoy_ions) >= 2 and rng.random() < 1 / 3
        i, j = sorted(rng.choice(DECOY_LEVELS, size=2, replace=False).tolist())
        if use_ms:
            a, b = sorted(rng.choice(decoy_ions, size=2, replace=False).tolist())
            gates.append(NativeGate("MS", (a, b), level_i=i, level_j=j, decoy=True))
        else:
            ion = int(rng.choice(decoy_ions))
            kind = "Rx" if rng.random() < 0.5 else "Ry"
            theta = float(rng.choice(DECOY_ANGLES))
            gates.append(NativeGate(kind, (ion,), theta, i, j, decoy=True))
    return CircuitSpec(circuit.n_ions + decoy.n_decoys, gates, circuit.n_shots)


def _raised_cosine_envelope(n: int, edge: int) -> np.ndarray:
    env = np.ones(n)
    edge = min(edge, n // 2)
    if edge > 0:
        ramp = 0.5 * (1 - np.cos(np.pi * (np.arange(edge) + 0.5) / edge))
        env[:edge] = ramp
        env[n - edge:] = ramp[::-1]
    return env


def _add_tone(x, fs, t0, t1, freq, amp, phase, edge_s):
    i0, i1 = int(round(t0 * fs)), int(round(t1 * fs))
    i1 = min(i1, x.size)
    if i1 <= i0:
        return
    n = np.arange(i0, i1, dtype=np.float64)
    cycles = np.mod(n * (freq / fs), 1.0)
    x[i0:i1] += amp * _raised_cosine_envelope(i1 - i0, int(round(edge_s * fs))) * np.cos(2 * np.pi * cycles + phase)


def _schedule(circuit: CircuitSpec, cfg: EmissionConfig, rng: np.random.Generator):
    low, high = cfg.bandpass_hz
    fs = cfg.sample_rate_hz
    min_dur = 2.0 / fs

    def tone(t0, dur, freq, region, kind, **kw):
        return TruthPulse(t0, t0 + dur, freq, fold_frequency(freq, fs), region, kind,
                          emitted=low <= freq <= high, **kw)

    shots = []
    cursor = cfg.lead_in_s
    for s in range(circuit.n_shots):
        shot_start = cursor
        pulses, regions = [], {}

        def template(entries, region, kind):
            nonlocal cursor
            t_begin = cursor
            for k, (f, d) in enumerate(entries):
                if k:
                    cursor += cfg.template_gap_s
                pulses.append(tone(cursor, d, f, region, kind))
                cursor += d
            regions[region] = (t_begin, cursor) if entries else None

        template(cfg.region_a_template, "A", "preamble")
        if circuit.gates:
            cursor += cfg.region_gap_s
            b_begin = cursor
            for gi, gate in enumerate(circuit.gates):
                if gi:
                    cursor += cfg.gate_gap_s
                dur = duration_for(gate, cfg)
                if gate.kind == "MS":
                    sig = cfg.ms_duration_sigma_s.get(tuple(sorted(gate.ions)), 0.0)
                else:
                    sig = _per_ion(cfg.duration_sigma_s, gate.ions[0])
                if sig > 0:
                    dur = max(dur + sig * rng.standard_normal(), min_dur)
                for ion in gate.ions:
                    f = cfg.addressing_freq_hz[ion]
                    fsig = _per_ion(cfg.freq_sigma_hz, ion)
                    if fsig > 0:
                        f += fsig * rng.standard_normal()
                    pulses.append(tone(cursor, dur, f, "B", gate.kind, ion=ion, gate_ions=gate.ions,
                                       gate_index=gi, decoy=gate.decoy))
                if cfg.prep_amplitude > 0 and gate.kind != "MS":
                    idx = gate.level_i * DECOY_LEVELS + gate.level_j
                    pulses.append(tone(cursor, dur, cfg.prep_freq_hz + idx * cfg.prep_step_hz, "B", "prep",
                                       ion=gate.ions[0], gate_ions=gate.ions, gate_index=gi, decoy=gate.decoy))
                cursor += dur
            regions["B"] = (b_begin, cursor)
        else:
            regions["B"] = None
        cursor += cfg.region_gap_s
        template(cfg.region_c_template, "C", "readout")
        shots.append(ShotTruth(s, shot_start, cursor, regions, pulses))
        cursor += cfg.shot_gap_s
    return shots, cursor


def synthesize(circuit: CircuitSpec, cfg: EmissionConfig | None = None, seed: int = 0):
    """Render ``circuit`` to a sampled RF trace.

    Returns ``(SampleTrace, GroundTruth)``.  Output is a deterministic
    function of ``(circuit, cfg, seed)``.

    Raises:
        ConfigInvalid: if the circuit addresses an ion with no configured
            addressing frequency.
    """
    cfg = cfg or EmissionConfig()
    if cfg.decoy is not None:
        circuit = apply_decoys(circuit, cfg.decoy)
    if circuit.n_ions > cfg.n_addressable:
        raise ConfigInvalid(f"circuit uses {circuit.n_ions} ions but only {cfg.n_addressable} "
                            "addressing frequencies are configured")
    sched_ss, phase_ss, noise_ss, inject_ss = np.random.SeedSequence(seed).spawn(4)
    shots, t_total = _schedule(circuit, cfg, np.random.default_rng(sched_ss))
    fs = cfg.sample_rate_hz
    n = int(math.ceil(t_total * fs))
    x = np.zeros(n)
    phase_rng = np.random.default_rng(phase_ss)
    for shot in shots:
        for p in shot.pulses:
            phase = phase_rng.uniform(0, 2 * np.pi)
            if not p.emitted:
                continue
            amp = cfg.prep_amplitude if p.kind == "prep" else cfg.amplitude
            _add_tone(x, fs, p.t_start_s, p.t_end_s, p.freq_hz, amp, phase, cfg.edge_s)
    if cfg.noise_sigma > 0:
        x += cfg.noise_sigma * np.random.default_rng(noise_ss).standard_normal(n)
    trace = SampleTrace(x, fs, 0.0)
    for (lo, hi, power), ss in zip(cfg.inject_noise, inject_ss.spawn(len(cfg.inject_noise))):
        trace = inject_interference(trace, [(lo, hi)], power, seed=ss)
    return trace, GroundTruth(fs, n, shots, circuit)


def inject_interference(trace: SampleTrace, bands, power: float, seed=0,
                        duty: float = 1.0, burst_s: float = 200e-6) -> SampleTrace:
    """Add band-limited Gaussian noise bursts to ``trace``.

    ``bands`` are (low, high) ranges in the sampled band [0, f_s/2].
    ``power`` is the mean-square noise amplitude while a burst is on.
    With ``duty < 1`` the noise is gated into bursts of ``burst_s``
    seconds placed at random, covering about ``duty`` of the trace.
    """
    if power <= 0 or not bands:
        return trace
    fs = trace.sample_rate_hz
    n = len(trace)
    rng = np.random.default_rng(seed)
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1 / fs)
    keep = np.zeros(freqs.size, dtype=bool)
    for lo, hi in bands:
        if not 0 <= lo < hi <= fs / 2 + 1e-9:
            raise ValueError(f"band ({lo}, {hi}) outside [0, f_s/2]")
        keep |= (freqs >= lo) & (freqs <= hi)
    spectrum[~keep] = 0
    noise = np.fft.irfft(spectrum, n)
    del spectrum
    rms = np.sqrt(np.mean(noise**2))
    if rms > 0:
        noise *= np.sqrt(power) / rms
    if duty < 1:
        gate = np.zeros(n, dtype=bool)
        burst = max(1, int(round(burst_s * fs)))
        n_bursts = int(round(duty * n / burst))
        for start in rng.integers(0, max(1, n - burst), size=n_bursts):
            gate[start:start + burst] = True
        noise[~gate] = 0
    return SampleTrace(trace.samples + noise, fs, trace.start_time_s)
