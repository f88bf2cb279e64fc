import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionleak.emitsim import (
    MS,
    X,
    Y,
    CircuitSpec,
    DecoyConfig,
    EmissionConfig,
    NativeGate,
    apply_decoys,
    circuit_from_dict,
    config_from_text,
    config_to_text,
    duration_for,
    empty_circuit,
    inject_interference,
    load_circuit,
    load_config,
    save_circuit,
    save_config,
    synthesize,
    x_sweep_circuit,
)
from ionleak.errors import ConfigInvalid
from ionleak.sigproc import SampleTrace, compute_stft, detect_pulses
from oracles import matched_recall

FS = 122.88e6


def is_subsequence(short, long):
    it = iter(long)
    return all(any(x == y for y in it) for x in short)


# --- durations --------------------------------------------------------------

def test_pi_pulse_duration_without_pad():
    cfg = EmissionConfig(pad_s=0.0)
    assert duration_for(X(0), cfg) == pytest.approx(40e-6)
    assert duration_for(Y(2), cfg) == pytest.approx(40e-6)


def test_half_pi_with_default_pad():
    gate = NativeGate("Rx", (1,), math.pi / 2)
    assert duration_for(gate, EmissionConfig()) == pytest.approx(20e-6 + 10e-6)


def test_ms_durations_are_configured_constants():
    cfg = EmissionConfig()
    assert duration_for(MS(0, 1), cfg) == pytest.approx(232.5e-6)
    assert duration_for(MS(2, 0), cfg) == pytest.approx(229.9e-6)
    assert duration_for(MS(1, 2), cfg) == pytest.approx(222.3e-6)
    assert duration_for(MS(3, 4), cfg) == pytest.approx(230e-6)


def test_per_ion_rabi():
    cfg = EmissionConfig(rabi_rad_per_s=(math.pi / 40e-6, math.pi / 20e-6), pad_s=0.0)
    assert duration_for(X(0), cfg) == pytest.approx(40e-6)
    assert duration_for(X(1), cfg) == pytest.approx(20e-6)
    assert duration_for(X(2), cfg) == pytest.approx(20e-6)


# --- circuit model ------------------------------------------------------------

def test_gate_validation():
    with pytest.raises(ConfigInvalid):
        NativeGate("CZ", (0, 1))
    with pytest.raises(ConfigInvalid):
        NativeGate("MS", (1, 1))
    with pytest.raises(ConfigInvalid):
        NativeGate("Rx", (0,), level_i=2, level_j=1)
    with pytest.raises(ConfigInvalid):
        CircuitSpec(2, (X(2),))
    assert NativeGate("MS", (0, 1), theta_rad=1.0).theta_rad == pytest.approx(math.pi / 2)


def test_circuit_file_round_trip(tmp_path):
    circ = CircuitSpec(3, (X(0), Y(1), MS(0, 2), NativeGate("Rx", (2,), 1.25, 1, 2)), n_shots=4)
    save_circuit(circ, tmp_path / "c.json")
    assert load_circuit(tmp_path / "c.json") == circ


@pytest.mark.parametrize("doc", [
    {"n_ions": 3, "gates": [], "colour": "red"},
    {"n_ions": "3"},
    {"n_ions": 3, "gates": [{"kind": "Rx", "ions": [0], "speed": 1}]},
    {"n_ions": 3, "gates": [{"kind": "Rx"}]},
    [1, 2],
])
def test_circuit_schema_errors(doc):
    with pytest.raises(ConfigInvalid):
        circuit_from_dict(doc)


def test_invalid_json_file(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigInvalid):
        load_circuit(tmp_path / "bad.json")


# --- emission config ---------------------------------------------------------

def test_config_text_round_trip(tmp_path):
    cfg = EmissionConfig(noise_sigma=0.02, pad_s=1e-6, duration_sigma_s=(1e-6, 2e-6, 3e-6),
                         ms_duration_sigma_s={(0, 1): 4e-6}, decoy=DecoyConfig(3, 5, 0.5),
                         inject_noise=((1e6, 2e6, 0.1),))
    save_config(cfg, tmp_path / "e.cfg")
    assert load_config(tmp_path / "e.cfg") == cfg
    assert config_from_text(config_to_text(EmissionConfig())) == EmissionConfig()


def test_config_unknown_key():
    with pytest.raises(ConfigInvalid):
        config_from_text("noise_sigma = 0.1\nwarp_factor = 9\n")


def test_config_rejects_short_shot_gap():
    with pytest.raises(ConfigInvalid):
        EmissionConfig(shot_gap_s=100e-6)


def test_default_aliases_match_table_one():
    np.testing.assert_allclose(EmissionConfig().alias_freqs_hz()[:3], [6.7745e6, 8.112e6, 9.57e6], atol=1e-3)


# --- synthesize ----------------------------------------------------------------

def test_empty_circuit_has_only_preamble_and_readout():
    _, truth = synthesize(empty_circuit(), EmissionConfig(noise_sigma=0.0))
    regions = {p.region for p in truth.shots[0].pulses}
    assert regions == {"A", "C"}


def test_fig6a_truth(fig6a):
    _, truth = fig6a
    b = truth.shots[0].region_pulses("B")
    assert len(b) == 30
    assert [p.ion for p in b] == [0, 1, 2] * 10
    freqs = EmissionConfig().alias_freqs_hz()
    assert all(p.alias_hz == pytest.approx(freqs[p.ion]) for p in b)


def test_ms_truth_pairs_share_times(fig6b):
    _, truth = fig6b
    b = truth.shots[0].region_pulses("B")
    assert len(b) == 60
    by_gate = {}
    for p in b:
        by_gate.setdefault(p.gate_index, []).append(p)
    for pair in by_gate.values():
        assert len(pair) == 2
        assert pair[0].ion != pair[1].ion
        assert (pair[0].t_start_s, pair[0].t_end_s) == (pair[1].t_start_s, pair[1].t_end_s)


def test_spectral_peak_at_alias():
    trace, _ = synthesize(CircuitSpec(1, (X(0),)), EmissionConfig(noise_sigma=0.0, region_a_template=(),
                                                                   region_c_template=()))
    spec = compute_stft(trace)
    k = np.unravel_index(np.argmax(spec.power), spec.power.shape)[0]
    assert abs(spec.freqs_hz()[k] - 6.7745e6) <= spec.bin_hz


def test_determinism():
    circ = CircuitSpec(3, (X(0), MS(1, 2), Y(2)), n_shots=2)
    a, _ = synthesize(circ, seed=5)
    b, _ = synthesize(circ, seed=5)
    c, _ = synthesize(circ, seed=6)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_too_few_addressing_frequencies():
    with pytest.raises(ConfigInvalid):
        synthesize(CircuitSpec(4, (X(3),)), EmissionConfig(addressing_freq_hz=(129e6, 130e6, 131e6)))


def test_bandpass_blocks_out_of_band_tone():
    cfg = EmissionConfig(noise_sigma=0.0, addressing_freq_hz=(250e6,), region_a_template=(), region_c_template=())
    trace, truth = synthesize(CircuitSpec(1, (X(0),)), cfg)
    assert not truth.shots[0].pulses[0].emitted
    assert np.all(trace.samples == 0)


def _silent_runs(x):
    quiet = np.concatenate([[False], x == 0, [False]])
    edges = np.flatnonzero(np.diff(quiet.astype(int)))
    return edges[1::2] - edges[::2]


def test_shot_gap_count():
    cfg = EmissionConfig(noise_sigma=0.0, lead_in_s=0.0)
    trace, _ = synthesize(CircuitSpec(3, (X(0), MS(0, 1)), n_shots=5), cfg)
    runs = _silent_runs(trace.samples)
    gap = cfg.shot_gap_s * FS
    long_runs = runs[runs > gap / 2]
    assert len(long_runs) == 5
    assert np.all(np.abs(long_runs - gap) <= 1)


def test_truth_intervals_hold_their_energy(fig6a, fig6b):
    for trace, truth in (fig6a, fig6b):
        x = trace.samples
        spectrum = np.fft.rfft(x)
        freqs = np.fft.rfftfreq(x.size, 1 / FS)
        filtered = {}
        for p in truth.shots[0].pulses:
            if p.alias_hz not in filtered:
                band = np.where(np.abs(freqs - p.alias_hz) <= 120e3, spectrum, 0)
                filtered[p.alias_hz] = np.fft.irfft(band, x.size) ** 2
            y = filtered[p.alias_hz]
            i0, i1 = int(p.t_start_s * FS), int(p.t_end_s * FS)
            pad = int(10e-6 * FS)
            inside = y[i0:i1].sum()
            around = y[max(0, i0 - pad):i1 + pad].sum()
            assert inside >= 0.9 * around


# --- decoys and interference ---------------------------------------------------

def test_decoy_rate_zero_is_identity():
    circ = x_sweep_circuit()
    assert apply_decoys(circ, DecoyConfig(gate_rate=0.0)) is circ


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_decoys_preserve_circuit(seed, n_decoys):
    circ = x_sweep_circuit()
    out = apply_decoys(circ, DecoyConfig(n_decoys=n_decoys, gate_rate=1.0), seed=seed)
    assert len(out.gates) == 60
    assert out.n_ions == 3 + n_decoys
    real = [g for g in out.gates if not g.decoy]
    assert real == list(circ.gates)
    assert is_subsequence(circ.gates, out.gates)
    for g in out.gates:
        if g.decoy:
            assert min(g.ions) >= 3


def test_decoy_config_validation():
    with pytest.raises(ConfigInvalid):
        DecoyConfig(n_decoys=0)


def test_decoys_through_synthesize():
    cfg = EmissionConfig(noise_sigma=0.0, decoy=DecoyConfig(2, 1, 1.0))
    _, truth = synthesize(x_sweep_circuit(), cfg)
    b = truth.shots[0].region_pulses("B")
    assert {p.ion for p in b if p.decoy} <= {3, 4}
    assert [p.ion for p in b if not p.decoy] == [0, 1, 2] * 10


def test_zero_power_interference_is_identity():
    trace = SampleTrace(np.arange(5000.0), FS)
    assert inject_interference(trace, [(1e6, 2e6)], 0.0) is trace


def test_interference_power_and_band():
    trace = SampleTrace(np.zeros(1 << 16), FS)
    out = inject_interference(trace, [(20e6, 25e6)], 2.0, seed=4)
    assert np.mean(out.samples**2) == pytest.approx(2.0, rel=1e-9)
    spec = np.abs(np.fft.rfft(out.samples)) ** 2
    f = np.fft.rfftfreq(out.samples.size, 1 / FS)
    assert spec[(f < 19e6) | (f > 26e6)].max() < 1e-12 * spec.max()


def test_narrowband_noise_outside_addressing_leaves_recall(fig6a):
    trace, truth = fig6a
    b = truth.shots[0].region_pulses("B")

    def recall(t):
        det = detect_pulses(t)
        return matched_recall(det.pulses, b, det.spectrogram.bin_hz)

    base = recall(trace)
    # ten times the tone power (amplitude 1 -> 0.5), well away from 6.7-9.6 MHz
    noisy = recall(inject_interference(trace, [(40e6, 45e6)], 5.0, seed=3))
    assert base == 1.0
    assert abs(noisy - base) <= 0.01
