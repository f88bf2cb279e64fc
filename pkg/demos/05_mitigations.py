# %% [markdown]
# # Decoys and jamming
#
# Two countermeasures: extra ions that receive random gates, and noise
# injected into the receiver band.

# %%
from ionleak.emitsim import DecoyConfig, EmissionConfig, inject_interference, synthesize, x_sweep_circuit
from ionleak.reconstruct import analyze_trace, default_addressing_table
from ionleak.sigproc import detect_pulses

circuit = x_sweep_circuit(repeats=3)
cfg = EmissionConfig(decoy=DecoyConfig(n_decoys=2, rng_seed=4, gate_rate=1.0))
trace, truth = synthesize(circuit, cfg, seed=4)

# An attacker who has found the decoy tones can still only label them as
# "more ions"; the events look like ordinary gates.
table = default_addressing_table().extended(cfg.alias_freqs_hz()[3:5])
an = analyze_trace(trace, table=table)
for e in an.events[0]:
    tag = "decoy" if min(e.ions) >= circuit.n_ions else "real "
    print(f"{tag}  {e.kind:20s} {e.ions}  conf {e.confidence:.2f}")

# %% Broadband jamming: how many gate pulses survive as the noise grows.
plain, truth = synthesize(x_sweep_circuit(), EmissionConfig(), seed=5)
b = truth.shots[0].region_pulses("B")
tone_power = 0.5
for factor in (0, 10, 100, 1000):
    t = inject_interference(plain, [(0, plain.sample_rate_hz / 2)], factor * tone_power, seed=6)
    det = detect_pulses(t)
    hits = sum(any(abs(p.center_freq_hz - tp.alias_hz) <= det.spectrogram.bin_hz
                   and abs(p.t_start_s - tp.t_start_s) <= 25e-6 and abs(p.t_end_s - tp.t_end_s) <= 25e-6
                   for p in det.pulses) for tp in b)
    print(f"noise {factor:5d}x tone power: {hits}/{len(b)} gate pulses recovered")
