# %% [markdown]
# # Reading the circuit back out of the emissions
#
# An empty circuit reveals the fixed preamble and readout pattern.  With
# that baseline, the remaining pulses of any run are the gates, and their
# frequencies and overlaps say which ions and which gate kinds were used.

# %%
from ionleak.emitsim import MS, X, Y, CircuitSpec, EmissionConfig, empty_circuit, synthesize
from ionleak.reconstruct import analyze_trace, profile_from_trace

cfg = EmissionConfig()
baseline, _ = synthesize(empty_circuit(n_shots=5), cfg, seed=1)
profile = profile_from_trace(baseline)
print("preamble:", [f"{t.center_freq_hz / 1e6:.2f} MHz/{t.duration_s * 1e6:.0f} us" for t in profile.preamble_pulses])
print("readout: ", [f"{t.center_freq_hz / 1e6:.2f} MHz/{t.duration_s * 1e6:.0f} us" for t in profile.readout_pulses])

# %% A small secret circuit, three shots.
secret = CircuitSpec(3, (X(0), MS(0, 1), Y(2), MS(1, 2), X(1)), n_shots=3)
trace, truth = synthesize(secret, cfg, seed=2)
an = analyze_trace(trace, profile=profile)

for shot, events in zip(an.shots, an.events):
    print(f"shot {shot.index}: regions A/B/C = "
          f"{shot.region_labels.count('A')}/{shot.region_labels.count('B')}/{shot.region_labels.count('C')}")
    for e in events:
        angle = "" if e.theta_est_rad is None else f"  theta~{e.theta_est_rad:.2f} rad"
        print(f"    {e.kind:20s} ions {e.ions}  conf {e.confidence:.2f}{angle}")

print("recovered == emitted:", an.gate_sequence(0) == truth.gate_sequence(0))
