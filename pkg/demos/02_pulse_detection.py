# %% [markdown]
# # From raw samples to pulse records
#
# One shot of the ten-fold X sweep is simulated, turned into a
# spectrogram, thresholded and grouped into 8-connected components.

# %%
import numpy as np

from ionleak.emitsim import EmissionConfig, synthesize, x_sweep_circuit
from ionleak.sigproc import detect_pulses

trace, truth = synthesize(x_sweep_circuit(), EmissionConfig(), seed=0)
print(f"{len(trace)} samples, {trace.duration_s * 1e3:.2f} ms")

# %%
det = detect_pulses(trace, alpha=4.0)
spec = det.spectrogram
print(f"grid {spec.n_freq} bins x {spec.n_time} frames, bin {spec.bin_hz / 1e3:.0f} kHz, hop {spec.hop_s * 1e6:.2f} us")
print(f"threshold {det.stats.threshold:.3g} (mean {det.stats.mu_bar:.3g}, spread {det.stats.sigma_mu:.3g})")
print(f"{det.mask.count()} cells above threshold, {len(det.pulses)} pulses")

# %% The first few detections next to what was emitted.
b_truth = truth.shots[0].region_pulses("B")
for p in det.pulses[:8]:
    print(f"{p.t_start_s * 1e6:8.1f} us  {p.duration_s * 1e6:6.1f} us  {p.center_freq_hz / 1e6:7.4f} MHz")
print("...")
print("first emitted B tone:", f"{b_truth[0].t_start_s * 1e6:.1f} us", f"{b_truth[0].alias_hz / 1e6:.4f} MHz")

# %% Log-power image with the detections outlined.
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    db = 10 * np.log10(spec.power + spec.power.max() * 1e-10)
    lo = int(4e6 / spec.bin_hz)
    hi = int(30e6 / spec.bin_hz)
    extent = (0, spec.n_time * spec.hop_s * 1e3, lo * spec.bin_hz / 1e6, hi * spec.bin_hz / 1e6)
    plt.imshow(db[lo:hi], origin="lower", aspect="auto", extent=extent, cmap="gray")
    for p in det.pulses:
        plt.plot([p.t_start_s * 1e3, p.t_end_s * 1e3], [p.center_freq_hz / 1e6] * 2, "r-", lw=1)
    plt.xlabel("time (ms)")
    plt.ylabel("alias frequency (MHz)")
    plt.savefig("pulses.png", dpi=120)
    print("wrote pulses.png")
except ImportError:
    print("matplotlib not installed; skipping plot")
