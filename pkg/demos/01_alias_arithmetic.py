# %% [markdown]
# # Where the addressing tones land after sampling
#
# The receiver samples at 122.88 MS/s, far below the 80-250 MHz drive
# band of the deflectors, so every tone folds into 0-61.44 MHz.  An
# observed alias only narrows the true tone down to a few candidates.

# %%
import numpy as np

from ionleak.sigproc import AOM_BAND_HZ, dealias_candidates, fold_frequency

FS = 122.88e6

# %%
for f_alias in (6.7745e6, 8.112e6, 9.57e6):
    cands = dealias_candidates(f_alias, FS, k_max=3, band=AOM_BAND_HZ)
    print(f"{f_alias / 1e6:8.4f} MHz  ->  " + ", ".join(f"{c / 1e6:.4f}" for c in cands))

# %% [markdown]
# Folding is many-to-one.  Every candidate folds back onto the same alias:

# %%
for c in dealias_candidates(6.7745e6, FS):
    print(f"{c / 1e6:9.4f} MHz folds to {fold_frequency(c, FS) / 1e6:.4f} MHz")

# %% A sweep across the drive band shows the sawtooth of the alias map.
true = np.linspace(*AOM_BAND_HZ, 2000)
alias = np.array([fold_frequency(f, FS) for f in true])
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.plot(true / 1e6, alias / 1e6)
    plt.xlabel("true tone (MHz)")
    plt.ylabel("observed alias (MHz)")
    plt.savefig("alias_map.png", dpi=120)
    print("wrote alias_map.png")
except ImportError:
    print("matplotlib not installed; skipping plot")
