# %% [markdown]
# # Entropy against energy
#
# Bosons on 16 sites with 6 particles, momentum sector k=1, subsystem of
# 4 sites. The single-eigenstate entropy is compared with the entropy of
# the averaged density matrix over 100 neighbouring levels and with a
# random superposition over the same window.

# %%
import matplotlib.pyplot as plt
import numpy as np

from eigentropy import analysis, ensembles, model, spectrum

curves = {}
for name in ("nonintegrable", "integrable"):
    ep = spectrum.solve(model.preset(name, 16, 6, "boson", 1))
    curves[name] = dict(
        E=ep.energies,
        eig=analysis.eigenstate_entropies(ep, 4),
        micro=analysis.microcanonical_entropies(ep, 4, 100),
        rand=analysis.random_entropies(ep, 4, 100, seed=20100),
    )
    print(name, ep.dim)

# %%
fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
for ax, (name, c) in zip(axes, curves.items()):
    ax.plot(c["E"], c["eig"], lw=0.6, label="eigenstate")
    ax.plot(c["E"], ensembles.smoothed_series(c["eig"], 100), "g--", label="smoothed")
    ax.plot(c["E"], c["micro"], "r--", label="microcanonical")
    ax.plot(c["E"], c["rand"], ":", c="tab:cyan", label="random")
    ax.set_title(name)
    ax.set_xlabel("E")
axes[0].set_ylabel("S (m=4)")
axes[0].legend()
fig.savefig("entropy_curve.png", dpi=120)

# %% [markdown]
# Median relative deviation from the microcanonical value over the middle
# half of the spectrum.

# %%
for name, c in curves.items():
    mid = slice(len(c["E"]) // 4, len(c["E"]) - len(c["E"]) // 4)
    dev = np.abs(c["eig"][mid] - c["micro"][mid]) / c["micro"][mid]
    print(name, np.median(dev))
