# %% [markdown]
# # Entropy fluctuations against density of states
#
# For each ring size the spread of eigenstate entropies is measured in the
# 100-level window around the peak of the smoothed curve. The whole sweep
# takes well under a minute.

# %%
import matplotlib.pyplot as plt
import numpy as np

from eigentropy import analysis, model, spectrum

rows = []
for statistics in ("boson", "fermion"):
    for name in ("nonintegrable", "integrable"):
        for N in (16, 18, 20):
            ep = spectrum.solve(model.preset(name, N, 6, statistics, 1))
            rec = analysis.entropy_fluctuation(ep, 4, 100)
            rows.append((statistics, name, N, rec.sigma, rec.dos))
            print(rows[-1])

# %%
fig, ax = plt.subplots()
for statistics, marker in (("boson", "o"), ("fermion", "s")):
    for name, color in (("nonintegrable", "k"), ("integrable", "r")):
        pts = np.array([(r[4], r[3]) for r in rows if r[0] == statistics and r[1] == name])
        ax.loglog(pts[:, 0], pts[:, 1], marker, c=color, ls="-", label=f"{statistics} {name}")
        slope = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)[0]
        print(statistics, name, "slope", round(slope, 2))
ax.set_xlabel("density of states")
ax.set_ylabel("sigma_S")
ax.legend()
fig.savefig("fluctuations.png", dpi=120)
