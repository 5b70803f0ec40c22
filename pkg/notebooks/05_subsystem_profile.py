# %% [markdown]
# # Entropy against subsystem size
#
# For a mid-spectrum eigenstate S(m) grows linearly up to m = N/2 and is
# symmetric under m -> N - m.

# %%
import numpy as np

from eigentropy import analysis, model, spectrum

ep = spectrum.solve(model.preset("nonintegrable", 16, 6, "boson", 1))
prof = analysis.entropy_vs_subsystem(ep)
print("level", prof.level, "slope", prof.slope, "1 - R^2", prof.residual)
print(np.round(prof.entropy, 3))
print(np.abs(prof.entropy - prof.entropy[::-1]).max())
