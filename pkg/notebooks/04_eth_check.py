# %% [markdown]
# # Eigenstate expectation of a local observable
#
# Nearest-neighbour density correlator n_0 n_1 in every eigenstate versus
# its 100-level running average.

# %%
import numpy as np

from eigentropy import analysis, model, spectrum

for name in ("nonintegrable", "integrable"):
    ep = spectrum.solve(model.preset(name, 16, 6, "boson", 1))
    chk = analysis.eth_observable_check(ep, "n0n1", 100)
    mid = slice(ep.dim // 4, ep.dim - ep.dim // 4)
    spread = np.std(chk.eigenstate[mid] - chk.microcanonical[mid])
    print(name, "spread", spread, "max |<n0> - Np/N|", np.abs(chk.density0 - 6 / 16).max())
