# %% [markdown]
# # Occupation basis and momentum sectors
#
# States are bitmasks (bit i = site i). Translating a ring splits the
# fixed-particle space into momentum sectors; this script checks that the
# sectors partition the spectrum.

# %%
import numpy as np

from eigentropy import basis, model, spectrum

fb = basis.enumerate_full_basis(8, 3)
print(fb.dim, [format(int(s), "08b") for s in fb.states[:5]])

# %% [markdown]
# Fermions pick up a sign when a particle wraps past the boundary and the
# particle number is even.

# %%
print(basis.translate(0b10000001, 8, "fermion"))
print(basis.translate(0b10000011, 8, "fermion"))

# %%
dims = {k: basis.build_momentum_sector(8, 3, k, "fermion", fb).dim for k in range(8)}
print(dims, sum(dims.values()))

# %% [markdown]
# Diagonalize every sector and compare with the full-basis spectrum.

# %%
p = model.preset("nonintegrable", 8, 3, "fermion", None)
full = spectrum.diagonalize(model.build_hamiltonian_full(p, fb)).energies
parts = [spectrum.solve(p.with_sector(k)).energies for k in range(8)]
print(np.abs(np.sort(np.concatenate(parts)) - full).max())
