"""Exact diagonalization of 1D hard-core bosons and spinless fermions on a ring,
with entanglement entropy of energy eigenstates and window-averaged ensembles."""

__version__ = "0.1.0"

from .basis import (
    FullBasis,
    SectorBasis,
    build_momentum_sector,
    enumerate_full_basis,
    expand_to_full,
    find_representative,
    translate,
)
from .model import ModelParams, build_hamiltonian_full, build_hamiltonian_sector, preset
from .spectrum import (
    EigenPairs,
    density_of_states,
    diagonalize,
    load_eigenpairs,
    save_eigenpairs,
    solve,
)
from .entangle import ReducedDensityMatrix, entanglement_entropy, reduced_density_matrix
from .ensembles import WindowSpec, microcanonical_rdm, random_superposition, smoothed_series
from .analysis import (
    Mode,
    entropy_fluctuation,
    entropy_vs_energy,
    entropy_vs_subsystem,
    eth_observable_check,
)
