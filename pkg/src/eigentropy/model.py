"""Ring Hamiltonian with nearest and next-nearest neighbour hopping and interaction.

    H = sum_i [ -t  (c^dag_i c_{i+1} + h.c.) - tp (c^dag_i c_{i+2} + h.c.)
                + V  (n_i - 1/2)(n_{i+1} - 1/2) + Vp (n_i - 1/2)(n_{i+2} - 1/2) ]

with site indices taken mod N and one term per ``i`` in each bond family.
The half-filling shift in the interaction moves the whole spectrum by a
constant at fixed particle number and leaves eigenvectors untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse

from .basis import (
    STATISTICS,
    FullBasis,
    SectorBasis,
    _orbit_table,
    _rotate,
    _translation_phase,
    enumerate_full_basis,
    popcount,
)

__all__ = [
    "ModelParams",
    "NONINTEGRABLE",
    "INTEGRABLE",
    "preset",
    "hamiltonian_terms",
    "build_hamiltonian_full",
    "build_hamiltonian_sector",
    "translation_matrix",
]

NONINTEGRABLE = {"t": 1.0, "V": 1.0, "tp": 0.96, "Vp": 0.96}
INTEGRABLE = {"t": 1.0, "V": 1.0, "tp": 0.0, "Vp": 0.0}


@dataclass(frozen=True)
class ModelParams:
    N: int
    Np: int
    statistics: str = "boson"
    t: float = 1.0
    V: float = 1.0
    tp: float = 0.0
    Vp: float = 0.0
    k: int | None = None  # None selects the full (unreduced) basis

    def __post_init__(self):
        if self.statistics not in STATISTICS:
            raise ValueError(f"statistics must be one of {STATISTICS}, got {self.statistics!r}")
        nnn = self.tp != 0 or self.Vp != 0
        min_sites = 5 if nnn else 3
        if self.N < min_sites:
            raise ValueError(f"N={self.N} too small: need N >= {min_sites} "
                             f"{'with' if nnn else 'without'} next-nearest-neighbour terms")
        if not 0 <= self.Np <= self.N:
            raise ValueError(f"need 0 <= Np <= N, got Np={self.Np}, N={self.N}")
        if self.k is not None and not 0 <= self.k < self.N:
            raise ValueError(f"need 0 <= k < N, got k={self.k}")

    @property
    def integrable(self) -> bool:
        return self.tp == 0 and self.Vp == 0

    def with_sector(self, k: int | None) -> "ModelParams":
        return replace(self, k=k)


def preset(name: str, N: int, Np: int, statistics: str = "boson", k: int | None = 1) -> ModelParams:
    """``"nonintegrable"`` (tp = Vp = 0.96) or ``"integrable"`` (tp = Vp = 0)."""
    couplings = {"nonintegrable": NONINTEGRABLE, "integrable": INTEGRABLE}[name]
    return ModelParams(N=N, Np=Np, statistics=statistics, k=k, **couplings)


def _bonds(p: ModelParams):
    for d, hop, inter in ((1, p.t, p.V), (2, p.tp, p.Vp)):
        if hop == 0 and inter == 0:
            continue
        for i in range(p.N):
            yield i, (i + d) % p.N, hop, inter


def hamiltonian_terms(states: np.ndarray, p: ModelParams):
    """Matrix elements of H acting on the occupation states ``states``.

    Returns ``(diag, src, targets, amps)``: the diagonal energies, and for
    every off-diagonal element the source position in ``states``, the target
    bitmask and the amplitude ``<target|H|source>``.
    """
    states = np.asarray(states, dtype=np.uint64)
    diag = np.zeros(len(states))
    src, targets, amps = [], [], []
    for i, j, hop, inter in _bonds(p):
        ni = ((states >> np.uint64(i)) & np.uint64(1)).astype(np.int64)
        nj = ((states >> np.uint64(j)) & np.uint64(1)).astype(np.int64)
        if inter != 0:
            diag += inter * (ni - 0.5) * (nj - 0.5)
        if hop == 0:
            continue
        movable = np.flatnonzero(ni != nj)
        if len(movable) == 0:
            continue
        s = states[movable]
        amp = np.full(len(movable), -hop)
        if p.statistics == "fermion":
            lo, hi = min(i, j), max(i, j)
            between = np.uint64(((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1))
            amp *= 1 - 2 * (popcount(s & between) % 2)
        src.append(movable)
        targets.append(s ^ np.uint64((1 << i) | (1 << j)))
        amps.append(amp)
    if src:
        return diag, np.concatenate(src), np.concatenate(targets), np.concatenate(amps)
    return diag, np.zeros(0, np.int64), np.zeros(0, np.uint64), np.zeros(0)


def build_hamiltonian_full(p: ModelParams, fb: FullBasis | None = None) -> np.ndarray:
    """Dense real symmetric H in the unreduced occupation basis."""
    if fb is None:
        fb = enumerate_full_basis(p.N, p.Np)
    if (fb.N, fb.Np) != (p.N, p.Np):
        raise ValueError("basis does not match model parameters")
    diag, src, targets, amps = hamiltonian_terms(fb.states, p)
    H = sparse.coo_matrix((amps, (fb.index(targets), src)), shape=(fb.dim, fb.dim)).toarray()
    H[np.diag_indices(fb.dim)] += diag
    return H


def build_hamiltonian_sector(p: ModelParams, sb: SectorBasis) -> np.ndarray:
    """Dense complex Hermitian block of H at momentum ``sb.k``.

    For a hop taking representative ``a`` to ``s = phase * T^l |b>`` the
    element ``<b,k|H|a,k>`` gains ``amp * phase * exp(2 pi i k l / N) * sqrt(R_a / R_b)``.
    """
    if (sb.N, sb.Np, sb.statistics) != (p.N, p.Np, p.statistics):
        raise ValueError("sector basis does not match model parameters")
    N, dim = p.N, sb.dim
    diag, src, targets, amps = hamiltonian_terms(sb.reps, p)
    H = np.zeros((dim, dim), dtype=complex)
    H[np.diag_indices(dim)] = diag
    if len(src) == 0:
        return H
    uniq, inverse = np.unique(targets, return_inverse=True)
    rep, shift, phase = _orbit_table(uniq, N, p.Np, p.statistics)
    b = sb.index(rep)[inverse]
    keep = b >= 0
    a = src[keep]
    b = b[keep]
    l = shift[inverse][keep]
    ph = phase[inverse][keep]
    vals = (amps[keep] * ph * np.exp(2j * np.pi * sb.k * l / N)
            * np.sqrt(sb.periods[a] / sb.periods[b]))
    H += sparse.coo_matrix((vals, (b, a)), shape=(dim, dim)).toarray()
    return H


def translation_matrix(fb: FullBasis, statistics: str = "boson") -> np.ndarray:
    """Dense matrix of the one-site translation in the full basis."""
    targets = _rotate(fb.states, fb.N, 1)
    phase = _translation_phase(fb.states, fb.N, fb.Np, 1, statistics)
    T = np.zeros((fb.dim, fb.dim))
    T[fb.index(targets), np.arange(fb.dim)] = phase
    return T
