"""Partial trace onto the first ``m`` sites and von Neumann entropy.

Subsystem A is the contiguous block of sites ``0 .. m-1``; the bath B holds
the rest. Amplitudes are arranged as a matrix ``Psi[a, b]`` per subsystem
particle number ``n_A`` so that ``rho_A = Psi Psi^dag`` is block diagonal.
In the site-ordered fermion convention every A operator precedes every B
operator, so the amplitude of ``|a>|b>`` is just ``psi(a | b << m)`` and no
extra signs enter the trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, log

import numpy as np

from .basis import FullBasis, _combinations_bits, enumerate_full_basis, popcount

__all__ = [
    "Bipartition",
    "ReducedDensityMatrix",
    "bipartition",
    "reduced_density_matrix",
    "entanglement_entropy",
    "entropy_from_eigenvalues",
    "entanglement_entropies",
    "rdm_blocks",
    "EIGEN_CUTOFF",
]

EIGEN_CUTOFF = 1e-12
NORM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class _Block:
    n_sub: int
    rows: np.ndarray  # positions in the full basis
    a: np.ndarray  # subsystem configuration index
    b: np.ndarray  # bath configuration index
    dim_a: int
    dim_b: int


@dataclass(frozen=True, eq=False)
class Bipartition:
    """Index tables splitting a full basis into ``m`` subsystem and ``N - m`` bath sites."""

    N: int
    Np: int
    m: int
    blocks: tuple[_Block, ...] = field(repr=False)

    @property
    def particle_counts(self) -> tuple[int, ...]:
        return tuple(blk.n_sub for blk in self.blocks)

    def subsystem_states(self, n_sub: int) -> np.ndarray:
        """Bitmasks over the ``m`` subsystem sites labelling rows of block ``n_sub``."""
        return _combinations_bits(self.m, n_sub)

    def amplitude_blocks(self, psi: np.ndarray):
        """Yield ``(n_sub, Psi)`` with ``Psi`` of shape ``(..., dim_a, dim_b)``.

        ``psi`` is a full-basis vector or a matrix of column vectors.
        """
        psi = np.asarray(psi)
        batch = psi.shape[1:]
        for blk in self.blocks:
            mat = np.zeros(batch + (blk.dim_a, blk.dim_b), dtype=np.result_type(psi.dtype, np.float64))
            vals = psi[blk.rows]
            if batch:
                mat[:, blk.a, blk.b] = vals.T
            else:
                mat[blk.a, blk.b] = vals
            yield blk.n_sub, mat


@lru_cache(maxsize=16)
def _bipartition_cached(N: int, Np: int, m: int) -> Bipartition:
    # the full basis is fixed by (N, Np), so it need not be part of the key
    states = enumerate_full_basis(N, Np).states
    sub = states & np.uint64((1 << m) - 1)
    bath = states >> np.uint64(m)
    n_sub = popcount(sub)
    blocks = []
    for n in range(max(0, Np - (N - m)), min(m, Np) + 1):
        rows = np.flatnonzero(n_sub == n)
        sub_list = _combinations_bits(m, n)
        bath_list = _combinations_bits(N - m, Np - n)
        a = np.searchsorted(sub_list, sub[rows])
        b = np.searchsorted(bath_list, bath[rows])
        blocks.append(_Block(n, rows, a, b, len(sub_list), len(bath_list)))
    return Bipartition(N, Np, m, tuple(blocks))


def bipartition(fb: FullBasis, m: int) -> Bipartition:
    if not 1 <= m <= fb.N - 1:
        raise ValueError(f"subsystem size m={m} outside [1, {fb.N - 1}]")
    return _bipartition_cached(fb.N, fb.Np, m)


@dataclass(frozen=True, eq=False)
class ReducedDensityMatrix:
    """Block-diagonal reduced density matrix keyed by subsystem particle number."""

    m: int
    blocks: dict[int, np.ndarray]

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks.values()))

    def hermiticity_defect(self) -> float:
        return max((float(np.abs(b - b.conj().T).max()) for b in self.blocks.values() if b.size),
                   default=0.0)

    def eigenvalues(self) -> np.ndarray:
        vals = [np.linalg.eigvalsh(b) for b in self.blocks.values() if b.size]
        return np.sort(np.concatenate(vals)) if vals else np.zeros(0)

    def to_dense(self) -> np.ndarray:
        """The full ``2**m`` matrix indexed by subsystem bitmask."""
        dim = 1 << self.m
        out = np.zeros((dim, dim), dtype=complex)
        for n, b in self.blocks.items():
            idx = _combinations_bits(self.m, n).astype(np.int64)
            out[np.ix_(idx, idx)] = b
        return out

    @classmethod
    def mixture(cls, rdms, weights=None) -> "ReducedDensityMatrix":
        rdms = list(rdms)
        if weights is None:
            weights = np.full(len(rdms), 1.0 / len(rdms))
        keys = rdms[0].blocks.keys()
        blocks = {n: sum(w * r.blocks[n] for w, r in zip(weights, rdms)) for n in keys}
        return cls(rdms[0].m, blocks)


def reduced_density_matrix(psi, fb: FullBasis, m: int) -> ReducedDensityMatrix:
    psi = np.asarray(psi)
    if psi.shape != (fb.dim,):
        raise ValueError(f"expected a vector of length {fb.dim}, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm {norm!r})")
    bp = bipartition(fb, m)
    blocks = {n: mat @ mat.conj().T for n, mat in bp.amplitude_blocks(psi)}
    return ReducedDensityMatrix(m, blocks)


def entropy_from_eigenvalues(lam) -> np.ndarray:
    """``-sum(l ln l)`` over the last axis, dropping eigenvalues at or below 1e-12."""
    lam = np.asarray(lam, dtype=float)
    safe = np.where(lam > EIGEN_CUTOFF, lam, 1.0)
    return -(np.where(lam > EIGEN_CUTOFF, lam * np.log(safe), 0.0)).sum(axis=-1)


def entanglement_entropy(rho: ReducedDensityMatrix) -> float:
    """Von Neumann entropy in nats."""
    return float(entropy_from_eigenvalues(rho.eigenvalues()))


def max_entropy(N: int, Np: int, m: int) -> float:
    """Upper bound ``ln(sum_n binomial(m, n))`` over allowed subsystem fillings."""
    return log(sum(comb(m, n) for n in range(max(0, Np - (N - m)), min(m, Np) + 1)))


def rdm_blocks(vectors, fb: FullBasis, m: int) -> dict[int, np.ndarray]:
    """Stacked RDM blocks ``(nvec, dim_a, dim_a)`` for every column of ``vectors``."""
    vectors = np.asarray(vectors)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    bp = bipartition(fb, m)
    return {n: mat @ np.swapaxes(mat.conj(), -1, -2) for n, mat in bp.amplitude_blocks(vectors)}


def entanglement_entropies(vectors, fb: FullBasis, m: int, chunk: int = 256) -> np.ndarray:
    """Entropies of many full-basis states (columns of ``vectors``).

    Each block uses the smaller of ``Psi Psi^dag`` and ``Psi^dag Psi``; both
    carry the same nonzero spectrum.
    """
    vectors = np.asarray(vectors)
    single = vectors.ndim == 1
    if single:
        vectors = vectors[:, None]
    bp = bipartition(fb, m)
    out = np.empty(vectors.shape[1])
    for start in range(0, vectors.shape[1], chunk):
        part = vectors[:, start:start + chunk]
        lam = []
        for _, mat in bp.amplitude_blocks(part):
            if mat.shape[-2] <= mat.shape[-1]:
                gram = mat @ np.swapaxes(mat.conj(), -1, -2)
            else:
                gram = np.swapaxes(mat.conj(), -1, -2) @ mat
            lam.append(np.linalg.eigvalsh(gram))
        out[start:start + chunk] = entropy_from_eigenvalues(np.concatenate(lam, axis=-1))
    return out[0] if single else out
