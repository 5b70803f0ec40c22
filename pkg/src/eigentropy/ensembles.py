"""Level-window ensembles: averaged reduced density matrices, random
superpositions of neighbouring eigenstates, and smoothed curves.

Every window is a run of ``n`` consecutive levels centred on a level index,
shifted inward at the spectrum edges so that it always holds ``n`` levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .entangle import ReducedDensityMatrix, rdm_blocks
from .spectrum import EigenPairs, window_bounds

__all__ = [
    "WindowSpec",
    "GENERATOR",
    "window_seed",
    "complex_gaussian",
    "microcanonical_rdm",
    "random_superposition",
    "smoothed_series",
]

GENERATOR = "numpy.random.PCG64"


@dataclass(frozen=True)
class WindowSpec:
    center: int
    n: int = 100

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"window width must be >= 1, got {self.n}")

    def bounds(self, size: int) -> tuple[int, int]:
        if self.n > size:
            raise ValueError(f"window of {self.n} levels exceeds spectrum of {size}")
        return window_bounds(self.center, self.n, size)


def window_seed(seed: int, center: int) -> int:
    """Seed for the window centred on ``center``: ``seed XOR center``."""
    return int(seed) ^ int(center)


def complex_gaussian(n: int, seed: int) -> np.ndarray:
    """``n`` independent standard complex normals (unit mean modulus squared)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    re = rng.standard_normal(n)
    im = rng.standard_normal(n)
    return (re + 1j * im) / np.sqrt(2.0)


def microcanonical_rdm(ep: EigenPairs, w: WindowSpec, m: int) -> ReducedDensityMatrix:
    """Equal-weight average of the subsystem density matrices of the window's eigenstates."""
    lo, hi = w.bounds(ep.dim)
    blocks = rdm_blocks(ep.full_vectors(slice(lo, hi)), ep.full_basis, m)
    return ReducedDensityMatrix(m, {n: b.mean(axis=0) for n, b in blocks.items()})


def random_superposition(ep: EigenPairs, w: WindowSpec, seed: int) -> np.ndarray:
    """Normalized ``sum_j c_j |E_j>`` over the window with complex Gaussian ``c_j``.

    A complex normal draw has a Gaussian modulus and a uniform phase, so one
    draw per level supplies both. Returned as full-basis amplitudes.
    """
    lo, hi = w.bounds(ep.dim)
    c = complex_gaussian(hi - lo, seed)
    psi = ep.sector_to_full(ep.vectors[:, lo:hi] @ c)
    return psi / np.linalg.norm(psi)


def smoothed_series(values, n: int) -> np.ndarray:
    """Centred moving average using the same edge-shifted windows as the ensembles.

    For even ``n`` the window ``[i - n/2, i + n/2)`` sits half a level below
    ``i``, so a linear ramp is shifted by half a step.
    """
    values = np.asarray(values, dtype=float)
    if n < 1:
        raise ValueError(f"window width must be >= 1, got {n}")
    size = len(values)
    if size == 0:
        return values.copy()
    if n == 1:
        return values.copy()
    width = min(n, size)
    lo = np.array([window_bounds(i, n, size)[0] for i in range(size)])
    return sliding_window_view(values, width)[lo].mean(axis=1)
