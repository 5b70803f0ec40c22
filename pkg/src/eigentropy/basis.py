"""Occupation bases for particle-conserving lattice models on a ring.

States are integer bitmasks: bit ``i`` is the occupation of site ``i``.
Fermionic signs follow the site-ordered convention

    |s> = c^dag_{i_1} c^dag_{i_2} ... c^dag_{i_Np} |0>,   i_1 < i_2 < ... < i_Np

and the one-site translation maps ``c^dag_i -> c^dag_{(i+1) mod N}``. When the
particle on site ``N-1`` wraps to site 0 it is reordered past the other
``Np-1`` particles, giving the sign ``(-1)**(Np-1)``.

A momentum-``k`` basis vector built on representative ``a`` of period ``R`` is

    |a, k> = R**-0.5 * sum_{j<R} exp(-2 pi i k j / N) T^j |a>

which satisfies ``T |a, k> = exp(2 pi i k / N) |a, k>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Literal

import numpy as np
from scipy import sparse

Statistics = Literal["boson", "fermion"]

MAX_SITES = 32
STATISTICS = ("boson", "fermion")

__all__ = [
    "FullBasis",
    "SectorBasis",
    "MAX_SITES",
    "enumerate_full_basis",
    "translate",
    "find_representative",
    "build_momentum_sector",
    "expand_to_full",
    "expansion_matrix",
    "popcount",
]


def popcount(x):
    """Number of set bits, elementwise for arrays."""
    if isinstance(x, np.ndarray):
        return np.bitwise_count(x).astype(np.int64)
    return int(x).bit_count()


def _check_statistics(statistics: str) -> None:
    if statistics not in STATISTICS:
        raise ValueError(f"statistics must be one of {STATISTICS}, got {statistics!r}")


@dataclass(frozen=True, eq=False)
class FullBasis:
    """All ``binomial(N, Np)`` occupations, ascending as integers."""

    N: int
    Np: int
    states: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, bits):
        """Position of ``bits`` (scalar or array) in the basis; -1 if absent."""
        bits = np.asarray(bits, dtype=np.uint64)
        pos = np.searchsorted(self.states, bits)
        pos = np.minimum(pos, len(self.states) - 1)
        found = self.states[pos] == bits
        out = np.where(found, pos, -1)
        return int(out) if out.ndim == 0 else out


def _combinations_bits(N: int, Np: int) -> np.ndarray:
    # Build level by level: the sorted list of Np-subsets of {0..N-1} as bitmasks.
    # Subsets of {0..n-1} of size p are those of {0..n-2} (size p) followed by
    # those of {0..n-2} (size p-1) with bit n-1 set; this keeps ascending order.
    table = {(0, 0): np.zeros(1, dtype=np.uint64)}
    for n in range(1, N + 1):
        for p in range(max(0, Np - (N - n)), min(n, Np) + 1):
            parts = []
            if p <= n - 1:
                parts.append(table[(n - 1, p)])
            if p >= 1:
                parts.append(table[(n - 1, p - 1)] | np.uint64(1 << (n - 1)))
            table[(n, p)] = np.concatenate(parts)
        for p in range(0, Np + 1):
            table.pop((n - 1, p), None)
    return table[(N, Np)]


def enumerate_full_basis(N: int, Np: int) -> FullBasis:
    if not 0 <= N <= MAX_SITES:
        raise ValueError(f"N must lie in [0, {MAX_SITES}], got {N}")
    if not 0 <= Np <= N:
        raise ValueError(f"need 0 <= Np <= N, got Np={Np}, N={N}")
    states = _combinations_bits(N, Np)
    states.setflags(write=False)
    return FullBasis(N, Np, states)


def _rotate(bits, N: int, j: int = 1):
    """Cyclic shift of site labels by ``j`` (i -> i + j mod N)."""
    j %= N
    if j == 0:
        return bits
    full = (1 << N) - 1
    if isinstance(bits, np.ndarray):
        b = bits.astype(np.uint64)
        return ((b << np.uint64(j)) | (b >> np.uint64(N - j))) & np.uint64(full)
    return ((bits << j) | (bits >> (N - j))) & full


def _translation_phase(rep, N: int, Np: int, j: int, statistics: str):
    """Sign picked up by ``T^j`` acting on ``rep``: ``T^j |rep> = phase |rot(rep, j)>``.

    Every particle on sites ``N-j .. N-1`` crosses the boundary once.
    """
    if statistics == "boson" or Np <= 1 or j % N == 0:
        if isinstance(rep, np.ndarray):
            return np.ones(rep.shape, dtype=np.int8)
        return 1
    j %= N
    crossings = popcount(rep >> (np.uint64(N - j) if isinstance(rep, np.ndarray) else N - j))
    odd = (crossings * (Np - 1)) % 2
    if isinstance(rep, np.ndarray):
        return (1 - 2 * odd).astype(np.int8)
    return 1 - 2 * odd


def translate(bits: int, N: int, statistics: Statistics = "boson") -> tuple[int, int]:
    """Shift every particle one site to the right on the ring.

    Returns the new bitmask and the sign ``(-1)**((Np-1) * n_{N-1})`` for
    fermions (always +1 for hard-core bosons).
    """
    _check_statistics(statistics)
    Np = popcount(bits)
    return _rotate(int(bits), N, 1), _translation_phase(int(bits), N, Np, 1, statistics)


def find_representative(bits: int, N: int, statistics: Statistics = "boson") -> tuple[int, int, int]:
    """Integer-minimal member of the translation orbit of ``bits``.

    Returns ``(rep, shift, phase)`` with ``T^shift |rep> = phase * |bits>``.
    """
    _check_statistics(statistics)
    bits = int(bits)
    Np = popcount(bits)
    best, best_shift = bits, 0
    for j in range(1, N):
        # rot(bits, -j) is the state that reaches ``bits`` after j translations
        cand = _rotate(bits, N, -j)
        if cand < best:
            best, best_shift = cand, j
    return best, best_shift, _translation_phase(best, N, Np, best_shift, statistics)


def _orbit_table(states: np.ndarray, N: int, Np: int, statistics: str):
    """Vectorized representative, shift and phase for every state in ``states``."""
    rep = states.copy()
    shift = np.zeros(len(states), dtype=np.int64)
    for j in range(1, N):
        cand = _rotate(states, N, -j)
        better = cand < rep
        rep[better] = cand[better]
        shift[better] = j
    phase = np.ones(len(states), dtype=np.int8)
    if statistics == "fermion" and Np > 1:
        for j in np.unique(shift):
            sel = shift == j
            phase[sel] = _translation_phase(rep[sel], N, Np, int(j), statistics)
    return rep, shift, phase


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Momentum-``k`` basis: one vector per compatible translation orbit.

    ``reps`` holds the representatives (ascending), ``periods`` the orbit
    lengths ``R`` and ``norms`` the factor ``1/sqrt(R)`` that makes each
    momentum state unit-norm.
    """

    N: int
    Np: int
    k: int
    statistics: str
    reps: np.ndarray = field(repr=False)
    periods: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.reps)

    @property
    def dim(self) -> int:
        return len(self.reps)

    def index(self, rep):
        rep = np.asarray(rep, dtype=np.uint64)
        if len(self.reps) == 0:
            out = np.full(rep.shape, -1, dtype=np.int64)
            return int(out) if out.ndim == 0 else out
        pos = np.minimum(np.searchsorted(self.reps, rep), len(self.reps) - 1)
        out = np.where(self.reps[pos] == rep, pos, -1)
        return int(out) if out.ndim == 0 else out


def _periods(reps: np.ndarray, N: int) -> np.ndarray:
    periods = np.full(len(reps), N, dtype=np.int64)
    # smallest divisor R of N with rot(rep, R) == rep
    for R in sorted(d for d in range(1, N) if N % d == 0):
        hit = (periods == N) & (_rotate(reps, N, R) == reps)
        periods[hit] = R
    return periods


def build_momentum_sector(N: int, Np: int, k: int, statistics: Statistics = "boson",
                          full: FullBasis | None = None) -> SectorBasis:
    """Translation-symmetric basis for momentum ``2 pi k / N``.

    An orbit of period ``R`` survives iff ``T^R |a> = phase |a>`` with
    ``phase * exp(-2 pi i k R / N) == 1``; other orbits have zero norm and
    are dropped.
    """
    _check_statistics(statistics)
    if N < 1 or not 0 <= k < N:
        raise ValueError(f"need 0 <= k < N, got k={k}, N={N}")
    if full is None:
        full = enumerate_full_basis(N, Np)
    rep, _, _ = _orbit_table(full.states, N, Np, statistics)
    reps = full.states[rep == full.states]
    periods = _periods(reps, N)
    phase_R = np.array([_translation_phase(int(r), N, Np, int(R), statistics)
                        for r, R in zip(reps, periods)], dtype=np.int64)
    # phase * e^{-2 pi i k R / N} == 1  <=>  k R / N + [phase == -1] / 2 is an integer
    twice = 2 * k * periods + N * (phase_R == -1)
    keep = twice % (2 * N) == 0
    reps = reps[keep]
    periods = periods[keep]
    norms = 1.0 / np.sqrt(periods)
    for arr in (reps, periods, norms):
        arr.setflags(write=False)
    return SectorBasis(N, Np, k, statistics, reps, periods, norms)


def expansion_matrix(sb: SectorBasis, fb: FullBasis) -> sparse.csr_matrix:
    """Sparse map from sector coefficients to full-basis amplitudes."""
    if (sb.N, sb.Np) != (fb.N, fb.Np):
        raise ValueError("sector and full basis describe different systems")
    N = sb.N
    rows, cols, vals = [], [], []
    col = np.arange(sb.dim)
    for j in range(N):
        active = sb.periods > j
        if not active.any():
            break
        reps = sb.reps[active]
        targets = _rotate(reps, N, j)
        phase = _translation_phase(reps, N, sb.Np, j, sb.statistics)
        rows.append(fb.index(targets))
        cols.append(col[active])
        vals.append(sb.norms[active] * phase * np.exp(-2j * np.pi * sb.k * j / N))
    if not rows:
        return sparse.csr_matrix((fb.dim, 0), dtype=complex)
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(fb.dim, sb.dim),
    )


def expand_to_full(coeffs, sb: SectorBasis, fb: FullBasis, matrix=None) -> np.ndarray:
    """Full-basis amplitudes of a sector vector (or columns of a matrix).

    Pass a precomputed ``expansion_matrix`` to avoid rebuilding it in loops.
    """
    coeffs = np.asarray(coeffs)
    if coeffs.shape[0] != sb.dim:
        raise ValueError(f"expected {sb.dim} sector coefficients, got {coeffs.shape[0]}")
    E = expansion_matrix(sb, fb) if matrix is None else matrix
    return np.asarray(E @ coeffs)
