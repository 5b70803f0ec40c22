"""Dense eigendecomposition, eigenpair cache files and level-window density of states.

Cache file layout (little-endian)::

    "EIGC"  magic, 4 bytes
    u32     format version
    u8      statistics (0 boson, 1 fermion)
    u16 N, u16 Np, i32 k (-1 = full basis)
    f64 t, V, tp, Vp
    u64     dim
    f64[dim]          energies
    c128[dim * dim]   eigenvectors, column-major, (re, im) interleaved
    u64     FNV-1a 64 checksum of all preceding bytes
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numba
import numpy as np
import scipy.linalg

from .basis import (
    FullBasis,
    SectorBasis,
    build_momentum_sector,
    enumerate_full_basis,
    expansion_matrix,
)
from .model import ModelParams, build_hamiltonian_full, build_hamiltonian_sector

__all__ = [
    "EigenPairs",
    "DiagonalizationError",
    "CacheError",
    "CacheFormatError",
    "CacheVersionError",
    "CacheChecksumError",
    "diagonalize",
    "solve",
    "save_eigenpairs",
    "load_eigenpairs",
    "density_of_states",
    "window_bounds",
    "fnv1a64",
    "FORMAT_VERSION",
]

MAGIC = b"EIGC"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIBHHi4dQ")
_STAT_CODE = {"boson": 0, "fermion": 1}
RESIDUAL_TOL = 1e-8
ORTHO_TOL = 1e-10


class DiagonalizationError(RuntimeError):
    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class CacheError(Exception):
    """Base class for unreadable eigenpair cache files."""


class CacheFormatError(CacheError):
    pass


class CacheVersionError(CacheError):
    pass


class CacheChecksumError(CacheError):
    pass


@dataclass(frozen=True, eq=False)
class EigenPairs:
    """Ascending energies with eigenvectors stored as columns.

    ``basis`` is the basis the vectors are expressed in; ``params`` and
    ``basis`` may be None for bare matrices passed to :func:`diagonalize`.
    """

    energies: np.ndarray
    vectors: np.ndarray
    params: ModelParams | None = None
    basis: FullBasis | SectorBasis | None = None
    tol: float = RESIDUAL_TOL

    def __len__(self) -> int:
        return len(self.energies)

    @property
    def dim(self) -> int:
        return len(self.energies)

    @cached_property
    def full_basis(self) -> FullBasis:
        if isinstance(self.basis, FullBasis):
            return self.basis
        if self.basis is None:
            raise ValueError("eigenpairs carry no basis")
        return enumerate_full_basis(self.basis.N, self.basis.Np)

    @cached_property
    def _expansion(self):
        if isinstance(self.basis, SectorBasis):
            return expansion_matrix(self.basis, self.full_basis)
        return None

    def full_vectors(self, idx) -> np.ndarray:
        """Eigenvectors ``idx`` (int, slice or index array) as full-basis amplitudes."""
        v = self.vectors[:, idx]
        if self._expansion is None:
            self.full_basis  # raises for basis-less eigenpairs
            return v
        return np.asarray(self._expansion @ v)

    def sector_to_full(self, coeffs) -> np.ndarray:
        """Map a vector (or columns) in the eigenpairs' basis to full-basis amplitudes."""
        if self._expansion is None:
            return np.asarray(coeffs)
        return np.asarray(self._expansion @ coeffs)


def check_eigenpairs(H: np.ndarray, energies: np.ndarray, vectors: np.ndarray,
                     tol: float = RESIDUAL_TOL) -> float:
    """Largest scaled residual ``|H v - E v| / max(1, |E|)``; raises if above ``tol``."""
    if len(energies) == 0:
        return 0.0
    res = np.linalg.norm(H @ vectors - vectors * energies, axis=0) / np.maximum(1.0, np.abs(energies))
    worst = float(res.max())
    if worst > tol:
        raise DiagonalizationError(f"eigenpair residual {worst:.3e} exceeds {tol:.1e}", worst)
    gram = vectors.conj().T @ vectors
    ortho = float(np.abs(gram - np.eye(len(energies))).max())
    if ortho > ORTHO_TOL:
        raise DiagonalizationError(f"eigenvectors not orthonormal (defect {ortho:.3e})", worst)
    return worst


def diagonalize(H: np.ndarray, check: bool = False, params: ModelParams | None = None,
                basis=None) -> EigenPairs:
    """All eigenpairs of a dense Hermitian matrix via LAPACK ``*heevr``."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if H.size and np.abs(H - H.conj().T).max() > 1e-12:
        raise ValueError("matrix is not Hermitian within 1e-12")
    if H.shape[0] == 0:
        return EigenPairs(np.zeros(0), np.zeros((0, 0), dtype=H.dtype), params, basis)
    try:
        energies, vectors = scipy.linalg.eigh(H, driver="evr", check_finite=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise DiagonalizationError(f"eigensolver failed: {exc}") from exc
    if check:
        check_eigenpairs(H, energies, vectors)
    return EigenPairs(energies, vectors, params, basis)


def solve(p: ModelParams, check: bool = False) -> EigenPairs:
    """Build and diagonalize the block selected by ``p.k`` (full basis if None)."""
    fb = enumerate_full_basis(p.N, p.Np)
    if p.k is None:
        return diagonalize(build_hamiltonian_full(p, fb), check, p, fb)
    sb = build_momentum_sector(p.N, p.Np, p.k, p.statistics, fb)
    return diagonalize(build_hamiltonian_sector(p, sb), check, p, sb)


@numba.njit(cache=True)
def _fnv1a64(data):
    h = np.uint64(0xCBF29CE484222325)
    prime = np.uint64(0x100000001B3)
    for b in data:
        h = (h ^ np.uint64(b)) * prime
    return h


def fnv1a64(data: bytes) -> int:
    return int(_fnv1a64(np.frombuffer(data, dtype=np.uint8)))


def _encode(ep: EigenPairs) -> bytes:
    p = ep.params
    if p is None:
        raise ValueError("eigenpairs without model parameters cannot be cached")
    k = -1 if p.k is None else p.k
    dim = ep.dim
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, _STAT_CODE[p.statistics], p.N, p.Np, k,
                          p.t, p.V, p.tp, p.Vp, dim)
    energies = np.ascontiguousarray(ep.energies, dtype="<f8").tobytes()
    vectors = np.asarray(ep.vectors, dtype="<c16").tobytes(order="F")
    body = header + energies + vectors
    return body + struct.pack("<Q", fnv1a64(body))


def save_eigenpairs(ep: EigenPairs, path) -> Path:
    """Write atomically: temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = _encode(ep)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load_eigenpairs(path) -> EigenPairs:
    data = Path(path).read_bytes()
    if len(data) < 8 or data[:4] != MAGIC:
        raise CacheFormatError(f"{path}: not an eigenpair cache (bad magic)")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != FORMAT_VERSION:
        raise CacheVersionError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    if len(data) < _HEADER.size + 8:
        raise CacheChecksumError(f"{path}: file truncated")
    (stored,) = struct.unpack("<Q", data[-8:])
    if fnv1a64(data[:-8]) != stored:
        raise CacheChecksumError(f"{path}: checksum mismatch")
    _, _, stat, N, Np, k, t, V, tp, Vp, dim = _HEADER.unpack_from(data, 0)
    expected = _HEADER.size + 8 * dim + 16 * dim * dim + 8
    if len(data) != expected or stat not in (0, 1):
        raise CacheFormatError(f"{path}: inconsistent header")
    off = _HEADER.size
    energies = np.frombuffer(data, dtype="<f8", count=dim, offset=off).astype(np.float64)
    off += 8 * dim
    vectors = np.frombuffer(data, dtype="<c16", count=dim * dim, offset=off)
    vectors = vectors.reshape((dim, dim), order="F").astype(np.complex128, order="F")
    statistics = "boson" if stat == 0 else "fermion"
    params = ModelParams(N=N, Np=Np, statistics=statistics, t=t, V=V, tp=tp, Vp=Vp,
                         k=None if k < 0 else k)
    fb = enumerate_full_basis(N, Np)
    if params.k is None:
        # full-basis eigenvectors are real; restore the original dtype
        return EigenPairs(energies, np.ascontiguousarray(vectors.real), params, fb)
    sb = build_momentum_sector(N, Np, params.k, statistics, fb)
    if sb.dim != dim:
        raise CacheFormatError(f"{path}: sector dimension {dim} disagrees with basis ({sb.dim})")
    return EigenPairs(energies, vectors, params, sb)


def window_bounds(i: int, n: int, size: int) -> tuple[int, int]:
    """Half-open window of ``n`` levels centred on ``i``, shifted to stay inside ``[0, size)``.

    The nominal window is ``[i - n//2, i - n//2 + n)``. Windows longer than
    the sequence cover all of it.
    """
    if n < 1:
        raise ValueError(f"window must hold at least one level, got {n}")
    if not 0 <= i < size:
        raise IndexError(f"level {i} outside [0, {size})")
    if n >= size:
        return 0, size
    lo = min(max(i - n // 2, 0), size - n)
    return lo, lo + n


def density_of_states(energies, i: int, n: int = 100) -> float:
    """Levels per unit energy, ``(n - 1) / (E_top - E_bottom)`` over the window at ``i``.

    A window of exactly degenerate levels gives ``inf``.
    """
    if isinstance(energies, EigenPairs):
        energies = energies.energies
    energies = np.asarray(energies)
    if n < 2:
        raise ValueError("density of states needs a window of at least two levels")
    if len(energies) < 2:
        raise ValueError("density of states needs at least two levels")
    lo, hi = window_bounds(i, n, len(energies))
    width = energies[hi - 1] - energies[lo]
    if width <= 0:
        return float("inf")
    return (hi - lo - 1) / width
