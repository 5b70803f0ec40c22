"""Entropy curves, subsystem profiles, fluctuation scaling and observable checks.

The array-valued functions (``*_entropies``) are the workhorses; the record
builders wrap them into rows for output.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .ensembles import complex_gaussian, smoothed_series, window_seed
from .entangle import entanglement_entropies, entropy_from_eigenvalues, rdm_blocks
from .spectrum import EigenPairs, density_of_states, window_bounds

__all__ = [
    "Mode",
    "EntropyRecord",
    "FluctuationRecord",
    "SubsystemProfile",
    "EthCheck",
    "model_descriptor",
    "eigenstate_entropies",
    "microcanonical_entropies",
    "random_entropies",
    "mode_entropies",
    "entropy_vs_energy",
    "entropy_vs_subsystem",
    "entropy_fluctuation",
    "fluctuation_from_entropies",
    "eth_observable_check",
]

CHUNK = 256


@dataclass(frozen=True)
class Mode:
    """How an entropy curve is produced: ``eigenstate``, ``microcanonical``,
    ``random`` or ``smoothed``, with window width ``n`` and (random only) a seed."""

    kind: str
    n: int = 1
    seed: int | None = None

    KINDS = ("eigenstate", "microcanonical", "random", "smoothed")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown mode {self.kind!r}; expected one of {self.KINDS}")
        if self.n < 1:
            raise ValueError("window width must be >= 1")
        if self.kind == "random" and self.seed is None:
            raise ValueError("random mode needs a seed")

    @property
    def tag(self) -> str:
        if self.kind == "eigenstate":
            return "eigenstate"
        if self.kind == "random":
            return f"random(n={self.n},seed={self.seed})"
        return f"{self.kind}(n={self.n})"

    @classmethod
    def parse(cls, text: str, n: int = 1, seed: int | None = None) -> "Mode":
        """Accepts ``"eigenstate"``, ``"smoothed"``, ``"microcanonical(n=100)"`` or ``"random(n=100,seed=3)"``."""
        match = re.fullmatch(r"\s*(\w+)\s*(?:\((.*)\))?\s*", text)
        if not match:
            raise ValueError(f"cannot parse mode {text!r}")
        kind, args = match.groups()
        opts = {"n": n, "seed": seed}
        for part in filter(None, (args or "").split(",")):
            key, _, value = part.partition("=")
            if key.strip() not in opts:
                raise ValueError(f"unknown mode option {key!r}")
            opts[key.strip()] = int(value)
        if kind == "eigenstate":
            return cls(kind)
        if kind != "random":
            opts["seed"] = None
        return cls(kind, **opts)


@dataclass(frozen=True)
class EntropyRecord:
    level: int
    energy: float
    entropy: float
    mode: str
    m: int
    model: str


@dataclass(frozen=True)
class FluctuationRecord:
    model: str
    N: int
    Np: int
    m: int
    n: int
    sigma: float
    dos: float
    center: int
    center_energy: float


@dataclass(frozen=True)
class SubsystemProfile:
    level: int
    m: np.ndarray
    entropy: np.ndarray
    slope: float
    intercept: float
    residual: float  # 1 - R^2 of the linear fit over m = 1 .. N // 2


@dataclass(frozen=True)
class EthCheck:
    eigenstate: np.ndarray
    microcanonical: np.ndarray
    density0: np.ndarray


def model_descriptor(ep: EigenPairs) -> str:
    p = ep.params
    if p is None:
        return "unknown"
    k = "full" if p.k is None else p.k
    return (f"{p.statistics} N={p.N} Np={p.Np} k={k} "
            f"t={p.t:g} V={p.V:g} tp={p.tp:g} Vp={p.Vp:g}")


def eigenstate_entropies(ep: EigenPairs, m: int, chunk: int = CHUNK) -> np.ndarray:
    """Entanglement entropy of every eigenstate for the subsystem of ``m`` sites."""
    out = np.empty(ep.dim)
    for lo in range(0, ep.dim, chunk):
        hi = min(lo + chunk, ep.dim)
        out[lo:hi] = entanglement_entropies(ep.full_vectors(slice(lo, hi)), ep.full_basis, m)
    return out


def microcanonical_entropies(ep: EigenPairs, m: int, n: int, chunk: int = CHUNK) -> np.ndarray:
    """Entropy of the window-averaged subsystem density matrix, one value per level."""
    if n > ep.dim:
        raise ValueError(f"window of {n} levels exceeds spectrum of {ep.dim}")
    parts: dict[int, list[np.ndarray]] = {}
    for lo in range(0, ep.dim, chunk):
        hi = min(lo + chunk, ep.dim)
        for key, blk in rdm_blocks(ep.full_vectors(slice(lo, hi)), ep.full_basis, m).items():
            parts.setdefault(key, []).append(blk)
    lam = []
    for key, blks in parts.items():
        stacked = np.concatenate(blks, axis=0)
        windows = sliding_window_view(stacked, n, axis=0).mean(axis=-1)
        lam.append(np.linalg.eigvalsh(windows))
    per_start = entropy_from_eigenvalues(np.concatenate(lam, axis=-1))
    starts = np.array([window_bounds(i, n, ep.dim)[0] for i in range(ep.dim)])
    return per_start[starts]


def random_entropies(ep: EigenPairs, m: int, n: int, seed: int, chunk: int = CHUNK) -> np.ndarray:
    """Entropy of a random superposition over the window at every level.

    The window centred on level ``j`` draws its coefficients with seed ``seed ^ j``.
    """
    if n > ep.dim:
        raise ValueError(f"window of {n} levels exceeds spectrum of {ep.dim}")
    out = np.empty(ep.dim)
    for start in range(0, ep.dim, chunk):
        centers = range(start, min(start + chunk, ep.dim))
        coeffs = np.zeros((ep.dim, len(centers)), dtype=complex)
        for col, j in enumerate(centers):
            lo, hi = window_bounds(j, n, ep.dim)
            coeffs[lo:hi, col] = complex_gaussian(hi - lo, window_seed(seed, j))
        psi = ep.sector_to_full(ep.vectors @ coeffs)
        psi /= np.linalg.norm(psi, axis=0)
        out[start:start + len(centers)] = entanglement_entropies(psi, ep.full_basis, m)
    return out


def mode_entropies(ep: EigenPairs, m: int, mode: Mode, eigen: np.ndarray | None = None) -> np.ndarray:
    if mode.kind == "eigenstate":
        return eigenstate_entropies(ep, m) if eigen is None else eigen
    if mode.kind == "smoothed":
        return smoothed_series(eigenstate_entropies(ep, m) if eigen is None else eigen, mode.n)
    if mode.kind == "microcanonical":
        return microcanonical_entropies(ep, m, mode.n)
    return random_entropies(ep, m, mode.n, mode.seed)


def entropy_vs_energy(ep: EigenPairs, m: int, mode: Mode | str) -> list[EntropyRecord]:
    """One record per level; windowed modes report the window centred on that level."""
    if isinstance(mode, str):
        mode = Mode.parse(mode)
    values = mode_entropies(ep, m, mode)
    desc = model_descriptor(ep)
    return [EntropyRecord(i, float(ep.energies[i]), float(s), mode.tag, m, desc)
            for i, s in enumerate(values)]


def _fluctuation_center(entropies, n: int) -> int:
    return int(np.argmax(smoothed_series(entropies, n)))


def entropy_vs_subsystem(ep: EigenPairs, level: int | None = None, m_range=None,
                         locate_m: int = 4, n: int = 100) -> SubsystemProfile:
    """S(m) for one eigenstate and a straight-line fit over ``m = 1 .. N // 2``.

    Without ``level`` the eigenstate at the maximum of the smoothed
    ``locate_m``-site entropy curve is used.
    """
    fb = ep.full_basis
    N = fb.N
    if level is None:
        locate_m = min(max(locate_m, 1), N - 1)
        level = _fluctuation_center(eigenstate_entropies(ep, locate_m), min(n, ep.dim))
    ms = np.arange(1, N) if m_range is None else np.asarray(list(m_range), dtype=int)
    if ms.size == 0 or ms.min() < 1 or ms.max() > N - 1:
        raise ValueError(f"subsystem sizes must lie in [1, {N - 1}]")
    psi = ep.full_vectors(level)
    S = np.array([entanglement_entropies(psi, fb, int(m)) for m in ms])
    fit_m = np.arange(1, N // 2 + 1)
    fit_S = np.array([entanglement_entropies(psi, fb, int(m)) for m in fit_m])
    if len(fit_m) >= 2:
        slope, intercept = np.polyfit(fit_m, fit_S, 1)
        ss_res = float(np.sum((fit_S - (slope * fit_m + intercept)) ** 2))
        ss_tot = float(np.sum((fit_S - fit_S.mean()) ** 2))
        residual = ss_res / ss_tot if ss_tot > 0 else 0.0
    else:
        slope, intercept, residual = float("nan"), float("nan"), 0.0
    return SubsystemProfile(int(level), ms, S, float(slope), float(intercept), residual)


def fluctuation_from_entropies(energies, entropies, n: int = 100) -> tuple[float, float, int]:
    """``(sigma, dos, center)`` for the ``n``-level window at the smoothed maximum.

    ``sigma`` is the sample standard deviation (divisor ``n - 1``).
    """
    entropies = np.asarray(entropies, dtype=float)
    if len(entropies) < n:
        raise ValueError(f"spectrum of {len(entropies)} levels is smaller than the window {n}")
    if n < 2:
        raise ValueError("fluctuations need a window of at least two levels")
    center = _fluctuation_center(entropies, n)
    lo, hi = window_bounds(center, n, len(entropies))
    sigma = float(np.std(entropies[lo:hi], ddof=1))
    return sigma, density_of_states(energies, center, n), center


def entropy_fluctuation(ep: EigenPairs, m: int, n: int = 100,
                        entropies: np.ndarray | None = None) -> FluctuationRecord:
    if ep.dim < n:
        raise ValueError(f"spectrum of {ep.dim} levels is smaller than the window {n}")
    S = eigenstate_entropies(ep, m) if entropies is None else entropies
    sigma, dos, center = fluctuation_from_entropies(ep.energies, S, n)
    fb = ep.full_basis
    return FluctuationRecord(model_descriptor(ep), fb.N, fb.Np, m, n, sigma, dos, center,
                             float(ep.energies[center]))


def _occupation_diagonal(states: np.ndarray, observable) -> np.ndarray:
    if observable in ("n0n1", "nn"):
        observable = (0, 1)
    i, j = (int(x) for x in observable)
    ni = (states >> np.uint64(i)) & np.uint64(1)
    nj = (states >> np.uint64(j)) & np.uint64(1)
    return (ni & nj).astype(float)


def eth_observable_check(ep: EigenPairs, observable="n0n1", n: int = 100,
                         chunk: int = CHUNK) -> EthCheck:
    """Eigenstate and window-averaged expectations of the density correlator ``n_i n_j``.

    ``observable`` is ``"n0n1"`` or a site pair ``(i, j)``. ``density0`` is
    ``<n_0>`` in every eigenstate.
    """
    states = ep.full_basis.states
    diag = _occupation_diagonal(states, observable)
    occ0 = (states & np.uint64(1)).astype(float)
    eig = np.empty(ep.dim)
    dens = np.empty(ep.dim)
    for lo in range(0, ep.dim, chunk):
        hi = min(lo + chunk, ep.dim)
        weight = np.abs(ep.full_vectors(slice(lo, hi))) ** 2
        eig[lo:hi] = diag @ weight
        dens[lo:hi] = occ0 @ weight
    micro = smoothed_series(eig, min(n, ep.dim))
    return EthCheck(eig, micro, dens)
