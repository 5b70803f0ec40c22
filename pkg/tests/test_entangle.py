from math import log

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigentropy.basis import enumerate_full_basis
from eigentropy.entangle import (
    ReducedDensityMatrix,
    entanglement_entropies,
    entanglement_entropy,
    max_entropy,
    reduced_density_matrix,
)
from eigentropy.model import preset
from eigentropy.spectrum import solve

from oracles import dense_partial_trace, vn_entropy


def test_uniform_single_particle():
    fb = enumerate_full_basis(3, 1)
    rho = reduced_density_matrix(np.ones(3) / np.sqrt(3), fb, 1)
    assert rho.blocks[0] == pytest.approx(np.array([[2 / 3]]), abs=1e-15)
    assert rho.blocks[1] == pytest.approx(np.array([[1 / 3]]), abs=1e-15)
    assert abs(entanglement_entropy(rho) - (log(3) - 2 / 3 * log(2))) < 1e-12


def test_half_half():
    rho = ReducedDensityMatrix(1, {0: np.array([[0.5]]), 1: np.array([[0.5]])})
    assert abs(entanglement_entropy(rho) - log(2)) < 1e-12


def test_product_state_has_zero_entropy():
    fb = enumerate_full_basis(6, 2)
    psi = np.zeros(fb.dim)
    psi[fb.index(0b010001)] = 1.0  # subsystem |10>, bath occupied on site 4
    rho = reduced_density_matrix(psi, fb, 2)
    assert entanglement_entropy(rho) == 0.0
    assert np.linalg.matrix_rank(rho.to_dense()) == 1


def test_rejects_bad_input():
    fb = enumerate_full_basis(6, 2)
    with pytest.raises(ValueError):
        reduced_density_matrix(np.ones(fb.dim), fb, 2)
    psi = np.zeros(fb.dim)
    psi[0] = 1
    for m in (0, 6):
        with pytest.raises(ValueError):
            reduced_density_matrix(psi, fb, m)


@pytest.mark.parametrize("statistics", ["boson", "fermion"])
def test_matches_dense_partial_trace(statistics):
    ep = solve(preset("nonintegrable", 10, 4, statistics, 1))
    fb = ep.full_basis
    for level in (0, 17, ep.dim // 2):
        psi = ep.full_vectors(level)
        for m in (1, 3, 5, 8):
            rho = reduced_density_matrix(psi, fb, m)
            ref = dense_partial_trace(psi, fb.states, 10, m)
            assert np.abs(rho.to_dense() - ref).max() < 1e-13
            assert abs(entanglement_entropy(rho) - vn_entropy(ref)) < 1e-10


@pytest.mark.parametrize("statistics", ["boson", "fermion"])
def test_schmidt_symmetry_and_invariants(statistics):
    N = 11
    ep = solve(preset("nonintegrable", N, 4, statistics, 2))
    fb = ep.full_basis
    rng = np.random.default_rng(2)
    for level in rng.choice(ep.dim, 6, replace=False):
        psi = ep.full_vectors(level)
        S = [entanglement_entropy(reduced_density_matrix(psi, fb, m)) for m in range(1, N)]
        assert np.allclose(S, S[::-1], atol=1e-10)
        for m in (3, N - 3):
            rho = reduced_density_matrix(psi, fb, m)
            assert abs(rho.trace() - 1) < 1e-12
            assert rho.hermiticity_defect() < 1e-12
            assert rho.eigenvalues().min() > -1e-12
            assert 0 <= entanglement_entropy(rho) <= max_entropy(N, 4, m) + 1e-12
        lam_a = reduced_density_matrix(psi, fb, 3).eigenvalues()
        lam_b = reduced_density_matrix(psi, fb, N - 3).eigenvalues()
        big = np.sort(lam_b)[-len(lam_a):]
        assert np.allclose(np.sort(lam_a), big, atol=1e-10)


def test_batched_entropies_match_single():
    ep = solve(preset("integrable", 12, 5, "fermion", 1))
    fb = ep.full_basis
    V = ep.full_vectors(slice(None))
    for m in (2, 6, 10):
        batch = entanglement_entropies(V, fb, m, chunk=7)
        single = [entanglement_entropy(reduced_density_matrix(V[:, i], fb, m)) for i in range(0, ep.dim, 9)]
        assert np.allclose(batch[::9], single, atol=1e-12)


def test_shifted_block_gives_same_entropy():
    # translation-invariant eigenstate: sites 3..6 carry the same entropy as 0..3
    N, m, shift = 10, 4, 3
    ep = solve(preset("nonintegrable", N, 4, "boson", 1))
    fb = ep.full_basis
    psi = ep.full_vectors(10)
    S0 = entanglement_entropy(reduced_density_matrix(psi, fb, m))
    mask = (1 << N) - 1
    # relabel site j + shift -> j so the shifted block sits at sites 0..m-1
    relabelled = [((int(s) >> shift) | (int(s) << (N - shift))) & mask for s in fb.states]
    phi = np.zeros(fb.dim, dtype=complex)
    phi[fb.index(np.array(relabelled, dtype=np.uint64))] = psi
    rho = dense_partial_trace(phi, fb.states, N, m)
    assert abs(vn_entropy(rho) - S0) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_entropy_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    blocks = {}
    for n, d in enumerate((1, 3, 3, 1)):
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        blocks[n] = A @ A.conj().T
    total = sum(np.trace(b).real for b in blocks.values())
    rho = ReducedDensityMatrix(3, {n: b / total for n, b in blocks.items()})
    perm = {n: rng.permutation(b.shape[0]) for n, b in rho.blocks.items()}
    permuted = ReducedDensityMatrix(3, {n: b[np.ix_(perm[n], perm[n])] for n, b in rho.blocks.items()})
    assert entanglement_entropy(permuted) == pytest.approx(entanglement_entropy(rho), abs=1e-12)


def test_concavity_random_pairs():
    ep = solve(preset("nonintegrable", 12, 4, "boson", 1))
    fb = ep.full_basis
    rng = np.random.default_rng(11)
    for _ in range(25):
        i, j = rng.choice(ep.dim, 2, replace=False)
        r1 = reduced_density_matrix(ep.full_vectors(i), fb, 4)
        r2 = reduced_density_matrix(ep.full_vectors(j), fb, 4)
        mix = ReducedDensityMatrix.mixture([r1, r2])
        assert entanglement_entropy(mix) >= 0.5 * (entanglement_entropy(r1) + entanglement_entropy(r2)) - 1e-12
