import numpy as np
import pytest
from hypothesis import given, strategies as st

from lindblad_scars.algebra import Geometry, build_majoranas, build_parity
from lindblad_scars.liouville import (
    JumpSet,
    Scheme,
    apply_lindblad_direct,
    majorana_jumps,
    spin_jumps,
    spin_symmetries,
    swap_operator,
    symmetry_sectors,
    tfd_state,
    unvec,
    vec,
    vectorize_majorana,
)
from lindblad_scars.spectral import eigvals, multiset_distance

from conftest import majorana_liouvillian, xxz_liouvillian


def _random_rho(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def test_vec_convention():
    A, B, X = (np.arange(9).reshape(3, 3) + k for k in range(3))
    np.testing.assert_allclose(np.kron(A, B.T) @ vec(X), vec(A @ X @ B))
    np.testing.assert_array_equal(unvec(vec(X), 3), X)


@pytest.mark.parametrize("N", [6, 8])
@pytest.mark.parametrize("scheme", ["pseudo", "standard"])
def test_direct_action_oracle(N, scheme, rng):
    L, H = majorana_liouvillian(N, scheme=scheme)
    jumps = majorana_jumps(L.geom, L.mu)
    for _ in range(10):
        rho = _random_rho(rng, L.geom.dim)
        got = L.unvectorize(L @ L.vectorize(rho))
        np.testing.assert_allclose(got, apply_lindblad_direct(H, jumps, rho), atol=1e-12)


def test_direct_action_oracle_spin(rng):
    L, H = xxz_liouvillian(4)
    jumps = spin_jumps(L.geom, L.mu)
    for _ in range(10):
        rho = _random_rho(rng, 16)
        np.testing.assert_allclose(unvec(L @ vec(rho), 16), apply_lindblad_direct(H, jumps, rho), atol=1e-12)


@pytest.mark.parametrize("N", [6, 8])
def test_schemes_isospectral(N):
    Lp, _ = majorana_liouvillian(N, scheme="pseudo")
    Ls, _ = majorana_liouvillian(N, scheme="standard")
    assert multiset_distance(eigvals(Lp), eigvals(Ls, real=False)) < 1e-8


def test_parity_eigenoperator():
    geom = Geometry.majorana(8)
    L, H = majorana_liouvillian(8)
    P = build_parity(geom)
    out = apply_lindblad_direct(np.zeros_like(H), majorana_jumps(geom, 0.1), P)
    np.testing.assert_allclose(out, -8 * 0.1 * P, atol=1e-14)
    np.testing.assert_allclose(L.HI @ vec(P), -0.8 * vec(P), atol=1e-14)


@pytest.mark.parametrize("scheme", ["pseudo", "standard"])
def test_hermitian_split(scheme):
    L, _ = majorana_liouvillian(6, scheme=scheme)
    for M in (L.H0, L.HI):
        assert abs(M - M.conj().T).max() < 1e-13
    np.testing.assert_allclose(L.dense(), -1j * L.H0.toarray() + L.HI.toarray(), atol=1e-15)


@pytest.mark.parametrize("scheme", ["pseudo", "standard"])
def test_tfd_is_steady(scheme):
    L, _ = majorana_liouvillian(8, scheme=scheme)
    v = tfd_state(L.geom, scheme)
    assert np.linalg.norm(v) == pytest.approx(1)
    assert np.linalg.norm(L @ v) < 1e-13


def test_standard_basis_unitary():
    L, _ = majorana_liouvillian(6, scheme="standard")
    U = L.basis.toarray()
    np.testing.assert_allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-13)


def test_jump_validation():
    geom = Geometry.majorana(4)
    psi = build_majoranas(geom)
    bad = JumpSet(tuple(2 * p for p in psi), 0.1)
    with pytest.raises(ValueError):
        vectorize_majorana(np.zeros((4, 4)), bad, Scheme.PSEUDO, geom)
    with pytest.raises(ValueError):
        JumpSet(psi, -1.0)


@given(st.integers(0, 20))
def test_sectors_block_diagonal(realization):
    for L in (majorana_liouvillian(6, realization=realization)[0],
              majorana_liouvillian(6, realization=realization, complex_model=True)[0],
              xxz_liouvillian(3, realization=realization)[0]):
        A = L.sparse().tocoo()
        label = np.empty(L.dim, dtype=int)
        for k, idx in enumerate(symmetry_sectors(L)):
            label[idx] = k
        assert np.all(label[A.row] == label[A.col])


def test_spin_symmetries():
    L, _ = xxz_liouvillian(4)
    A = L.sparse()
    shift = 4 * 0.1
    eye = np.eye(L.dim)
    Ls = A.toarray() + shift * eye
    sym = spin_symmetries(L.geom)
    Pi = sym["parity"].toarray()
    np.testing.assert_allclose(Pi @ Ls, Ls @ Pi, atol=1e-13)
    G = sym["chiral"].toarray()
    # the real XXZ Hamiltonian makes SWAP reverse H_0 while prod Z^L reverses the shifted H_I
    np.testing.assert_allclose(G @ Ls @ G.conj().T, -Ls, atol=1e-13)
    S = swap_operator(16).toarray()
    np.testing.assert_allclose(S @ S, eye)
