"""
Vectorized Lindbladians ``L = -i H0 + HI`` and the direct (matrix-form) Lindblad action.

Vectorization convention
------------------------
Operators are vectorized row-major: ``vec(rho)[a * D + b] = rho[a, b]``, so
``vec(A rho B) = (A kron B^T) vec(rho)``. The left copy is the leftmost tensor
factor. This is the ``PSEUDO`` (pseudo-fermion) and ``SPIN`` basis.

The ``STANDARD`` Majorana scheme (``chi^L = psi x 1``, ``chi^R = P x psi``) is
the same Liouvillian in a rotated basis: ``L_std = U^dag L_pseudo U`` with
``U = exp(i pi P / 4) x C``. Its vectorization is therefore
``vec_std(rho) = U^dag vec(rho)``; :meth:`Liouvillian.vectorize` applies the
right map for each scheme.

Only Hermitian jump operators with ``L_a^2 = a * 1`` are supported, so ``HI``
is Hermitian and the constant ``-mu * a * n_jumps`` is folded into ``HI``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .algebra import (
    MAJORANA,
    SPIN,
    Geometry,
    build_majoranas,
    build_parity,
    charge_conjugation,
    occupations,
    pauli_table,
)
from .models import CouplingTensor


class Scheme(str, Enum):
    STANDARD = "standard"
    PSEUDO = "pseudo"
    SPIN = "spin"


@dataclass(frozen=True)
class JumpSet:
    operators: tuple[np.ndarray, ...]
    mu: float
    hermitian: bool = True
    square_constant: float | None = None

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("dissipation strength mu must be non-negative")
        if not self.operators:
            raise ValueError("empty jump set")

    def __len__(self) -> int:
        return len(self.operators)


def majorana_jumps(geom: Geometry, mu: float) -> JumpSet:
    return JumpSet(build_majoranas(geom), float(mu), True, 0.5)


def spin_jumps(geom: Geometry, mu: float) -> JumpSet:
    return JumpSet(pauli_table(geom)["X"], float(mu), True, 1.0)


def _csr(a) -> sp.csr_matrix:
    m = sp.csr_matrix(a, dtype=complex)
    m.eliminate_zeros()
    return m


def _left(a: np.ndarray) -> sp.csr_matrix:
    return sp.kron(_csr(a), sp.identity(a.shape[0], dtype=complex, format="csr"), format="csr")


def _right(a: np.ndarray) -> sp.csr_matrix:
    return sp.kron(sp.identity(a.shape[0], dtype=complex, format="csr"), _csr(a), format="csr")


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Vectorized Lindbladian split into Hermitian ``H0 = HL - HR`` and ``HI``.

    ``pairs[a]`` is the Hermitian left-right coupling of jump ``a`` so that
    ``HI = mu * sum(pairs) + shift``. All pieces are sparse; the dense matrix
    is produced on demand by :meth:`dense`.
    """

    HL: sp.csr_matrix
    HR: sp.csr_matrix
    HI: sp.csr_matrix
    pairs: tuple[sp.csr_matrix, ...]
    shift: float
    scheme: Scheme
    geom: Geometry
    mu: float
    model: str = "generic"
    q: int | None = None
    basis: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def H0(self) -> sp.csr_matrix:
        return (self.HL - self.HR).tocsr()

    @property
    def dim(self) -> int:
        return self.HI.shape[0]

    def sparse(self) -> sp.csr_matrix:
        return (-1j * self.H0 + self.HI).tocsr()

    def dense(self) -> np.ndarray:
        return self.sparse().toarray()

    def norm(self) -> float:
        """Max absolute row sum of ``L`` (an upper bound on the spectral radius)."""
        return float(abs(self.sparse()).sum(axis=1).max())

    def __matmul__(self, v):
        return self.sparse() @ v

    def vectorize(self, rho: np.ndarray) -> np.ndarray:
        v = np.asarray(rho, dtype=complex).reshape(-1)
        return v if self.basis is None else self.basis.conj().T @ v

    def unvectorize(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        if self.basis is not None:
            v = self.basis @ v
        d = self.geom.dim
        return v.reshape(d, d)

    def left(self, op: np.ndarray) -> sp.csr_matrix:
        """``op`` acting on the left copy, expressed in this scheme's basis."""
        # chi^L = psi x 1 in both fermionic schemes, so even and odd operators
        # alike act as op x 1.
        return _left(op)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1)


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(d, d)


def _dissipator_pieces(jumps: JumpSet, d: int) -> tuple[tuple[sp.csr_matrix, ...], float]:
    if not jumps.hermitian:
        raise ValueError("only Hermitian jump operators are supported")
    eye = np.eye(d)
    pairs = []
    const = 0.0
    for op in jumps.operators:
        sq = op.conj().T @ op
        a = jumps.square_constant
        if a is None:
            a = float(np.real(sq[0, 0]))
        if np.abs(sq - a * eye).max() > 1e-12:
            raise ValueError("jump operators must square to a multiple of the identity")
        pairs.append(sp.kron(_csr(op), _csr(op.conj()), format="csr"))
        const -= a
    return tuple(pairs), const


def standard_basis(geom: Geometry) -> sp.csr_matrix:
    """``U = exp(i pi P / 4) x C`` mapping standard-scheme states to row-major vectors."""
    P = build_parity(geom)
    C = charge_conjugation(geom)
    rot = (np.eye(geom.dim) + 1j * P) / np.sqrt(2)
    return sp.kron(_csr(rot), _csr(C), format="csr")


def vectorize_majorana(
    H: np.ndarray,
    jumps: JumpSet,
    scheme: Scheme | str,
    geom: Geometry,
    *,
    couplings: CouplingTensor | None = None,
    model: str = "majorana-syk",
    q: int | None = None,
) -> Liouvillian:
    """Vectorize a fermionic Lindbladian with Majorana jumps ``L_i = psi_i``.

    In the ``PSEUDO`` scheme ``HL = H x 1``, ``HR = 1 x H^*`` and
    ``HI = mu sum_k psi_k x psi_k^* - N mu / 2``. In the ``STANDARD`` scheme
    ``HI = i mu sum_k chi_k^L chi_k^R - N mu / 2`` and ``HR`` is ``H`` rebuilt
    from ``chi^R`` with conjugated string coefficients, which for the SYK
    couplings is the ``(-1)^{q/2}`` factor. When ``couplings`` are given the
    standard-scheme ``HL``/``HR`` are built literally from products of
    ``chi`` instead.
    """
    scheme = Scheme(scheme)
    geom.require(MAJORANA)
    d = geom.dim
    if H.shape != (d, d):
        raise ValueError("Hamiltonian does not match geometry")
    if scheme is Scheme.SPIN:
        raise ValueError("spin scheme cannot vectorize a fermionic model")
    psi = build_majoranas(geom)
    if len(jumps) != geom.n or any(
        np.abs(j - p).max() > 1e-14 for j, p in zip(jumps.operators, psi)
    ):
        raise ValueError("fermionic vectorization expects jumps L_i = psi_i")
    mu = jumps.mu

    if scheme is Scheme.PSEUDO:
        HL = _left(H)
        HR = _right(H.conj())
        pairs, const = _dissipator_pieces(jumps, d)
        basis = None
    else:
        P = build_parity(geom)
        if couplings is not None:
            HL, HR = _standard_hamiltonians_from_couplings(couplings, geom)
        else:
            C = charge_conjugation(geom)
            HL = _left(H)
            HR = _right(C.conj().T @ H.conj() @ C)
        pairs = tuple(
            (1j * sp.kron(_csr(p @ P), _csr(p), format="csr")).tocsr() for p in psi
        )
        const = -0.5 * geom.n
        basis = standard_basis(geom)
    HI = (mu * sum(pairs[1:], pairs[0]) + mu * const * sp.identity(d * d, format="csr")).tocsr()
    return Liouvillian(HL, HR, HI, pairs, mu * const, scheme, geom, mu, model, q, basis)


def _standard_hamiltonians_from_couplings(K: CouplingTensor, geom: Geometry):
    psi = build_majoranas(geom)
    P = build_parity(geom)
    d = geom.dim
    eye = np.eye(d)
    chiL = [sp.kron(_csr(p), _csr(eye), format="csr") for p in psi]
    chiR = [sp.kron(_csr(P), _csr(p), format="csr") for p in psi]
    half = K.q // 2
    HL = sp.csr_matrix((d * d, d * d), dtype=complex)
    HR = sp.csr_matrix((d * d, d * d), dtype=complex)
    for t, k in zip(K.indices, K.values):
        termL = chiL[t[0] - 1]
        termR = chiR[t[0] - 1]
        for i in t[1:]:
            termL = termL @ chiL[i - 1]
            termR = termR @ chiR[i - 1]
        HL = HL + k * termL
        HR = HR + k * termR
    pref = -(1j**half)
    return (pref * HL).tocsr(), (pref * (-1) ** half * HR).tocsr()


def vectorize_spin(H_S: np.ndarray, jumps: JumpSet, geom: Geometry, model: str = "xxz") -> Liouvillian:
    """``L = -i(H_S x 1 - 1 x H_S^*) + mu sum_i X_i x X_i^* - N mu``."""
    geom.require(SPIN)
    d = geom.dim
    pairs, const = _dissipator_pieces(jumps, d)
    mu = jumps.mu
    HI = (mu * sum(pairs[1:], pairs[0]) + mu * const * sp.identity(d * d, format="csr")).tocsr()
    return Liouvillian(_left(H_S), _right(H_S.conj()), HI, pairs, mu * const, Scheme.SPIN, geom, mu, model)


def apply_lindblad_direct(H: np.ndarray, jumps: JumpSet, rho: np.ndarray) -> np.ndarray:
    """``-i[H, rho] + mu sum_a (L rho L^dag - {L^dag L, rho} / 2)`` in matrix form."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != H.shape:
        raise ValueError(f"rho has shape {rho.shape}, H has {H.shape}")
    out = -1j * (H @ rho - rho @ H)
    for L in jumps.operators:
        Ld = L.conj().T
        LdL = Ld @ L
        out += jumps.mu * (L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL))
    return out


def tfd_state(geom: Geometry, scheme: Scheme | str) -> np.ndarray:
    """Unit-norm infinite-temperature TFD, i.e. the vectorized ``1 / sqrt(D)``."""
    scheme = Scheme(scheme)
    v = vec(np.eye(geom.dim)) / np.sqrt(geom.dim)
    if scheme is Scheme.STANDARD:
        v = standard_basis(geom).conj().T @ v
    return v


# ---------------------------------------------------------------------------
# symmetry helpers
# ---------------------------------------------------------------------------


def swap_operator(d: int) -> sp.csr_matrix:
    """Permutation exchanging the left and right copies: ``|a, b> -> |b, a>``."""
    idx = np.arange(d * d)
    a, b = np.divmod(idx, d)
    return sp.csr_matrix((np.ones(d * d), (b * d + a, idx)), shape=(d * d, d * d), dtype=complex)


def popcount(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    out = np.zeros_like(x)
    while np.any(x):
        out += x & 1
        x = x >> 1
    return out


def z_string_diagonal(geom: Geometry) -> np.ndarray:
    """Diagonal of ``prod_k Z_k`` on one copy in the computational basis."""
    return (-1.0) ** popcount(np.arange(geom.dim))


def spin_symmetries(geom: Geometry) -> dict[str, sp.csr_matrix]:
    """``prod Z^L Z^R``, ``SWAP prod Z^L`` and ``SWAP`` for the spin vectorization."""
    d = geom.dim
    z = z_string_diagonal(geom)
    zl = sp.diags(np.kron(z, np.ones(d))).astype(complex)
    zr = sp.diags(np.kron(np.ones(d), z)).astype(complex)
    swap = swap_operator(d)
    return {"parity": (zl @ zr).tocsr(), "chiral": (swap @ zl).tocsr(), "swap": swap}


def sector_labels(L: Liouvillian) -> np.ndarray | None:
    """Conserved label per basis vector, or ``None`` when no cheap label is known.

    Majorana SYK and XXZ: total parity of the two copies. Complex SYK: the
    operator charge ``|n_L - n_R|``. Sectors ``+d`` and ``-d`` are exchanged
    by the Hermitian-conjugation symmetry and share eigenvalues, so they are
    kept together; a dense solver would mix them the same way.
    """
    if L.scheme is Scheme.STANDARD:
        return None
    d = L.geom.dim
    a, b = np.divmod(np.arange(d * d), d)
    if L.model == "complex-syk":
        occ = occupations(L.geom)
        return np.abs(occ[a] - occ[b])
    return (popcount(a) + popcount(b)) % 2


def symmetry_sectors(L: Liouvillian) -> list[np.ndarray] | None:
    labels = sector_labels(L)
    if labels is None:
        return None
    return [np.flatnonzero(labels == v) for v in np.unique(labels)]


def left_operator_state(L: Liouvillian, op: np.ndarray, ref: np.ndarray | None = None) -> np.ndarray:
    """``op^L |0>`` normalized, with ``|0>`` the scheme's TFD unless ``ref`` is given."""
    ref = tfd_state(L.geom, L.scheme) if ref is None else ref
    v = L.left(op) @ ref
    return v / np.linalg.norm(v)
