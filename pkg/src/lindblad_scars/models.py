"""
Hamiltonians: Majorana SYK, charge-projected (complex) SYK, and the random-field XXZ chain.

Disorder streams
----------------
Every realization draws from its own counter-based Philox generator keyed by
``SeedSequence(seed, spawn_key=(model_stream, realization))`` with
``model_stream = 0`` for SYK couplings and ``1`` for XXZ fields. Gaussian
variates come from ``Generator.standard_normal`` (ziggurat), uniforms from
``Generator.uniform``. Couplings are drawn one per sorted ``q``-tuple in
lexicographic order, fields one per site in site order. The same
``(seed, realization)`` therefore reproduces the same Hamiltonian bit for bit,
regardless of which worker builds it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .algebra import (
    MAJORANA,
    SPIN,
    Geometry,
    build_majoranas,
    charge_operator,
    index_tuples,
    occupations,
    pauli_table,
)

SYK_STREAM = 0
XXZ_STREAM = 1


def make_rng(seed: int, realization: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(realization)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SykParams:
    N: int
    q: int = 4
    seed: int = 0
    realization: int = 0

    def __post_init__(self):
        if self.N % 2 or self.q % 2:
            raise ValueError("N and q must both be even")
        if not 2 <= self.q <= self.N:
            raise ValueError(f"need 2 <= q <= N, got q={self.q}, N={self.N}")

    @property
    def coupling_variance(self) -> float:
        q, n = self.q, self.N
        return 2 ** (q - 1) * factorial(q - 1) * n ** (1 - q) / q


@dataclass(frozen=True)
class XxzParams:
    n_sites: int
    J: float = 1.0
    delta: float = 1.1
    h: float = 0.5
    seed: int = 0
    realization: int = 0

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("XXZ chain needs at least two sites")
        if self.h < 0:
            raise ValueError("field half-width h must be non-negative")


@dataclass(frozen=True)
class CouplingTensor:
    """Couplings ``K_{i_1...i_q}`` keyed by sorted 1-based index tuples."""

    N: int
    q: int
    indices: tuple[tuple[int, ...], ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("one value per index tuple required")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("couplings must be finite")

    def __len__(self) -> int:
        return len(self.indices)

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return dict(zip(self.indices, self.values.tolist()))

    @classmethod
    def from_dict(cls, N: int, q: int, mapping: dict[tuple[int, ...], float]) -> "CouplingTensor":
        idx = index_tuples(N, q)
        vals = np.array([float(mapping.get(t, 0.0)) for t in idx])
        return cls(N, q, tuple(idx), vals)


def sample_couplings(p: SykParams) -> CouplingTensor:
    idx = index_tuples(p.N, p.q)
    rng = make_rng(p.seed, p.realization, SYK_STREAM)
    vals = rng.standard_normal(len(idx)) * np.sqrt(p.coupling_variance)
    vals.setflags(write=False)
    return CouplingTensor(p.N, p.q, tuple(idx), vals)


def build_majorana_syk(K: CouplingTensor, geom: Geometry) -> np.ndarray:
    """``H = -i^{q/2} sum K_{i_1..i_q} psi_{i_1} ... psi_{i_q}``."""
    geom.require(MAJORANA)
    if K.N != geom.n:
        raise ValueError(f"couplings built for N={K.N}, geometry has N={geom.n}")
    psi = build_majoranas(geom)
    half = K.q // 2
    pair: dict[tuple[int, int], np.ndarray] = {}

    def pair_product(i: int, j: int) -> np.ndarray:
        if (i, j) not in pair:
            pair[(i, j)] = psi[i - 1] @ psi[j - 1]
        return pair[(i, j)]

    h = np.zeros((geom.dim, geom.dim), dtype=complex)
    for t, k in zip(K.indices, K.values):
        if k == 0.0:
            continue
        term = pair_product(t[0], t[1])
        for a in range(1, half):
            term = term @ pair_product(t[2 * a], t[2 * a + 1])
        h += k * term
    h *= -(1j**half)
    return h


def charge_projector(n: int, geom: Geometry) -> np.ndarray:
    """Projector onto charge ``n``, as the occupation-basis indicator."""
    geom.require(MAJORANA)
    if not 0 <= n <= geom.n_qubits:
        raise ValueError(f"charge {n} outside 0..{geom.n_qubits}")
    return np.diag((occupations(geom) == n).astype(complex))


def charge_projector_fourier(n: int, geom: Geometry) -> np.ndarray:
    """Same projector via ``(M+1)^{-1} sum_s exp(2 pi i s (N_op - n)/(M+1))``, M = N/2.

    Evaluated on the eigenvalues of the (diagonalizable) number operator; used
    as a cross-check of :func:`charge_projector`.
    """
    geom.require(MAJORANA)
    m = geom.n_qubits
    w, v = np.linalg.eigh(charge_operator(geom))
    s = np.arange(m + 1)
    phases = np.exp(2j * np.pi * np.outer(w - n, s) / (m + 1)).sum(axis=1) / (m + 1)
    return (v * phases) @ v.conj().T


def build_complex_syk(H: np.ndarray, geom: Geometry) -> np.ndarray:
    """``H_c = sum_n P_n H P_n``: keep only the charge-conserving matrix elements."""
    occ = occupations(geom)
    return np.where(occ[:, None] == occ[None, :], H, 0.0)


def sample_fields(p: XxzParams) -> np.ndarray:
    rng = make_rng(p.seed, p.realization, XXZ_STREAM)
    return rng.uniform(-p.h, p.h, size=p.n_sites)


def build_xxz(p: XxzParams, geom: Geometry, fields: np.ndarray | None = None) -> np.ndarray:
    """Periodic XXZ chain ``-J sum (XX + YY + Delta ZZ) - sum h_i Z_i``."""
    geom.require(SPIN)
    if geom.n != p.n_sites:
        raise ValueError("site count mismatch between params and geometry")
    h_i = sample_fields(p) if fields is None else np.asarray(fields, dtype=float)
    ops = pauli_table(geom)
    X, Y, Z = ops["X"], ops["Y"], ops["Z"]
    n = geom.n
    H = np.zeros((geom.dim, geom.dim), dtype=complex)
    # n = 2 with periodic wrap counts the single bond twice, as written.
    for i in range(n):
        j = (i + 1) % n
        H -= p.J * (X[i] @ X[j] + Y[i] @ Y[j] + p.delta * Z[i] @ Z[j])
    for i in range(n):
        H -= h_i[i] * Z[i]
    return H


def total_magnetization(geom: Geometry) -> np.ndarray:
    return sum(pauli_table(geom)["Z"])


def n_couplings(N: int, q: int) -> int:
    return comb(N, q)
