"""
Matrix representations of Majorana fermions, Pauli operators and operator strings.

Representation
--------------
Majoranas are built with a Jordan-Wigner chain over ``N/2`` qubits. Qubit 1 is
the leftmost (most significant) tensor factor, and Majoranas ``2k-1, 2k`` live
on qubit ``k``::

    psi_{2k-1} = Z x ... x Z x X x 1 x ... x 1 / sqrt(2)
    psi_{2k}   = Z x ... x Z x Y x 1 x ... x 1 / sqrt(2)

so that ``{psi_i, psi_j} = delta_ij`` and odd Majoranas are real while even
ones are purely imaginary. With this choice ``n_k = a_k^dag a_k = (1 + Z_k)/2``,
i.e. bit value 0 of qubit ``k`` means the mode is occupied.

All builders return read-only dense ``complex128`` arrays; they are cached per
geometry and can be shared freely between workers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterator, Sequence

import numpy as np

I2 = np.eye(2, dtype=complex)
PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
for _m in PAULI.values():
    _m.setflags(write=False)

MAJORANA = "majorana"
SPIN = "spin"


@dataclass(frozen=True)
class Geometry:
    """Layout of the single-copy Hilbert space.

    ``n`` is the number of Majoranas for ``kind == "majorana"`` and the number
    of sites for ``kind == "spin"``.
    """

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in (MAJORANA, SPIN):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("geometry needs at least one degree of freedom")
        if self.kind == MAJORANA and self.n % 2:
            raise ValueError(f"Majorana count must be even, got N={self.n}")

    @classmethod
    def majorana(cls, n: int) -> "Geometry":
        return cls(MAJORANA, int(n))

    @classmethod
    def spin(cls, n_sites: int) -> "Geometry":
        return cls(SPIN, int(n_sites))

    @property
    def n_qubits(self) -> int:
        return self.n // 2 if self.kind == MAJORANA else self.n

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def require(self, kind: str) -> None:
        if self.kind != kind:
            raise ValueError(f"operation needs a {kind} geometry, got {self.kind}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=complex)
    a.setflags(write=False)
    return a


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, ops)


def embed(op: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Place a 2x2 ``op`` on ``qubit`` (1-based) with identities elsewhere."""
    factors = [I2] * n_qubits
    factors[qubit - 1] = op
    return kron_all(factors)


@lru_cache(maxsize=None)
def build_majoranas(geom: Geometry) -> tuple[np.ndarray, ...]:
    geom.require(MAJORANA)
    nq = geom.n_qubits
    out = []
    for k in range(1, nq + 1):
        for axis in ("X", "Y"):
            factors = [PAULI["Z"]] * (k - 1) + [PAULI[axis]] + [I2] * (nq - k)
            out.append(_frozen(kron_all(factors) / np.sqrt(2)))
    return tuple(out)


@lru_cache(maxsize=None)
def build_parity(geom: Geometry) -> np.ndarray:
    """``P = 2^{N/2} i^{N(N-1)/2} psi_1 ... psi_N``: Hermitian, ``P^2 = 1``."""
    psi = build_majoranas(geom)
    n = geom.n
    prod = reduce(np.matmul, psi)
    phase = 1j ** ((n * (n - 1) // 2) % 4)
    return _frozen(2 ** (n / 2) * phase * prod)


def build_pauli(site: int, axis: str, geom: Geometry) -> np.ndarray:
    geom.require(SPIN)
    if not 1 <= site <= geom.n:
        raise ValueError(f"site {site} outside 1..{geom.n}")
    return _frozen(embed(PAULI[axis.upper()], site, geom.n))


@lru_cache(maxsize=None)
def pauli_table(geom: Geometry) -> dict[str, tuple[np.ndarray, ...]]:
    """All single-site Paulis keyed by axis, indexed by ``site - 1``."""
    return {ax: tuple(build_pauli(i, ax, geom) for i in range(1, geom.n + 1)) for ax in "XYZ"}


@dataclass(frozen=True)
class MajoranaString:
    """Sorted set of Majorana indices (1-based) with bitmask bookkeeping.

    Bit ``i - 1`` of :attr:`mask` is set when ``psi_i`` appears in the string.
    """

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"string indices must be strictly increasing: {idx}")
        if idx and idx[0] < 1:
            raise ValueError("string indices are 1-based")
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def mask(self) -> int:
        return sum(1 << (i - 1) for i in self.indices)

    @classmethod
    def from_mask(cls, mask: int) -> "MajoranaString":
        return cls(tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1))

    @property
    def normalization(self) -> float:
        return 2 ** (self.size / 2)

    def even_odd_counts(self) -> tuple[int, int]:
        even = sum(1 for i in self.indices if i % 2 == 0)
        return even, self.size - even


def all_strings(n: int) -> Iterator[MajoranaString]:
    """Every Majorana string over ``n`` Majoranas, ordered by bitmask."""
    for mask in range(2**n):
        yield MajoranaString.from_mask(mask)


def string_matrix(s: MajoranaString, geom: Geometry) -> np.ndarray:
    """``Gamma_s = 2^{p/2} psi_{n_1} ... psi_{n_p}`` (identity for the empty string)."""
    geom.require(MAJORANA)
    if s.indices and s.indices[-1] > geom.n:
        raise ValueError(f"string {s.indices} exceeds N={geom.n}")
    psi = build_majoranas(geom)
    out = np.eye(geom.dim, dtype=complex)
    for i in s.indices:
        out = out @ psi[i - 1]
    return _frozen(s.normalization * out)


def normalized_trace(a: np.ndarray, b: np.ndarray | None = None) -> complex:
    """``Tr[a b] / D`` (or ``Tr[a] / D``)."""
    if b is None:
        return complex(np.trace(a)) / a.shape[0]
    return complex(np.einsum("ij,ji->", a, b)) / a.shape[0]


@lru_cache(maxsize=None)
def complex_fermions(geom: Geometry) -> tuple[np.ndarray, ...]:
    """Annihilators ``a_k = (psi_{2k-1} - i psi_{2k}) / sqrt(2)``, k = 1..N/2."""
    psi = build_majoranas(geom)
    return tuple(
        _frozen((psi[2 * k] - 1j * psi[2 * k + 1]) / np.sqrt(2)) for k in range(geom.n_qubits)
    )


@lru_cache(maxsize=None)
def number_operators(geom: Geometry) -> tuple[np.ndarray, ...]:
    """``n_k = 1/2 - i psi_{2k-1} psi_{2k}``."""
    psi = build_majoranas(geom)
    eye = np.eye(geom.dim)
    return tuple(
        _frozen(eye / 2 - 1j * psi[2 * k] @ psi[2 * k + 1]) for k in range(geom.n_qubits)
    )


@lru_cache(maxsize=None)
def charge_operator(geom: Geometry) -> np.ndarray:
    return _frozen(sum(number_operators(geom)))


def occupations(geom: Geometry) -> np.ndarray:
    """Charge of each computational basis state (the diagonal of the number operator)."""
    return np.rint(np.real(np.diag(charge_operator(geom)))).astype(int)


@lru_cache(maxsize=None)
def charge_conjugation(geom: Geometry) -> np.ndarray:
    """Unitary ``C`` with ``C psi_k C^{-1} = psi_k^*`` in this representation.

    In the Jordan-Wigner chain the odd Majoranas are real and the even ones
    imaginary, so ``C`` must commute with the former and anticommute with the
    latter. The product of the imaginary Majoranas does this when ``N/2`` is
    even, the product of the real ones when ``N/2`` is odd.
    """
    psi = build_majoranas(geom)
    half = geom.n_qubits
    start = 1 if half % 2 == 0 else 0
    c = reduce(np.matmul, [np.sqrt(2) * psi[i] for i in range(start, geom.n, 2)])
    return _frozen(c)


def pauli_product(axes: str, geom: Geometry) -> np.ndarray:
    """Tensor product with one axis letter (``I``, ``X``, ``Y``, ``Z``) per qubit."""
    if len(axes) != geom.n_qubits:
        raise ValueError("need one axis letter per qubit")
    table = {"I": I2, **PAULI}
    return kron_all([table[a] for a in axes.upper()])


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def index_tuples(n: int, q: int) -> list[tuple[int, ...]]:
    """Sorted ``q``-tuples over ``1..n`` in lexicographic order."""
    return list(itertools.combinations(range(1, n + 1), q))
