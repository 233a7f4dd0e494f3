"""
Operator-size superoperators and per-eigenstate size moments.

Fermionic size counts Majoranas in a string: with ``c_i`` the Hermitian
left-right pair term of jump ``i`` (``i chi_i^L chi_i^R`` in the standard
scheme, ``psi_i x psi_i^*`` in the pseudo-fermion one)::

    S = N/2 - sum_i c_i = -H_I / mu,    S_odd = N/4 - sum_{i odd} c_i,    S_even = N/4 - sum_{i even} c_i

On an even Majorana string of length ``p`` these give ``S = p``; an odd
string decays at rate ``mu (N - p)`` and so reports ``N - p``.

Spin size counts non-identity Paulis, with per-axis counters
``S_X = N/4 - 1/4 sum_i (-X^L X^R + Y^L Y^R + Z^L Z^R)`` and cyclic, where
``A^R = 1 x A^*``. Then ``S_X + S_Y + S_Z = S`` and ``H_I = -2 mu (S_Y + S_Z)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .algebra import MAJORANA, SPIN, pauli_table
from .liouville import Liouvillian, Scheme
from .spectral import EigenSystem


@dataclass(frozen=True, eq=False)
class SizeSuperoperators:
    """Size operators on the doubled space; ``split`` is the partial-size combination studied."""

    kind: str
    total: sp.csr_matrix
    parts: dict[str, sp.csr_matrix]
    split: sp.csr_matrix
    split_name: str

    @property
    def even(self) -> sp.csr_matrix:
        return self.parts["even"]

    @property
    def odd(self) -> sp.csr_matrix:
        return self.parts["odd"]


def build_size_majorana(L: Liouvillian) -> SizeSuperoperators:
    L.geom.require(MAJORANA)
    n = L.geom.n
    eye = sp.identity(L.dim, dtype=complex, format="csr")
    odd = (n / 4) * eye - sum(L.pairs[0::2])
    even = (n / 4) * eye - sum(L.pairs[1::2])
    total = (n / 2) * eye - sum(L.pairs)
    return SizeSuperoperators(
        MAJORANA, total.tocsr(), {"even": even.tocsr(), "odd": odd.tocsr()}, (even - odd).tocsr(), "even-odd"
    )


def build_size_spin(L: Liouvillian) -> SizeSuperoperators:
    L.geom.require(SPIN)
    if L.scheme is not Scheme.SPIN:
        raise ValueError("spin size operators need the spin vectorization")
    n, d = L.geom.n, L.geom.dim
    table = pauli_table(L.geom)
    eye_d = sp.identity(d, dtype=complex, format="csr")
    corr = {}
    for ax, ops in table.items():
        corr[ax] = sum(sp.kron(sp.csr_matrix(o), eye_d) @ sp.kron(eye_d, sp.csr_matrix(o.conj())) for o in ops)
    eye = sp.identity(d * d, dtype=complex, format="csr")
    total = (3 * n / 4) * eye - 0.25 * (corr["X"] + corr["Y"] + corr["Z"])
    parts = {}
    for ax in "XYZ":
        signed = sum(-c if a == ax else c for a, c in corr.items())
        parts[ax] = ((n / 4) * eye - 0.25 * signed).tocsr()
    return SizeSuperoperators(SPIN, total.tocsr(), parts, (parts["X"] + parts["Z"]).tocsr(), "x+z")


def build_size(L: Liouvillian) -> SizeSuperoperators:
    return build_size_spin(L) if L.geom.kind == SPIN else build_size_majorana(L)


@dataclass(frozen=True)
class ObservableRecord:
    eigenvalue: complex
    size_mean: float
    size_var: float
    split_mean: float
    split_second: float
    is_scar: bool = False


def _moments(A: sp.csr_matrix, V: np.ndarray, chunk: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """``<v|A|v>`` and ``<v|A^2|v> = |A v|^2`` column-wise, for Hermitian ``A``."""
    first = np.empty(V.shape[1])
    second = np.empty(V.shape[1])
    for s in range(0, V.shape[1], chunk):
        v = V[:, s : s + chunk]
        Av = A @ v
        first[s : s + chunk] = np.real(np.einsum("ij,ij->j", v.conj(), Av))
        second[s : s + chunk] = np.einsum("ij,ij->j", Av.conj(), Av).real
    return first, second


def moment_table(es: EigenSystem, ops: SizeSuperoperators, is_scar=None) -> dict[str, np.ndarray]:
    """Column arrays of the per-eigenstate moments (the batched form of :func:`evaluate`)."""
    m1, m2 = _moments(ops.total, es.vectors)
    s1, s2 = _moments(ops.split, es.vectors)
    flags = np.zeros(len(es), dtype=bool) if is_scar is None else np.asarray(is_scar, dtype=bool)
    return {
        "re_lambda": es.values.real.copy(),
        "im_lambda": es.values.imag.copy(),
        "size_mean": m1,
        "size_var": m2 - m1**2,
        "split_mean": s1,
        "split_second": s2,
        "is_scar": flags,
    }


def evaluate(es: EigenSystem, ops: SizeSuperoperators, is_scar=None) -> list[ObservableRecord]:
    t = moment_table(es, ops, is_scar)
    return [
        ObservableRecord(complex(lam), float(a), float(b), float(c), float(d), bool(f))
        for lam, a, b, c, d, f in zip(
            es.values, t["size_mean"], t["size_var"], t["split_mean"], t["split_second"], t["is_scar"]
        )
    ]
