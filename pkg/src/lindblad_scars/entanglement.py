"""
Entanglement entropy of doubled-space states under two bipartitions.

States are row-major vectors on ``H_L x H_R`` (the pseudo-fermion or spin
basis). Each copy is split into a first and second half of its qubits/sites:

* intersite: ``L`` against ``R``;
* intrasite: (first half of ``L`` + first half of ``R``) against the rest.

Entropies use the natural log and drop zero Schmidt weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .algebra import Geometry


class Partition(str, Enum):
    INTERSITE = "intersite"
    INTRASITE = "intrasite"


@dataclass(frozen=True)
class EntropyRecord:
    eigenvalue: complex
    entropy_intersite: float
    entropy_intrasite: float
    schmidt_spectrum: np.ndarray


def half_dims(geom: Geometry) -> tuple[int, int]:
    """Dimensions of the first and second half of one copy."""
    n = geom.n_qubits
    first = n // 2
    return 2**first, 2 ** (n - first)


def partition_dims(part: Partition | str, geom: Geometry) -> tuple[int, int]:
    part = Partition(part)
    if part is Partition.INTERSITE:
        return geom.dim, geom.dim
    da, db = half_dims(geom)
    return da * da, db * db


def coefficient_matrix(v: np.ndarray, part: Partition | str, geom: Geometry) -> np.ndarray:
    """Reshape state(s) so that rows index the subsystem and columns its complement.

    ``v`` may be one vector or a ``(D^2, k)`` block of column vectors; the
    result has shape ``(rows, cols)`` or ``(k, rows, cols)``.
    """
    part = Partition(part)
    v = np.asarray(v)
    batch = v.ndim == 2
    cols = v.T if batch else v[None, :]
    k = cols.shape[0]
    d = geom.dim
    if part is Partition.INTERSITE:
        out = cols.reshape(k, d, d)
    else:
        da, db = half_dims(geom)
        t = cols.reshape(k, da, db, da, db)  # (aL, bL, aR, bR)
        out = t.transpose(0, 1, 3, 2, 4).reshape(k, da * da, db * db)
    return out if batch else out[0]


def _entropy_from_sv(s: np.ndarray) -> np.ndarray:
    p = s**2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def _check_unit(v: np.ndarray, atol: float) -> None:
    norms = np.linalg.norm(v, axis=0)
    if np.any(np.abs(norms - 1) > atol):
        raise ValueError(f"state norm {norms.min() if norms.ndim else norms} is not 1")


def schmidt_spectrum(v: np.ndarray, part: Partition | str, geom: Geometry) -> np.ndarray:
    """Schmidt weights ``sigma_l^2`` in descending order."""
    _check_unit(v, 1e-8)
    s = np.linalg.svd(coefficient_matrix(v, part, geom), compute_uv=False)
    return s**2


def schmidt_entropy(v: np.ndarray, part: Partition | str, geom: Geometry, *, atol: float = 1e-8) -> float | np.ndarray:
    """``-sum sigma^2 log sigma^2`` for one state, or an array for a ``(D^2, k)`` block."""
    _check_unit(v, atol)
    s = np.linalg.svd(coefficient_matrix(v, part, geom), compute_uv=False)
    out = _entropy_from_sv(s)
    return float(out) if np.ndim(out) == 0 else out


def schmidt_entropies(V: np.ndarray, part: Partition | str, geom: Geometry, chunk: int = 256) -> np.ndarray:
    """Entropies of every column of ``V`` in chunks (bounded memory)."""
    out = np.empty(V.shape[1])
    for s in range(0, V.shape[1], chunk):
        out[s : s + chunk] = schmidt_entropy(V[:, s : s + chunk], part, geom)
    return out


def entropy_record(v: np.ndarray, eigenvalue: complex, geom: Geometry) -> EntropyRecord:
    return EntropyRecord(
        complex(eigenvalue),
        schmidt_entropy(v, Partition.INTERSITE, geom),
        schmidt_entropy(v, Partition.INTRASITE, geom),
        schmidt_spectrum(v, Partition.INTERSITE, geom),
    )


def reduced_density_matrix(v: np.ndarray, part: Partition | str, geom: Geometry) -> np.ndarray:
    """Explicit partial trace of ``|v><v|`` over the complement of the partition's subsystem."""
    part = Partition(part)
    d = geom.dim
    if part is Partition.INTERSITE:
        t = np.asarray(v).reshape(d, d)
        return np.einsum("ab,cb->ac", t, t.conj())
    da, db = half_dims(geom)
    t = np.asarray(v).reshape(da, db, da, db)
    rho = np.einsum("ibjd,kbld->ijkl", t, t.conj())
    return rho.reshape(da * da, da * da)


def von_neumann(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log(w)))


def page_value(D: int) -> float:
    """Mean entropy of a random pure state on ``D x D``: ``sum_{j=D+1}^{D^2} 1/j - (D-1)/(2D)``."""
    if D < 2:
        raise ValueError("Page value needs D >= 2")
    return math.fsum(1.0 / j for j in range(D + 1, D * D + 1)) - (D - 1) / (2 * D)
