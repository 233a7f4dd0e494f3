"""
Dense non-Hermitian eigendecomposition of vectorized Liouvillians.

The solver is LAPACK's ``geev`` (Hessenberg reduction + shifted QR) through
numpy. Two exact reductions keep the ``D^2 = 4096`` problems tractable:

* block diagonalization along conserved sector labels (see
  :func:`lindblad_scars.liouville.symmetry_sectors`);
* inside a sector closed under ``SWAP``, the Hermiticity-preserving
  antiunitary ``SWAP . K`` makes the block real in the basis
  ``(|ab> + |ba>)/sqrt 2``, ``i(|ab> - |ba>)/sqrt 2``, ``|aa>``, so the real
  ``dgeev`` is used.

Both only change the basis the solver sees; eigenvalues are the same multiset
and every returned vector is a unit-norm right eigenvector of the full matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .liouville import Liouvillian, symmetry_sectors

log = logging.getLogger(__name__)

DEFAULT_MAX_DIM = 4096


class EigenSolverError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenvalues sorted by ``(Re, Im)`` with unit-norm right eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray
    residual: float
    sector: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.values)


def _swap_partner(idx: np.ndarray, d: int) -> np.ndarray | None:
    """Position within ``idx`` of the swap image of each element, or None if not closed."""
    a, b = np.divmod(idx, d)
    image = b * d + a
    pos = np.searchsorted(idx, image)
    pos = np.clip(pos, 0, len(idx) - 1)
    if not np.array_equal(idx[pos], image):
        return None
    return pos


def real_basis(idx: np.ndarray, d: int) -> sp.csc_matrix | None:
    """Unitary whose columns are ``SWAP . K``-invariant vectors spanning ``idx``."""
    partner = _swap_partner(np.asarray(idx), d)
    if partner is None:
        return None
    n = len(idx)
    rows, cols, vals = [], [], []
    col = 0
    s = 1 / np.sqrt(2)
    for i in range(n):
        j = partner[i]
        if j == i:
            rows.append(i), cols.append(col), vals.append(1.0)
            col += 1
        elif i < j:
            rows += [i, j, i, j]
            cols += [col, col, col + 1, col + 1]
            vals += [s, s, 1j * s, -1j * s]
            col += 2
    return sp.csc_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)


def _solve_block(block: np.ndarray, T: sp.csc_matrix | None) -> tuple[np.ndarray, np.ndarray]:
    if T is not None:
        R = T.conj().T @ (T.T @ block.T).T
        scale = max(np.abs(block).max(), 1.0)
        if np.abs(R.imag).max() <= 1e-12 * scale:
            w, u = np.linalg.eig(np.ascontiguousarray(R.real))
            return w.astype(complex), np.asarray(T @ u)
        log.debug("block is not real in the swap basis; using complex solver")
    return np.linalg.eig(block)


def _as_matrix(L) -> tuple[np.ndarray | None, sp.spmatrix | None]:
    if isinstance(L, Liouvillian):
        return None, L.sparse()
    if sp.issparse(L):
        return None, L.tocsr()
    return np.asarray(L, dtype=complex), None


def eig(
    L,
    tol: float = 1e-8,
    *,
    sectors="auto",
    real: bool = True,
    max_dim: int = DEFAULT_MAX_DIM,
) -> EigenSystem:
    """Complete eigensystem of ``L`` (a :class:`Liouvillian` or square matrix).

    ``sectors`` is ``"auto"`` (use the Liouvillian's known conserved labels),
    ``None`` (one dense block), or a list of index arrays that must partition
    the basis into invariant blocks. Raises :class:`EigenSolverError` when the
    worst residual ``max_k |L v_k - lambda_k v_k|`` exceeds ``tol * |L|``.
    """
    dense, sparse = _as_matrix(L)
    n = (dense if dense is not None else sparse).shape[0]
    if n > max_dim:
        raise ValueError(f"dimension {n} exceeds the dense limit {max_dim}")
    if isinstance(sectors, str):
        if sectors != "auto":
            raise ValueError(f"unknown sectors option {sectors!r}")
        sectors = symmetry_sectors(L) if isinstance(L, Liouvillian) else None
    if sectors is None:
        sectors = [np.arange(n)]
    use_real = real and isinstance(L, Liouvillian) and L.basis is None
    d = int(round(np.sqrt(n)))

    if sparse is not None:
        _check_blocks(sparse, sectors, n)
        full = None
    else:
        full = dense
        _check_blocks(sp.csr_matrix(dense), sectors, n)

    values = np.empty(n, dtype=complex)
    vectors = np.zeros((n, n), dtype=complex)
    sector_id = np.empty(n, dtype=int)
    col = 0
    for s_id, idx in enumerate(sectors):
        idx = np.sort(np.asarray(idx))
        if full is not None:
            block = full[np.ix_(idx, idx)]
        else:
            block = sparse[idx][:, idx].toarray()
        T = real_basis(idx, d) if use_real and d * d == n else None
        w, u = _solve_block(block, T)
        m = len(w)
        values[col : col + m] = w
        vectors[idx, col : col + m] = u
        sector_id[col : col + m] = s_id
        col += m
        del block, u

    vectors /= np.linalg.norm(vectors, axis=0)
    order = np.lexsort((values.imag, values.real))
    values, vectors, sector_id = values[order], vectors[:, order], sector_id[order]

    op = sparse if sparse is not None else dense
    res = _residual(op, values, vectors)
    scale = _norm(op)
    if res > tol * scale:
        raise EigenSolverError(f"eigen-residual {res:.3e} exceeds {tol:.1e} * |L| = {tol * scale:.3e}", res)
    return EigenSystem(values, vectors, res, sector_id)


def _norm(op) -> float:
    return float(abs(op).sum(axis=1).max())


def _residual(op, values: np.ndarray, vectors: np.ndarray, chunk: int = 512) -> float:
    worst = 0.0
    for s in range(0, vectors.shape[1], chunk):
        v = vectors[:, s : s + chunk]
        r = op @ v - v * values[s : s + chunk]
        worst = max(worst, float(np.linalg.norm(r, axis=0).max()))
    return worst


def _check_blocks(op: sp.csr_matrix, sectors, n: int) -> None:
    label = np.full(n, -1)
    for s_id, idx in enumerate(sectors):
        label[np.asarray(idx)] = s_id
    if np.any(label < 0):
        raise ValueError("sectors do not cover the whole basis")
    coo = op.tocoo()
    leak = label[coo.row] != label[coo.col]
    if np.any(leak) and np.abs(coo.data[leak]).max() > 0:
        raise ValueError("matrix couples different sectors; the sector labels are not conserved")


def eigvals(L, *, sectors="auto", real: bool = True) -> np.ndarray:
    """Eigenvalues only, sorted by ``(Re, Im)``; same block reductions as :func:`eig`."""
    dense, sparse = _as_matrix(L)
    n = (dense if dense is not None else sparse).shape[0]
    if isinstance(sectors, str):
        sectors = symmetry_sectors(L) if isinstance(L, Liouvillian) else None
    if sectors is None:
        sectors = [np.arange(n)]
    use_real = real and isinstance(L, Liouvillian) and L.basis is None
    d = int(round(np.sqrt(n)))
    out = []
    for idx in sectors:
        idx = np.sort(np.asarray(idx))
        block = dense[np.ix_(idx, idx)] if dense is not None else sparse[idx][:, idx].toarray()
        T = real_basis(idx, d) if use_real and d * d == n else None
        if T is not None:
            R = T.conj().T @ (T.T @ block.T).T
            if np.abs(R.imag).max() <= 1e-12 * max(np.abs(block).max(), 1.0):
                out.append(np.linalg.eigvals(np.ascontiguousarray(R.real)))
                continue
        out.append(np.linalg.eigvals(block))
    w = np.concatenate(out).astype(complex)
    return w[np.lexsort((w.imag, w.real))]


def expectation(A, v: np.ndarray) -> complex:
    """``<v|A|v>`` for a unit vector ``v``."""
    v = np.asarray(v)
    if A.shape[1] != v.shape[0]:
        raise ValueError(f"operator of shape {A.shape} cannot act on a vector of length {v.shape[0]}")
    return complex(np.vdot(v, A @ v))


def expectations(A, V: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Column-wise ``<v_k|A|v_k>``."""
    out = np.empty(V.shape[1], dtype=complex)
    for s in range(0, V.shape[1], chunk):
        v = V[:, s : s + chunk]
        out[s : s + chunk] = np.einsum("ij,ij->j", v.conj(), A @ v)
    return out


def split_residuals(es: EigenSystem, L: Liouvillian) -> tuple[float, float]:
    """Worst ``|<H_I> - Re lambda|`` and ``|<H_0> + Im lambda|`` over all eigenpairs."""
    hi = expectations(L.HI, es.vectors)
    h0 = expectations(L.H0, es.vectors)
    return (
        float(np.abs(hi.real - es.values.real).max()),
        float(np.abs(h0.real + es.values.imag).max()),
    )


def multiset_distance(a, b) -> float:
    """Largest pairwise gap under the optimal one-to-one matching of two eigenvalue lists.

    Sorting is not enough when real parts tie to roundoff; the matching is
    solved as a linear assignment on ``|a_i - b_j|``.
    """
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.shape != b.shape:
        raise ValueError(f"multisets differ in size: {a.size} vs {b.size}")
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max()) if a.size else 0.0


# ---------------------------------------------------------------------------
# chiral reduction for spin chains
# ---------------------------------------------------------------------------


def chiral_basis(idx: np.ndarray, d: int, z: np.ndarray) -> tuple[sp.csc_matrix, sp.csc_matrix] | None:
    """Eigenbases of ``G = SWAP . prod Z^L`` (eigenvalues ``+g``, ``-g``) on one parity sector.

    ``G |ab> = z_a |ba>`` and ``G^2`` is the sector parity ``z_a z_b``. Columns
    are phased to be invariant under ``SWAP . K`` whenever that antiunitary
    commutes with ``G`` (even sector), which makes the blocks of ``L`` real.
    """
    idx = np.asarray(idx)
    partner = _swap_partner(idx, d)
    if partner is None:
        return None
    a, b = np.divmod(idx, d)
    par = z[a] * z[b]
    if not np.all(par == par[0]):
        return None
    even = par[0] > 0
    g = 1.0 if even else 1j
    s = 1 / np.sqrt(2)
    cols = {1: ([], [], []), -1: ([], [], [])}
    count = {1: 0, -1: 0}
    for i in range(len(idx)):
        j = partner[i]
        if j == i:
            key = 1 if z[a[i]] > 0 else -1
            r, c, v = cols[key]
            r.append(i), c.append(count[key]), v.append(1.0)
            count[key] += 1
        elif i < j:
            cz = g * z[b[i]]
            for sgn in (1, -1):
                ph = 1.0
                if even and sgn * z[b[i]] < 0:
                    ph = 1j
                r, c, v = cols[sgn]
                r += [i, j]
                c += [count[sgn], count[sgn]]
                v += [ph * s, ph * sgn * cz * s]
                count[sgn] += 1
    n = len(idx)
    out = []
    for key in (1, -1):
        r, c, v = cols[key]
        out.append(sp.csc_matrix((v, (r, c)), shape=(n, count[key]), dtype=complex))
    return out[0], out[1]


def _null_space(M: np.ndarray, tol: float, k_max: int) -> np.ndarray:
    """Orthonormal vectors ``x`` with ``|M x| < tol`` among the ``k_max`` lowest modes of ``M^dag M``."""
    import scipy.linalg as sla

    k = min(k_max, M.shape[1])
    _, X = sla.eigh(M.conj().T @ M, subset_by_index=[0, k - 1])
    keep = np.linalg.norm(M @ X, axis=0) < tol
    return X[:, keep]


def _solve_chiral_block(Lb: sp.csr_matrix, shift: float, Wp, Wm, zero_tol: float):
    """Eigenpairs of a block anticommuting with the chiral operator after ``+ shift``.

    Returns None when the block does not have the expected structure (the
    caller then falls back to the plain solver).
    """
    n = Lb.shape[0]
    Lp = Lb + shift * sp.identity(n, dtype=complex, format="csr")
    B = (Wp.conj().T @ Lp @ Wm).toarray()
    C = (Wm.conj().T @ Lp @ Wp).toarray()
    scale = max(np.abs(B).max(), np.abs(C).max(), 1.0)
    diag_leak = max(abs(Wp.conj().T @ Lp @ Wp).max(), abs(Wm.conj().T @ Lp @ Wm).max())
    if diag_leak > 1e-12 * scale or B.shape[0] != C.shape[0]:
        return None
    if np.abs(B.imag).max() == 0 and np.abs(C.imag).max() == 0:
        B, C = B.real.copy(), C.real.copy()
    kappa, U = np.linalg.eig(B @ C)
    kappa = kappa.astype(complex)
    small = np.abs(kappa) < zero_tol * scale**2
    lam = np.sqrt(kappa[~small])
    Uk = U[:, ~small]
    CU = (C @ Uk) / lam
    top = np.concatenate([Uk, Uk], axis=1)
    bot = np.concatenate([CU, -CU], axis=1)
    vals = np.concatenate([lam, -lam])
    n_zero = int(small.sum())
    if n_zero:
        kc = _null_space(C, 1e-10 * scale, 2 * n_zero + 2)
        kb = _null_space(B, 1e-10 * scale, 2 * n_zero + 2)
        if kc.shape[1] + kb.shape[1] != 2 * n_zero:
            return None
        top = np.concatenate([top, kc, np.zeros((kc.shape[0], kb.shape[1]))], axis=1)
        bot = np.concatenate([bot, np.zeros((kb.shape[0], kc.shape[1])), kb], axis=1)
        vals = np.concatenate([vals, np.zeros(2 * n_zero)])
    V = np.asarray(Wp @ top) + np.asarray(Wm @ bot)
    V /= np.linalg.norm(V, axis=0)
    log.debug("chiral block: %d zero modes", n_zero)
    return vals - shift, V


def eig_chiral(L: Liouvillian, tol: float = 1e-8, *, zero_tol: float = 1e-12) -> EigenSystem:
    """:func:`eig` for spin Liouvillians using the chiral symmetry of ``L + mu N``.

    In each parity sector ``L + mu N = [[0, B], [C, 0]]`` in the eigenbasis of
    ``SWAP . prod Z^L``, so ``lambda^2`` are the eigenvalues of ``B C`` (half
    the size, and real in the even sector) and the eigenvectors are
    ``[u, C u / lambda]``. Zero modes come from the null spaces of ``B`` and
    ``C``. Any sector without this structure is solved by the plain route.
    """
    from .algebra import SPIN as _SPIN
    from .liouville import z_string_diagonal

    L.geom.require(_SPIN)
    shift = L.mu * L.geom.n
    sparse = L.sparse()
    n = L.dim
    d = L.geom.dim
    z = z_string_diagonal(L.geom)
    sectors = symmetry_sectors(L)
    values = np.empty(n, dtype=complex)
    vectors = np.zeros((n, n), dtype=complex)
    sector_id = np.empty(n, dtype=int)
    col = 0
    for s_id, idx in enumerate(sectors):
        idx = np.sort(idx)
        Lb = sparse[idx][:, idx]
        bases = chiral_basis(idx, d, z)
        res = None if bases is None else _solve_chiral_block(Lb, shift, *bases, zero_tol)
        if res is None:
            log.debug("sector %d lacks chiral structure; plain solver", s_id)
            res = _solve_block(Lb.toarray(), real_basis(idx, d))
        w, u = res
        m = len(w)
        values[col : col + m] = w
        vectors[idx, col : col + m] = u
        sector_id[col : col + m] = s_id
        col += m
    vectors /= np.linalg.norm(vectors, axis=0)
    order = np.lexsort((values.imag, values.real))
    values, vectors, sector_id = values[order], vectors[:, order], sector_id[order]
    res = _residual(sparse, values, vectors)
    scale = _norm(sparse)
    if res > tol * scale:
        raise EigenSolverError(f"eigen-residual {res:.3e} exceeds {tol:.1e} * |L| = {tol * scale:.3e}", res)
    return EigenSystem(values, vectors, res, sector_id)
