"""
Lindblad scars: analytic constructions, operator-form checks and numerical detection.

A scar is a joint eigenvector of ``H_0`` (eigenvalue 0) and ``H_I``, hence an
eigenvector of ``L`` with a real, disorder-independent eigenvalue. The
analytic families are operators ``O`` acting on the left copy of the TFD:

* Majorana SYK: ``1, P, H, HP`` with eigenvalues ``0, -N mu, -q mu, -(N-q) mu``;
* complex SYK: the tuple operators ``N_p`` with eigenvalue ``-2 p mu``;
* XXZ chain: the Z-strings ``M_p`` with eigenvalue ``-2 p mu``.

Numerically, every eigenvalue cluster near a target ``t`` is orthonormalized
and the kernel of ``(H_I - t)`` restricted to it is read off from singular
values: each null direction is a scar.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .algebra import MAJORANA, SPIN, Geometry, build_parity, charge_operator, pauli_table
from .liouville import JumpSet, Liouvillian, left_operator_state
from .spectral import EigenSystem

DEFAULT_SV_FLOOR = 1e-8
DEFAULT_CLUSTER_REL = 1e-7
DEFAULT_GRAM_LIMIT = 1e8


class ScarKind(str, Enum):
    TFD = "tfd"
    PARITY = "parity"
    HAM_L = "ham-l"
    HAM_L_PARITY = "ham-l-parity"
    U1_TUPLE = "u1-tuple"
    SPIN_ZSTRING = "spin-zstring"
    OTHER = "other"


@dataclass(frozen=True, eq=False)
class ScarState:
    vector: np.ndarray = field(repr=False)
    eigenvalue: complex
    kind: ScarKind
    residual_h0: float
    residual_hi: float
    eta: float
    p: int | None = None

    @property
    def label(self) -> str:
        return self.kind.value if self.p is None else f"{self.kind.value}[{self.p}]"


def _scar_state(L: Liouvillian, v: np.ndarray, eigenvalue: float, kind: ScarKind, p=None) -> ScarState:
    h0 = float(np.linalg.norm(L.H0 @ v))
    hi = float(np.linalg.norm(L.HI @ v - eigenvalue * v))
    eta = eigenvalue / L.mu if L.mu else float("nan")
    return ScarState(v, complex(eigenvalue), kind, h0, hi, eta, p)


# ---------------------------------------------------------------------------
# analytic families
# ---------------------------------------------------------------------------


def analytic_majorana_scars(L: Liouvillian, H: np.ndarray) -> list[ScarState]:
    """The four parity/Hamiltonian scars of a Majorana SYK Liouvillian."""
    geom = L.geom
    geom.require(MAJORANA)
    if L.q is None:
        raise ValueError("Liouvillian does not record the interaction order q")
    n, q, mu = geom.n, L.q, L.mu
    P = build_parity(geom)
    ops = [
        (np.eye(geom.dim), 0.0, ScarKind.TFD),
        (P, -n * mu, ScarKind.PARITY),
        (H, -q * mu, ScarKind.HAM_L),
        (H @ P, -(n - q) * mu, ScarKind.HAM_L_PARITY),
    ]
    out = []
    for op, lam, kind in ops:
        if np.abs(op).max() == 0:
            raise ValueError(f"{kind.value} operator vanishes; state cannot be normalized")
        out.append(_scar_state(L, left_operator_state(L, op), lam, kind))
    return out


def tuple_operator(p: int, geom: Geometry) -> np.ndarray:
    """``N_p = sum over ordered distinct (k_1..k_p) of prod (n_k - 1/2)``.

    Built by the three-term recursion in the number of complex modes
    ``M = N/2``::

        N_{p+1} = (Q - M/2) N_p - (p/4)(M - p + 1) N_{p-1},   N_0 = 1,  N_1 = Q - M/2

    with ``Q`` the total charge. Everything is diagonal in the occupation basis.
    """
    geom.require(MAJORANA)
    m = geom.n_qubits
    if not 0 <= p <= m:
        raise ValueError(f"tuple order p={p} outside 0..{m}")
    x = np.real(np.diag(charge_operator(geom))) - m / 2
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for k in range(p):
        prev, cur = cur, x * cur - (k / 4) * (m - k + 1) * prev
    return np.diag(cur).astype(complex)


def analytic_u1_scars(L: Liouvillian) -> list[ScarState]:
    """``N_p^L |0>`` with eigenvalue ``-2 p mu`` for ``p = 0..N/2``."""
    geom = L.geom
    geom.require(MAJORANA)
    return [
        _scar_state(L, left_operator_state(L, tuple_operator(p, geom)), -2 * p * L.mu, ScarKind.U1_TUPLE, p)
        for p in range(geom.n_qubits + 1)
    ]


def spin_zstring_operator(p: int, geom: Geometry) -> np.ndarray:
    """``M_p = sum_{k_1 < ... < k_p} Z_{k_1} ... Z_{k_p}``."""
    geom.require(SPIN)
    if not 0 <= p <= geom.n:
        raise ValueError(f"string length p={p} outside 0..{geom.n}")
    z = [np.real(np.diag(Zk)) for Zk in pauli_table(geom)["Z"]]
    diag = np.zeros(geom.dim)
    for combo in itertools.combinations(range(geom.n), p):
        term = np.ones(geom.dim)
        for k in combo:
            term = term * z[k]
        diag += term
    return np.diag(diag).astype(complex)


def analytic_spin_scars(L: Liouvillian) -> list[ScarState]:
    """``M_p^L |0>`` with eigenvalue ``-2 p mu`` for every ``p = 0..N``."""
    geom = L.geom
    geom.require(SPIN)
    return [
        _scar_state(L, left_operator_state(L, spin_zstring_operator(p, geom)), -2 * p * L.mu, ScarKind.SPIN_ZSTRING, p)
        for p in range(geom.n + 1)
    ]


class ConditionCheck(NamedTuple):
    commutator: float
    eta_prime: float
    residual: float


def verify_scar_conditions(O: np.ndarray, H: np.ndarray, jumps: JumpSet | Sequence[np.ndarray]) -> ConditionCheck:
    """``max|[H, O]|``, the least-squares ``eta'`` in ``sum_a L_a O L_a^dag = eta' O``, and its residual."""
    O = np.asarray(O, dtype=complex)
    if not np.any(O):
        raise ValueError("operator O must be nonzero")
    ops = jumps.operators if isinstance(jumps, JumpSet) else tuple(jumps)
    comm = float(np.abs(H @ O - O @ H).max())
    S = sum(La @ O @ La.conj().T for La in ops)
    eta = np.vdot(O, S) / np.vdot(O, O)
    res = float(np.abs(S - eta * O).max())
    return ConditionCheck(comm, float(np.real(eta)), res)


# ---------------------------------------------------------------------------
# numerical detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TargetRecord:
    target: float
    members: np.ndarray
    singular_values: np.ndarray
    threshold: float
    multiplicity: int
    basis: np.ndarray = field(repr=False)
    complement: np.ndarray = field(repr=False)
    gram_condition: float
    ill_conditioned: bool
    span_residual: float = 0.0
    tol_cluster: float = 0.0

    @property
    def cluster_size(self) -> int:
        return len(self.members)

    @property
    def is_eigenspace(self) -> bool:
        """True when the cluster span is invariant with ``L = t`` on it (no defective block)."""
        full = self.basis.shape[1] + self.complement.shape[1] == self.cluster_size
        return full and self.span_residual <= self.tol_cluster


@dataclass(frozen=True, eq=False)
class ScarDetectionReport:
    records: tuple[TargetRecord, ...]
    tol_cluster: float
    tol_sv: float | None

    @property
    def total(self) -> int:
        return sum(r.multiplicity for r in self.records)

    def multiplicities(self) -> dict[float, int]:
        return {r.target: r.multiplicity for r in self.records}

    def record_at(self, target: float, atol: float = 1e-9) -> TargetRecord | None:
        for r in self.records:
            if abs(r.target - target) <= atol:
                return r
        return None

    @property
    def flagged(self) -> list[float]:
        return [r.target for r in self.records if r.ill_conditioned]


def default_targets(L: Liouvillian) -> list[float]:
    """``0, -2 mu, ..., -N mu`` (fermionic) or ``0, -2 mu, ..., -2 N mu`` (spin)."""
    top = L.geom.n // 2 if L.geom.kind == MAJORANA else L.geom.n
    return [-2.0 * k * L.mu for k in range(top + 1)]


def _hi_norm(L: Liouvillian) -> float:
    return float(abs(L.HI).sum(axis=1).max())


def detect_numerical_scars(
    es: EigenSystem,
    L: Liouvillian,
    tol_cluster: float | None = None,
    tol_sv: float | None = None,
    targets: Sequence[float] | None = None,
    gram_limit: float = DEFAULT_GRAM_LIMIT,
) -> ScarDetectionReport:
    """Count scars at each target eigenvalue via the kernel of ``(H_I - t)`` on the cluster.

    ``tol_cluster`` defaults to ``1e-7 |L|``. A singular value counts as zero
    below ``tol_sv``, which defaults to ``1e-8 max(s_max, |H_I|)``; the
    ``|H_I|`` floor keeps the threshold meaningful when every member of a
    cluster is a scar and ``s_max`` itself is roundoff.
    """
    if tol_cluster is None:
        tol_cluster = DEFAULT_CLUSTER_REL * L.norm()
    targets = default_targets(L) if targets is None else list(targets)
    hi_norm = _hi_norm(L)
    records = []
    used_tol = tol_sv if tol_sv is not None else DEFAULT_SV_FLOOR * hi_norm
    for t in targets:
        members = np.flatnonzero((np.abs(es.values - t) < tol_cluster) & (np.abs(es.values.imag) < tol_cluster))
        n0 = L.dim
        if len(members) == 0:
            empty = np.zeros((n0, 0), dtype=complex)
            records.append(TargetRecord(t, members, np.zeros(0), used_tol, 0, empty, empty, 1.0, False))
            continue
        V = es.vectors[:, members]
        U, g, _ = np.linalg.svd(V, full_matrices=False)
        rank = int(np.sum(g > 1e-10 * g[0]))
        gram_cond = float((g[0] / g[-1]) ** 2) if g[-1] > 0 else float("inf")
        Q = U[:, :rank]
        A = L.HI @ Q - t * Q
        span_res = float(np.linalg.norm(L @ Q - t * Q, axis=0).max())
        _, s, wh = np.linalg.svd(A, full_matrices=False)
        thr = tol_sv if tol_sv is not None else DEFAULT_SV_FLOOR * max(s[0], hi_norm)
        kernel = s < thr
        W = wh.conj().T
        basis = Q @ W[:, kernel]
        complement = Q @ W[:, ~kernel]
        records.append(
            TargetRecord(t, members, s, thr, int(kernel.sum()), basis, complement, gram_cond, gram_cond > gram_limit, span_res, tol_cluster)
        )
    return ScarDetectionReport(tuple(records), float(tol_cluster), tol_sv)


def subspace_residual(v: np.ndarray, basis: np.ndarray) -> float:
    """``|v - B B^dag v|`` for unit ``v``: the sine of its angle to ``span(B)``."""
    v = v / np.linalg.norm(v)
    if basis.shape[1] == 0:
        return 1.0
    return float(np.linalg.norm(v - basis @ (basis.conj().T @ v)))


def match_subspaces(analytic: Sequence[ScarState], detected: ScarDetectionReport, atol: float = 1e-8) -> float:
    """Worst residual of analytic scars against the detected subspace at their eigenvalue.

    An analytic eigenvalue with no detected scars counts as residual 1.
    """
    worst = 0.0
    for s in analytic:
        rec = detected.record_at(float(s.eigenvalue.real), atol)
        if rec is None or rec.multiplicity == 0:
            worst = max(worst, 1.0)
            continue
        worst = max(worst, subspace_residual(s.vector, rec.basis))
    return worst


def aligned_basis(rec: TargetRecord, analytic: Sequence[ScarState] = ()) -> tuple[np.ndarray, list[ScarState | None]]:
    """Orthonormal scar basis with analytic states (projected in) first, then the rest.

    Returns the basis and, per column, the analytic state it came from (or None).
    """
    B = rec.basis
    cols, tags = [], []
    for s in analytic:
        if abs(s.eigenvalue.real - rec.target) > 1e-9 or len(cols) >= B.shape[1]:
            continue
        w = B @ (B.conj().T @ s.vector)
        for c in cols:
            w = w - c * np.vdot(c, w)
        nrm = np.linalg.norm(w)
        if nrm > 0.5:
            cols.append(w / nrm)
            tags.append(s)
    if cols:
        C = np.column_stack(cols)
        R = B - C @ (C.conj().T @ B)
        U, g, _ = np.linalg.svd(R, full_matrices=False)
        rest = U[:, : B.shape[1] - len(cols)]
        return np.column_stack([C, rest]), tags + [None] * rest.shape[1]
    return B, [None] * B.shape[1]


def resolve_clusters(
    es: EigenSystem, report: ScarDetectionReport, analytic: Sequence[ScarState] = ()
) -> tuple[EigenSystem, np.ndarray, list[str]]:
    """Eigensystem whose scar-bearing clusters are re-expressed in a canonical basis.

    Inside a degenerate cluster the solver may return any basis, mixing scars
    with non-scars. When the cluster is a genuine eigenspace its columns are
    replaced by the detected scar basis (analytic states first) followed by the
    remaining right-singular directions, so scars occupy their own eigenvectors.
    Returns the new eigensystem, a per-eigenpair scar flag and a per-eigenpair
    label (``""`` for non-scars).
    """
    vectors = es.vectors.copy()
    is_scar = np.zeros(len(es), dtype=bool)
    labels = [""] * len(es)
    for rec in report.records:
        if rec.multiplicity == 0:
            continue
        m = rec.members
        if rec.is_eigenspace:
            B, tags = aligned_basis(rec, analytic)
            vectors[:, m] = np.column_stack([B, rec.complement])
            is_scar[m[: rec.multiplicity]] = True
            for j, tag in enumerate(tags):
                labels[m[j]] = tag.label if tag is not None else ScarKind.OTHER.value
        else:
            # defective cluster: keep solver vectors, flag those inside the scar space
            for j in m:
                if subspace_residual(vectors[:, j], rec.basis) < 1e-7:
                    is_scar[j] = True
                    labels[j] = ScarKind.OTHER.value
    return replace(es, vectors=vectors), is_scar, labels
