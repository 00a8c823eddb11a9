"""Finite qubit-array operators with the 2**-k coupling/energy scaling.

Basis states of K qubits are indexed by bitstrings; qubit k = 1 occupies the
most significant bit, so the bitstring read as a binary fraction equals the
left endpoint of the corresponding dyadic cell and the identification with
grid functions is literal.

The transverse coupling C_K = sum_k (lam/2**k) sx_k is a sum of K bit-flip
permutations: K * 2**K off-diagonal entries, symmetric, zero diagonal.  The
longitudinal part V_K = sum_k -(Omega/2**(k+1)) sz_k is diagonal and equals
the cell-midpoint sampling of Omega (x - 1/2); the two are unitarily
equivalent through u tensored K times, u = (sigma_x - sigma_z)/sqrt(2).
The sign convention is sz|0> = +|0>.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse

from .coupling import U_MIX, block_dn, dn_eigenvalues, restricted_matrix
from .errors import ConsistencyError, DomainError

SPARSE_CAP = 20   # sparse constructions up to 2**20 basis states
DENSE_CAP = 12    # dense conversions capped at K <= 12


@dataclass
class SparseOperator:
    """A real symmetric sparse operator in coordinate-list form."""

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    symmetric: bool = True

    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    def to_coo(self) -> scipy.sparse.coo_matrix:
        return scipy.sparse.coo_matrix(
            (self.vals, (self.rows, self.cols)), shape=(self.dim, self.dim))

    def to_dense(self) -> np.ndarray:
        if self.dim > (1 << DENSE_CAP):
            raise DomainError(f"dense conversion capped at dim {1 << DENSE_CAP}, "
                              f"got {self.dim}")
        return self.to_coo().toarray()


@dataclass
class DiagonalOperator:
    """A diagonal operator stored as its diagonal."""

    dim: int
    diag: np.ndarray

    def __post_init__(self):
        self.diag = np.asarray(self.diag, dtype=np.float64)
        if self.diag.shape != (self.dim,):
            raise DomainError(f"diagonal length {self.diag.shape} != dim {self.dim}")


def _check_k(k_qubits: int) -> int:
    if not 1 <= k_qubits <= SPARSE_CAP:
        raise DomainError(f"qubit count must be in [1, {SPARSE_CAP}], got {k_qubits}")
    return k_qubits


def build_ck(k_qubits: int, lam: float = 1.0) -> SparseOperator:
    """The transverse coupling sum_k (lam/2**k) sx_k as a coordinate list.

    Entry (b, b ^ bit_k) carries lam/2**k; nnz is exactly K * 2**K.
    """
    _check_k(k_qubits)
    dim = 1 << k_qubits
    basis = np.arange(dim, dtype=np.int64)
    rows = np.empty(k_qubits * dim, dtype=np.int64)
    cols = np.empty(k_qubits * dim, dtype=np.int64)
    vals = np.empty(k_qubits * dim)
    for k in range(1, k_qubits + 1):
        sl = slice((k - 1) * dim, k * dim)
        rows[sl] = basis
        cols[sl] = basis ^ (1 << (k_qubits - k))
        vals[sl] = lam * 0.5**k
    return SparseOperator(dim, rows, cols, vals)


def build_vk(k_qubits: int, omega: float = 1.0) -> DiagonalOperator:
    """The longitudinal part sum_k -(omega/2**(k+1)) sz_k.

    Its diagonal is omega * (mid_b - 1/2) with mid_b the midpoint of cell b:
    the exact cell-midpoint sampling of omega (x - 1/2).  All intermediate
    dyadics are exact in float64, so this holds to the last bit.
    """
    _check_k(k_qubits)
    dim = 1 << k_qubits
    mid = (np.arange(dim) + 0.5) * 0.5**k_qubits
    return DiagonalOperator(dim, omega * (mid - 0.5))


def apply_ck(op: SparseOperator, vec: np.ndarray) -> np.ndarray:
    """Sparse mat-vec, O(nnz)."""
    vec = np.asarray(vec)
    if vec.shape != (op.dim,):
        raise DomainError(f"vector shape {vec.shape} does not match dim {op.dim}")
    return op.to_coo().tocsr() @ vec


def unitary_equivalence_check(k_qubits: int, lam: float = 1.0,
                              omega: float = 1.0, tol: float = 1e-12) -> float:
    """Conjugate C_K by u tensored K times and fit the proportionality to V_K.

    With sz|0> = +|0> the conjugation gives exactly +(2 lam/omega) V_K; the
    check accepts either overall sign, verifies the entrywise match within
    tol, confirms the eigenvalue multisets of C_K(lam=1) and (2/omega) V_K
    coincide within 1e-10, and returns the fitted constant.
    """
    if not 1 <= k_qubits <= 10:
        raise DomainError(f"dense equivalence check requires 1 <= K <= 10, "
                          f"got {k_qubits}")
    if omega == 0.0:
        raise DomainError("omega must be nonzero")
    u_full = reduce(np.kron, [U_MIX] * k_qubits)
    conj = u_full @ build_ck(k_qubits, lam).to_dense() @ u_full
    diag_v = build_vk(k_qubits, omega).diag

    fitted = float(np.dot(np.diag(conj), diag_v) / np.dot(diag_v, diag_v))
    deviation = np.max(np.abs(conj - fitted * np.diag(diag_v)))
    if deviation > tol:
        raise ConsistencyError(f"conjugated coupling is not proportional to the "
                               f"diagonal part (deviation {deviation:.3e})")
    expected = 2.0 * lam / omega
    if abs(abs(fitted) - abs(expected)) > tol:
        raise ConsistencyError(f"fitted constant {fitted} does not have "
                               f"magnitude 2*lam/omega = {expected}")

    eigs_c = np.linalg.eigvalsh(build_ck(k_qubits, 1.0).to_dense())
    eigs_v = np.sort(2.0 / omega * diag_v)
    if np.max(np.abs(eigs_c - eigs_v)) > 1e-10:
        raise ConsistencyError("eigenvalue multisets of the coupling and scaled "
                               "diagonal parts disagree beyond 1e-10")
    return fitted


def continuum_correspondence_check(k_qubits: int) -> float:
    """Max deviation between the grid restriction of C and the qubit matrix
    C_K(1) + 2**-K I under the bitstring/cell identification (expected 0)."""
    _check_k(k_qubits)
    if k_qubits > DENSE_CAP:
        raise DomainError(f"dense correspondence check capped at K <= {DENSE_CAP}")
    dense_ck = build_ck(k_qubits, 1.0).to_dense()
    dense_ck[np.diag_indices_from(dense_ck)] += 0.5**k_qubits
    return float(np.max(np.abs(restricted_matrix(k_qubits) - dense_ck)))


def coupling_matches_detail_block(k_qubits: int) -> bool:
    """C_K(lam=1) is entrywise identical to the scale-K detail block."""
    if k_qubits > DENSE_CAP:
        raise DomainError(f"dense comparison capped at K <= {DENSE_CAP}")
    return bool(np.array_equal(build_ck(k_qubits, 1.0).to_dense(),
                               block_dn(k_qubits)))


def coupling_eigenvalues_check(k_qubits: int, tol: float = 1e-10) -> float:
    """Dense-eigensolver deviation of C_K(1) from the closed-form spectrum."""
    if k_qubits > 10:
        raise DomainError("dense spectrum check capped at K <= 10")
    eigs = np.linalg.eigvalsh(build_ck(k_qubits, 1.0).to_dense())
    dev = float(np.max(np.abs(eigs - dn_eigenvalues(k_qubits))))
    if dev > tol:
        raise ConsistencyError(f"qubit coupling spectrum deviates from the "
                               f"closed form by {dev:.3e}")
    return dev
