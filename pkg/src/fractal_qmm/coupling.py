"""The self-similar coupling operator C on L2(0,1] and its spectral calculus.

On the level-L grid the operator acts by weighted dyadic digit flips,

    out[j] = sum_{k=1..L} 2**-k * f[j ^ bit_k]  +  2**-L * f[j],

where bit_k flips digit k of the cell index (digit 1 = most significant).
The trailing 2**-L * f[j] term is the collapsed tail of the series: a digit
flip past level L stays inside the cell, so this is the exact restriction
of C to level-L piecewise-constant functions, not a truncation.

In Haar coordinates C is block diagonal: the constant mode is fixed
(eigenvalue 1) and the detail block at scale n is

    D_n = sum_{j=1..n} 2**-j * (flip of digit j),     D_0 = [0],

equivalently the two-scale recurrence D_{n+1} = [[D_n, I], [I, D_n]] / 2.
Each D_n has the simple spectrum {+-(2k+1)/2**n} and is diagonalized by
u tensored n times, u = (sigma_x - sigma_z)/sqrt(2).  Eigenvectors are
tensor products of (1, s_j)/sqrt(2) over a sign string s in {+-1}**n, and
the corresponding grid eigenfunctions are Walsh-type (values +-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import (
    HaarCoeffs,
    PiecewiseConstantFn,
    check_level,
    coeff_index,
    haar_forward,
    haar_inverse,
)
from .errors import ConsistencyError, DomainError

DENSE_CAP = 12          # largest level/scale for dense constructions
INV_SQRT2 = 1.0 / math.sqrt(2.0)

# u = (sigma_x - sigma_z)/sqrt(2): unitary, self-adjoint, u sigma_x u = -sigma_z.
U_MIX = np.array([[-1.0, 1.0], [1.0, 1.0]]) * INV_SQRT2


def _flip_digit(values: np.ndarray, n_bits: int, digit: int) -> np.ndarray:
    """Permute a length-2**n_bits array by flipping binary digit `digit`
    (1-based, digit 1 = most significant) of every index."""
    shaped = values.reshape(1 << (digit - 1), 2, 1 << (n_bits - digit))
    return shaped[:, ::-1, :].reshape(values.shape)


# ---------------------------------------------------------------------------
# Grid-side application and dense oracles
# ---------------------------------------------------------------------------

def apply_c_grid(f: PiecewiseConstantFn) -> PiecewiseConstantFn:
    """Apply C to a grid function: the exact restriction to level L >= 1.

    Cost O(L * 2**L).
    """
    levels = check_level(f.level, minimum=1)
    v = f.values
    out = 0.5**levels * v.copy()
    for k in range(1, levels + 1):
        out += 0.5**k * _flip_digit(v, levels, k)
    return PiecewiseConstantFn(levels, out)


def restricted_matrix(level: int) -> np.ndarray:
    """Dense matrix of C restricted to level-`level` grid functions,
    in the normalized indicator basis ordered by cell index.

    Equals sum_k 2**-k * (digit-flip permutation k) + 2**-L * I.
    Dense oracle only; capped at level <= 12.
    """
    check_level(level, minimum=1)
    if level > DENSE_CAP:
        raise DomainError(f"dense restriction capped at level {DENSE_CAP}, got {level}")
    n = 1 << level
    mat = np.zeros((n, n))
    idx = np.arange(n)
    for k in range(1, level + 1):
        mat[idx, idx ^ (1 << (level - k))] += 0.5**k
    mat[idx, idx] += 0.5**level
    return mat


def block_dn(n: int) -> np.ndarray:
    """Dense matrix of the scale-n detail block D_n in the basis (H(n,k)).

    D_n = sum_{j=1..n} 2**-j * (digit-flip permutation j); no diagonal term.
    Capped at n <= 12.
    """
    if n < 0:
        raise DomainError(f"scale n must be >= 0, got {n}")
    if n > DENSE_CAP:
        raise DomainError(f"dense block capped at n <= {DENSE_CAP}, got {n}")
    size = 1 << n
    mat = np.zeros((size, size))
    idx = np.arange(size)
    for j in range(1, n + 1):
        mat[idx, idx ^ (1 << (n - j))] += 0.5**j
    return mat


def jn_matrix(n: int) -> np.ndarray:
    """The 2**(n+1) x 2**n embedding whose column l holds the coordinates of
    H(n,l) in the next-finer indicator basis: the (1,-1)/sqrt(2) ladder."""
    if n < 0:
        raise DomainError(f"scale n must be >= 0, got {n}")
    jn = np.zeros((1 << (n + 1), 1 << n))
    cols = np.arange(1 << n)
    jn[2 * cols, cols] = INV_SQRT2
    jn[2 * cols + 1, cols] = -INV_SQRT2
    return jn


def jn_projection_check(n: int, tol: float = 1e-12) -> bool:
    """Whether J_n^T C_{n+1} J_n reproduces block_dn(n) within tol."""
    if n > 10:
        raise DomainError(f"projection check capped at n <= 10, got {n}")
    if n == 0:
        projected = jn_matrix(0).T @ restricted_matrix(1) @ jn_matrix(0)
        return bool(abs(projected[0, 0]) <= tol)
    jn = jn_matrix(n)
    projected = jn.T @ restricted_matrix(n + 1) @ jn
    return bool(np.max(np.abs(projected - block_dn(n))) <= tol)


# ---------------------------------------------------------------------------
# Closed-form spectrum and its labels
# ---------------------------------------------------------------------------

def dn_eigenvalues(n: int) -> np.ndarray:
    """The 2**n simple eigenvalues {+-(2k+1)/2**n : 0 <= k < 2**(n-1)} of D_n,
    in increasing order.  n = 0 yields the single value {0}."""
    if n < 0:
        raise DomainError(f"scale n must be >= 0, got {n}")
    if n == 0:
        return np.array([0.0])
    odd = (2.0 * np.arange(1 << (n - 1)) + 1.0) * 0.5**n
    return np.concatenate([-odd[::-1], odd])


@dataclass
class SignString:
    """A sign vector s in {+1,-1}**n; its eigenvalue is sum_j s_j 2**-j."""

    signs: np.ndarray

    def __post_init__(self):
        self.signs = np.asarray(self.signs, dtype=np.int8)
        if self.signs.ndim != 1 or self.signs.size < 1:
            raise DomainError("sign string must be a nonempty 1-d array")
        if not np.all(np.abs(self.signs) == 1):
            raise DomainError("sign entries must be +1 or -1")

    @property
    def n(self) -> int:
        return int(self.signs.size)

    def eigenvalue(self) -> float:
        return sign_string_eigenvalue(self)


def sign_string_eigenvalue(s: SignString) -> float:
    """sum_{j=1..n} s_j * 2**-j, an odd-numerator dyadic +-(2k+1)/2**n."""
    weights = 0.5 ** np.arange(1, s.n + 1)
    # partial sums are exact dyadics, so plain accumulation is exact
    return float(np.sum(s.signs * weights))


@dataclass
class EigenIndex:
    """Eigenvalue label (n, k, s) with E = s (2k+1)/2**n, bijective with the
    length-n sign strings."""

    n: int
    k: int
    s: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"eigenvalue scale n must be >= 1, got {self.n}")
        if not 0 <= self.k <= (1 << (self.n - 1)) - 1:
            raise DomainError(f"k={self.k} out of range for n={self.n}")
        if self.s not in (+1, -1):
            raise DomainError(f"sign must be +1 or -1, got {self.s}")

    @property
    def eigenvalue(self) -> float:
        return self.s * (2 * self.k + 1) * 0.5**self.n

    def sign_string(self) -> SignString:
        _, signs = eigen_index_from_value(self.n, self.eigenvalue)
        return signs


def eigen_index_from_value(n: int, value: float) -> tuple[EigenIndex, SignString]:
    """Recover (n, k, s) and the sign string from an eigenvalue of D_n.

    Solves E = sum_j s_j 2**-j with s_j = 1 - 2 b_j, i.e. the n-bit integer
    m = (2**n - 1 - E 2**n) / 2 carries the b_j.
    """
    if n < 1:
        raise DomainError(f"eigenvalue scale n must be >= 1, got {n}")
    scaled = value * (1 << n)
    odd = round(scaled)
    if abs(scaled - odd) > 1e-9 or odd % 2 == 0 or not 1 <= abs(odd) <= (1 << n) - 1:
        raise DomainError(f"{value} is not an eigenvalue of the scale-{n} block")
    s = 1 if odd > 0 else -1
    k = (abs(odd) - 1) // 2
    m = ((1 << n) - 1 - odd) // 2
    bits = np.array([(m >> (n - j)) & 1 for j in range(1, n + 1)], dtype=np.int8)
    return EigenIndex(n, k, s), SignString(1 - 2 * bits)


def eigen_coefficient_vector(idx: EigenIndex) -> np.ndarray:
    """The scale-n detail-slot eigenvector: the tensor product of
    (1, s_j)/sqrt(2) over the sign string of idx, unit norm."""
    _, s = eigen_index_from_value(idx.n, idx.eigenvalue)
    w = np.array([1.0])
    for sj in s.signs:
        w = np.kron(w, np.array([1.0, float(sj)]) * INV_SQRT2)
    return w


def eigenfunction(idx: EigenIndex, level: int) -> PiecewiseConstantFn:
    """The grid eigenfunction of C labelled by idx, exact at any level >= n+1.

    The detail-slot eigenvector is the tensor product of (1, s_j)/sqrt(2),
    and its Haar synthesis collapses to an exact digit product: on a cell
    with digits a_1, a_2, ... the value is

        prod_{j=1..n} s_j**a_j  *  (-1)**a_{n+1},

    a Walsh-type function taking exactly the two values +-1 (unit L2 norm),
    with apply_c_grid(f) = E f exact in floating point because every
    partial sum of +-2**-k terms is a short dyadic.
    """
    check_level(level, minimum=idx.n + 1)
    _, s = eigen_index_from_value(idx.n, idx.eigenvalue)
    cells = np.arange(1 << level)
    values = np.ones(1 << level)
    for j, sj in enumerate(s.signs, start=1):
        if sj < 0:
            digit = (cells >> (level - j)) & 1
            values = np.where(digit == 1, -values, values)
    digit = (cells >> (level - idx.n - 1)) & 1
    return PiecewiseConstantFn(level, np.where(digit == 1, -values, values))


# ---------------------------------------------------------------------------
# Fast application in Haar coordinates
# ---------------------------------------------------------------------------

def _apply_blocks(coeffs: np.ndarray, level: int) -> np.ndarray:
    out = np.zeros_like(coeffs)
    out[0] = coeffs[0]                       # constant mode, eigenvalue 1
    for n in range(1, level):                # the scale-0 slot maps to 0
        lo = 1 << n
        slot = coeffs[lo:2 * lo]
        acc = out[lo:2 * lo]
        for j in range(1, n + 1):
            acc += 0.5**j * _flip_digit(slot, n, j)
    return out


def fast_apply_c(c: HaarCoeffs) -> HaarCoeffs:
    """Apply C in Haar coordinates: identity on the constant slot, D_n on
    each scale-n detail slot via the digit-flip sum.  Cost O(L * 2**L);
    composed with haar_forward/haar_inverse this reproduces apply_c_grid."""
    return HaarCoeffs(c.level, _apply_blocks(c.coeffs, c.level))


def _mix_slots(coeffs: np.ndarray, level: int) -> np.ndarray:
    out = coeffs.copy()
    for n in range(1, level):
        lo = 1 << n
        slot = out[lo:2 * lo]
        for j in range(1, n + 1):
            shaped = slot.reshape(1 << (j - 1), 2, 1 << (n - j))
            x0 = shaped[:, 0, :].copy()
            x1 = shaped[:, 1, :]
            shaped[:, 0, :] = (x1 - x0) * INV_SQRT2
            shaped[:, 1, :] = (x0 + x1) * INV_SQRT2
    return out


def b_transform(c: HaarCoeffs, direction: str = "forward") -> HaarCoeffs:
    """Apply the diagonalizing mix: u tensored n times on each scale-n detail
    slot (n >= 1), identity on the first two slots.

    u is self-adjoint and unitary, so the transform is an involution and
    `direction` ("forward" or "inverse") selects identical maps; it is kept
    for call-site readability.
    """
    if direction not in ("forward", "inverse"):
        raise DomainError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return HaarCoeffs(c.level, _mix_slots(c.coeffs, c.level))


def spectral_diagonal(level: int) -> np.ndarray:
    """Eigenvalues of C along the mixed Haar coordinates: 1 on the constant
    slot, 0 on the scale-0 slot, and (2m - (2**n - 1))/2**n at offset m of the
    scale-n slot (the increasing ordering of the D_n spectrum)."""
    check_level(level)
    diag = np.empty(1 << level)
    diag[0] = 1.0
    for n in range(level):
        lo = 1 << n
        m = np.arange(lo)
        diag[lo:2 * lo] = (2 * m - (lo - 1)) / lo
    return diag


def apply_exp_itc(t: float, f: PiecewiseConstantFn) -> PiecewiseConstantFn:
    """exp(itC) f: unitary evolution, computed by diagonalizing C.

    Haar transform, mix, phase multiply by exp(itE), mix back, inverse
    transform.  Output is complex-valued even for real input.
    """
    levels = check_level(f.level, minimum=1)
    c = haar_forward(f).coeffs.astype(np.complex128)
    c = _mix_slots(c, levels)
    c *= np.exp(1j * t * spectral_diagonal(levels))
    c = _mix_slots(c, levels)
    return haar_inverse(HaarCoeffs(levels, c))


def eigen_relation_residual(idx: EigenIndex, level: int) -> float:
    """Max-norm residual of apply_c_grid(f) - E f for the labelled eigenfunction."""
    f = eigenfunction(idx, level)
    applied = apply_c_grid(f)
    return float(np.max(np.abs(applied.values - idx.eigenvalue * f.values)))


def check_block_recurrence(n: int, tol: float = 1e-12) -> None:
    """Raise ConsistencyError unless D_n matches its projection definition."""
    if not jn_projection_check(n, tol):
        raise ConsistencyError(f"scale-{n} block disagrees with its projection "
                               f"definition beyond {tol}")
