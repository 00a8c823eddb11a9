"""Dyadic grids on (0,1], digit arithmetic, and the orthonormal Haar transform.

Grid functions are piecewise constant on the 2**L half-open cells
(j/2**L, (j+1)/2**L].  Dyadic rationals are given the infinite (trailing
ones) binary expansion, so every x in cell j shares its first L binary
digits with every other point of the cell, and those digits are exactly
the binary digits of j (most significant digit first).  This makes digit
flips exact cell permutations, which the coupling operator relies on.

Haar coefficients are stored flat in the canonical order
    G, H(0,0), H(1,0), H(1,1), H(2,0), ...
so the coefficient of H(n,k) sits at linear position 2**n + k and the
detail block of scale n occupies the contiguous slice [2**n, 2**(n+1)).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

DEFAULT_MAX_LEVEL = 24
MAX_LEVEL_ENV = "FRACTAL_QMM_MAX_LEVEL"

INV_SQRT2 = 1.0 / math.sqrt(2.0)


def max_level() -> int:
    """Global cap on the dyadic level L (a function at level L stores 2**L values)."""
    raw = os.environ.get(MAX_LEVEL_ENV)
    if raw is None:
        return DEFAULT_MAX_LEVEL
    try:
        value = int(raw)
    except ValueError as exc:
        raise DomainError(f"{MAX_LEVEL_ENV} must be an integer, got {raw!r}") from exc
    if value < 0:
        raise DomainError(f"{MAX_LEVEL_ENV} must be nonnegative, got {value}")
    return value


def check_level(level: int, minimum: int = 0) -> int:
    if level < minimum:
        raise DomainError(f"level must be >= {minimum}, got {level}")
    cap = max_level()
    if level > cap:
        raise DomainError(f"level {level} exceeds the global cap {cap} "
                          f"(override with {MAX_LEVEL_ENV})")
    return level


@dataclass
class PiecewiseConstantFn:
    """A level-L discretization of a function on (0,1].

    values[j] is the function's value on the cell (j/2**L, (j+1)/2**L].
    """

    level: int
    values: np.ndarray

    def __post_init__(self):
        check_level(self.level)
        self.values = np.asarray(self.values)
        if self.values.dtype.kind not in "fc":
            self.values = self.values.astype(np.float64)
        if self.values.shape != (1 << self.level,):
            raise DomainError(
                f"level {self.level} requires exactly {1 << self.level} values, "
                f"got shape {self.values.shape}")

    @property
    def n_cells(self) -> int:
        return 1 << self.level

    def midpoints(self) -> np.ndarray:
        """Cell midpoints (j + 1/2) / 2**L, exact dyadics."""
        return (np.arange(self.n_cells) + 0.5) * 0.5**self.level

    def l2_norm(self) -> float:
        """The L2(0,1] norm: cell measure is 2**-L."""
        return float(np.sqrt(0.5**self.level * np.sum(np.abs(self.values) ** 2)))


@dataclass
class HaarCoeffs:
    """Haar coefficients in canonical order: position 0 is the G coefficient,
    position 2**n + k the coefficient of H(n,k)."""

    level: int
    coeffs: np.ndarray

    def __post_init__(self):
        check_level(self.level)
        self.coeffs = np.asarray(self.coeffs)
        if self.coeffs.dtype.kind not in "fc":
            self.coeffs = self.coeffs.astype(np.float64)
        if self.coeffs.shape != (1 << self.level,):
            raise DomainError(
                f"level {self.level} requires exactly {1 << self.level} coefficients, "
                f"got shape {self.coeffs.shape}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def coeff_index(n: int, k: int) -> int:
    """Linear position of the H(n,k) coefficient."""
    if n < 0 or not 0 <= k < (1 << n):
        raise DomainError(f"invalid Haar index (n={n}, k={k})")
    return (1 << n) + k


def coeff_label(position: int) -> tuple[int, int]:
    """Inverse of coeff_index; position 0 returns (-1, 0) for the G slot."""
    if position < 0:
        raise DomainError(f"invalid coefficient position {position}")
    if position == 0:
        return (-1, 0)
    n = position.bit_length() - 1
    return (n, position - (1 << n))


def dyadic_digits(cell_index: int, level: int) -> np.ndarray:
    """First `level` binary digits (a_1, ..., a_L) shared by all x in the cell.

    a_1 is the most significant bit of the cell index.
    """
    check_level(level)
    if not 0 <= cell_index < (1 << level):
        raise DomainError(f"cell index {cell_index} out of range for level {level}")
    return np.array([(cell_index >> (level - k)) & 1 for k in range(1, level + 1)],
                    dtype=np.int8)


def scaling_function(level: int) -> PiecewiseConstantFn:
    """The constant function G = 1 on (0,1], sampled at the given level."""
    check_level(level)
    return PiecewiseConstantFn(level, np.ones(1 << level))


def haar_basis_function(n: int, k: int, level: int) -> PiecewiseConstantFn:
    """H(n,k) = 2**(n/2) H(2**n x - k) sampled exactly at `level` >= n + 1.

    The value is +2**(n/2) on the left half of the support cell and
    -2**(n/2) on the right half.
    """
    if n < 0:
        raise DomainError(f"scale n must be >= 0, got {n}")
    if not 0 <= k < (1 << n):
        raise DomainError(f"shift k={k} out of range for scale n={n}")
    check_level(level, minimum=n + 1)
    values = np.zeros(1 << level)
    width = 1 << (level - n)        # cells per support block
    start = k * width
    amp = 2.0 ** (0.5 * n)
    values[start:start + width // 2] = amp
    values[start + width // 2:start + width] = -amp
    return PiecewiseConstantFn(level, values)


def haar_forward(f: PiecewiseConstantFn) -> HaarCoeffs:
    """Haar coefficients of f by the pairwise average/difference pyramid.

    coeffs[0] is the integral of f; coeffs[2**n + k] is the inner product
    with H(n,k).  Cost O(2**L); exactly invertible by haar_inverse.
    """
    levels = f.level
    v = f.values * 2.0 ** (-0.5 * levels)
    coeffs = np.empty(1 << levels, dtype=v.dtype)
    for n in range(levels - 1, -1, -1):
        even = v[0::2]
        odd = v[1::2]
        coeffs[(1 << n):(1 << (n + 1))] = (even - odd) * INV_SQRT2
        v = (even + odd) * INV_SQRT2
    coeffs[0] = v[0]
    return HaarCoeffs(levels, coeffs)


def haar_inverse(c: HaarCoeffs) -> PiecewiseConstantFn:
    """Exact inverse of haar_forward (the transform is orthogonal)."""
    levels = c.level
    v = c.coeffs[:1].copy()
    for n in range(levels):
        d = c.coeffs[(1 << n):(1 << (n + 1))]
        nxt = np.empty(2 * v.size, dtype=np.result_type(v, d))
        nxt[0::2] = (v + d) * INV_SQRT2
        nxt[1::2] = (v - d) * INV_SQRT2
        v = nxt
    return PiecewiseConstantFn(levels, v * 2.0 ** (0.5 * levels))
