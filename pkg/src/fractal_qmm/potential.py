"""The continuum potential: periodized-Haar partial sums and the multiplier.

The K-term partial sum -Omega sum_{k=1..K} 2**-(k+1) r_k(x), with r_k the
square-wave sign of digit k, is piecewise constant at level K and equals the
cell-midpoint sampling of Omega (x - 1/2) exactly.  Its Haar coefficients
are -Omega 2**(-3k/2 - 2), the same for every shift l at scale k, with a
vanishing mean.  The square wave is evaluated through the digit parity of
the dyadic cell, never by floating-point mod, so cell boundaries cannot be
misclassified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import PiecewiseConstantFn, check_level
from .errors import DomainError


@dataclass
class PotentialSpec:
    """Energy scale and truncation depth of the partial-sum potential."""

    omega: float
    cutoff: int

    def __post_init__(self):
        if self.cutoff < 1:
            raise DomainError(f"truncation depth must be >= 1, got {self.cutoff}")


def rademacher_partial_sum(spec: PotentialSpec, level: int) -> PiecewiseConstantFn:
    """The K-term square-wave sum sampled at `level` >= K.

    Digit k of a cell contributes -(omega/2**(k+1)) when the digit is 0 and
    +(omega/2**(k+1)) when it is 1.  The unit-scale accumulation is exact
    (all partial sums are short dyadics), so the result is bitwise equal to
    omega * (level-K midpoint - 1/2) repeated onto the finer grid.
    """
    check_level(level)
    if level < spec.cutoff:
        raise DomainError(f"sampling level {level} must be >= truncation depth "
                          f"{spec.cutoff}")
    cells = np.arange(1 << spec.cutoff)
    acc = np.zeros(1 << spec.cutoff)
    for k in range(1, spec.cutoff + 1):
        digit = (cells >> (spec.cutoff - k)) & 1
        acc += (2 * digit - 1) * 0.5 ** (k + 1)
    values = spec.omega * acc
    if level > spec.cutoff:
        values = np.repeat(values, 1 << (level - spec.cutoff))
    return PiecewiseConstantFn(level, values)


def potential_haar_coefficient(k: int, omega: float = 1.0) -> float:
    """The common Haar coefficient of the limit potential at scale k:
    -omega * 2**(-3k/2 - 2), identical for every shift l.  The mean
    coefficient is 0."""
    if k < 0:
        raise DomainError(f"scale k must be >= 0, got {k}")
    return -omega * 2.0 ** (-1.5 * k - 2.0)


def apply_potential(f: PiecewiseConstantFn, omega: float = 1.0) -> PiecewiseConstantFn:
    """Multiply cell-wise by omega (midpoint - 1/2): the orthogonal projection
    of the linear multiplier onto the level-L grid."""
    return PiecewiseConstantFn(f.level, f.values * (omega * (f.midpoints() - 0.5)))
