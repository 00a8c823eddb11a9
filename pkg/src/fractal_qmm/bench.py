"""Timing harness comparing the operator application paths.

Times the direct grid application, the Haar-block fast path (transform,
block apply, inverse transform), and a dense mat-vec (levels <= 12 only),
and reports the per-dimension nonzero counts of the qubit coupling matrix
versus its block representation.
"""

from __future__ import annotations

import time

import numpy as np

from . import coupling
from .dyadic import PiecewiseConstantFn, check_level, haar_forward, haar_inverse
from .errors import DomainError

DENSE_LIMIT = 12


def haar_block_nnz(level: int) -> int:
    """Nonzeros of the block representation at `level`: the fixed constant
    mode plus n 2**n entries per detail scale n >= 1."""
    return 1 + sum(n * (1 << n) for n in range(1, level))


def _best_of(fn, repeats: int) -> float:
    fn()  # warm-up
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run_bench(levels, repeats: int = 3) -> list[dict]:
    """One row per level: timings in seconds and nnz-per-dimension counts."""
    rows = []
    for level in levels:
        check_level(level, minimum=1)
        rng = np.random.default_rng(level)
        f = PiecewiseConstantFn(level, rng.standard_normal(1 << level))

        grid_s = _best_of(lambda: coupling.apply_c_grid(f), repeats)
        fast_s = _best_of(
            lambda: haar_inverse(coupling.fast_apply_c(haar_forward(f))), repeats)

        dense_s = None
        if level <= DENSE_LIMIT:
            mat = coupling.restricted_matrix(level)
            vec = f.values
            dense_s = _best_of(lambda: mat @ vec, repeats)

        dim = 1 << level
        rows.append({
            "L": level,
            "N": dim,
            "grid_seconds": grid_s,
            "fast_seconds": fast_s,
            "dense_seconds": dense_s,
            "coupling_nnz_per_dim": level,
            "block_nnz_per_dim": haar_block_nnz(level) / dim,
        })
    return rows


def fast_apply_time(level: int, repeats: int = 5) -> float:
    """Best-of-N wall time of the block application alone."""
    check_level(level, minimum=1)
    rng = np.random.default_rng(level)
    c = haar_forward(PiecewiseConstantFn(level, rng.standard_normal(1 << level)))
    return _best_of(lambda: coupling.fast_apply_c(c), repeats)


def scaling_ratios(level_lo: int = 16, level_hi: int = 20,
                   repeats: int = 5) -> list[float]:
    """Consecutive wall-time ratios of fast_apply_c over [level_lo, level_hi]."""
    if level_lo < 1 or level_hi <= level_lo:
        raise DomainError("need 1 <= level_lo < level_hi")
    times = {lv: fast_apply_time(lv, repeats) for lv in range(level_lo, level_hi + 1)}
    return [times[lv + 1] / times[lv] for lv in range(level_lo, level_hi)]
