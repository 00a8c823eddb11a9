"""Text-first serialization: CSV, Matrix Market, and flat binary frames.

All writers format floats with repr-precision "%.17g" so repeated runs
produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .dyadic import HaarCoeffs, PiecewiseConstantFn, coeff_label
from .qubits import DiagonalOperator, SparseOperator
from .wigner import WignerGrid


def _fmt(value) -> str:
    if isinstance(value, complex) or (hasattr(value, "imag") and value.imag != 0):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    return f"{float(np.real(value)):.17g}"


def write_function_csv(path, fn: PiecewiseConstantFn) -> None:
    """One value per line under a '# level=L' header."""
    lines = [f"# level={fn.level}"]
    lines += [_fmt(v) for v in fn.values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_function_csv(path) -> PiecewiseConstantFn:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or not lines[0].startswith("# level="):
        raise ValueError(f"{path}: missing '# level=' header")
    level = int(lines[0].split("=", 1)[1])
    values = np.array([complex(s) if "j" in s else float(s) for s in lines[1:]])
    if values.dtype.kind == "c" and np.all(values.imag == 0):
        values = values.real
    return PiecewiseConstantFn(level, values)


def write_coeffs_csv(path, coeffs: HaarCoeffs) -> None:
    """Columns (index, n, k, value); row 0 is the constant-mode coefficient,
    marked with n = -1."""
    lines = ["index,n,k,value"]
    for idx, value in enumerate(coeffs.coeffs):
        n, k = coeff_label(idx)
        lines.append(f"{idx},{n},{k},{_fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_eigenfunction_csv(path, fn: PiecewiseConstantFn) -> None:
    """Columns (cell, x, value) with x the cell midpoint."""
    lines = ["cell,x,value"]
    mids = fn.midpoints()
    for j, value in enumerate(fn.values):
        lines.append(f"{j},{_fmt(mids[j])},{_fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_spectrum_csv(path, rows) -> None:
    """Rows of (n, k, s, E) with s written as '+'/'-'."""
    lines = ["n,k,s,E"]
    for n, k, s, energy in rows:
        sign = "+" if s >= 0 else "-"
        lines.append(f"{n},{k},{sign},{_fmt(energy)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_spy_csv(path, rows, cols) -> None:
    lines = ["row,col"]
    lines += [f"{r},{c}" for r, c in zip(rows, cols)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_matrix_market(path, operator) -> None:
    """Matrix Market coordinate export of a SparseOperator or dense array."""
    if isinstance(operator, SparseOperator):
        matrix = operator.to_coo()
    else:
        matrix = scipy.sparse.coo_matrix(np.asarray(operator))
    scipy.io.mmwrite(str(path), matrix)


def write_diagonal_csv(path, operator: DiagonalOperator) -> None:
    lines = ["index,value"]
    lines += [f"{i},{_fmt(v)}" for i, v in enumerate(operator.diag)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_coefficient_table_csv(path, pairs) -> None:
    """Rows of (k, coefficient)."""
    lines = ["k,coefficient"]
    lines += [f"{k},{_fmt(c)}" for k, c in pairs]
    Path(path).write_text("\n".join(lines) + "\n")


def write_wigner_csv(path, grid: WignerGrid) -> None:
    """Columns (q, p, value), row-major over the (q, p) cell centers."""
    qs = grid.q_centers()
    ps = grid.p_centers()
    lines = ["q,p,value"]
    for i in range(grid.nq):
        qi = _fmt(qs[i])
        row = grid.values[i]
        lines += [f"{qi},{_fmt(ps[j])},{_fmt(row[j])}" for j in range(grid.np)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_wigner_bin(path, grid: WignerGrid, t: float | None = None) -> None:
    """Row-major float64 frame plus a JSON sidecar with extents and shape."""
    path = Path(path)
    grid.values.astype("<f8").tofile(path)
    sidecar = {
        "q_min": grid.q_min, "q_max": grid.q_max,
        "p_min": grid.p_min, "p_max": grid.p_max,
        "nq": grid.nq, "np": grid.np,
        "dtype": "<f8", "order": "row-major",
    }
    if t is not None:
        sidecar["t"] = t
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def read_wigner_bin(path) -> tuple[WignerGrid, float | None]:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    values = np.fromfile(path, dtype="<f8").reshape(meta["nq"], meta["np"])
    grid = WignerGrid(meta["q_min"], meta["q_max"], meta["p_min"], meta["p_max"],
                      meta["nq"], meta["np"], values)
    return grid, meta.get("t")
