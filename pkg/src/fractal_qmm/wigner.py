"""Phase-space transport of the field conditioned on an array eigenstate.

With the qubit energy scale switched off, a field state whose array factor
is the eigenfunction with eigenvalue E obeys a first-order transport
equation in the Wigner plane whose characteristics are circles centered at
(-lam*E, 0): rigid rotation at unit angular frequency (hbar = 1, omega = 1).
The closed-form solution pulls the initial data back along the rotation;
the semi-Lagrangian solver steps the same backtrace one dt at a time and
re-interpolates, so its only error is interpolation, proportional to the
distance travelled and the grid spacing to the interpolation order.

The displaced-oscillator check cross-validates the conditioning: adding
eps*Q to the oscillator Hamiltonian shifts every eigenvalue by -eps**2/2,
reproduced here by finite differences on a position grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConsistencyError, DomainError

INTERP_KINDS = ("linear", "cubic")


@dataclass
class WignerGrid:
    """A rectangular (q, p) grid with values at cell centers; rows index q."""

    q_min: float
    q_max: float
    p_min: float
    p_max: float
    nq: int
    np: int
    values: np.ndarray

    def __post_init__(self):
        if self.nq < 1 or self.np < 1:
            raise DomainError("grid needs at least one cell per axis")
        if self.q_max <= self.q_min or self.p_max <= self.p_min:
            raise DomainError("grid extents must be increasing")
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.nq, self.np):
            raise DomainError(f"values shape {self.values.shape} does not match "
                              f"(nq, np) = ({self.nq}, {self.np})")

    @property
    def hq(self) -> float:
        return (self.q_max - self.q_min) / self.nq

    @property
    def hp(self) -> float:
        return (self.p_max - self.p_min) / self.np

    @property
    def cell_area(self) -> float:
        return self.hq * self.hp

    def q_centers(self) -> np.ndarray:
        return self.q_min + (np.arange(self.nq) + 0.5) * self.hq

    def p_centers(self) -> np.ndarray:
        return self.p_min + (np.arange(self.np) + 0.5) * self.hp

    def integral(self) -> float:
        """Midpoint-rule integral of the values over the grid."""
        return float(np.sum(self.values) * self.cell_area)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2) * self.cell_area))

    def with_values(self, values: np.ndarray) -> "WignerGrid":
        return WignerGrid(self.q_min, self.q_max, self.p_min, self.p_max,
                          self.nq, self.np, values)

    def centroid(self) -> tuple[float, float]:
        mass = self.integral()
        if mass == 0.0:
            raise DomainError("centroid of an identically zero grid")
        qc = float(np.sum(self.values * self.q_centers()[:, None]) * self.cell_area)
        pc = float(np.sum(self.values * self.p_centers()[None, :]) * self.cell_area)
        return qc / mass, pc / mass


@dataclass
class EvolutionParams:
    """Rotation parameters: coupling lam, array eigenvalue E, time t.

    hbar and the field frequency are fixed to 1, so the rotation center is
    (-lam * E, 0) and the period is 2*pi.
    """

    lam: float
    energy: float
    t: float

    @property
    def center_q(self) -> float:
        return -self.lam * self.energy


def characteristic_map(q, p, t: float, lam_e: float):
    """Rotate (q, p) by angle t about (-lam_e, 0); exact and symplectic.

    Accepts scalars or arrays (broadcast elementwise).
    """
    ct, st = np.cos(t), np.sin(t)
    qs = q + lam_e
    return ct * qs - st * p - lam_e, st * qs + ct * p


def _backtrace_coords(grid: WignerGrid, angle: float,
                      lam_e: float) -> tuple[np.ndarray, np.ndarray]:
    """Fractional array indices of each node's preimage under rotation by
    -angle, ready for interpolation."""
    qq, pp = np.meshgrid(grid.q_centers(), grid.p_centers(), indexing="ij")
    qb, pb = characteristic_map(qq, pp, -angle, lam_e)
    iq = (qb - grid.q_min) / grid.hq - 0.5
    ip = (pb - grid.p_min) / grid.hp - 0.5
    return iq, ip


def _keys_weights(frac: np.ndarray) -> list[np.ndarray]:
    """Cubic-convolution weights (a = -1/2) for the four nodes around a
    point at fractional offset `frac` past the second node."""
    a = -0.5

    def outer(d):
        return ((a * d - 5.0 * a) * d + 8.0 * a) * d - 4.0 * a

    def inner(d):
        return ((a + 2.0) * d - (a + 3.0)) * d * d + 1.0

    return [outer(frac + 1.0), inner(frac), inner(1.0 - frac), outer(2.0 - frac)]


class _GridSampler:
    """Interpolation at fixed fractional coordinates with precomputed gather
    indices and weights, so repeated sampling (semi-Lagrangian stepping)
    costs a handful of flat gathers per step.

    Nodes falling outside the grid contribute 0 (their weight is masked),
    which fades values to zero across the boundary fringe and returns
    exactly 0 for fully outside preimages.
    """

    def __init__(self, shape: tuple[int, int], iq: np.ndarray, ip: np.ndarray,
                 interp: str):
        if interp not in INTERP_KINDS:
            raise DomainError(f"interp must be one of {INTERP_KINDS}, "
                              f"got {interp!r}")
        nq, n_p = shape
        iq = iq.ravel()
        ip = ip.ravel()
        base_q = np.floor(iq).astype(np.int64)
        base_p = np.floor(ip).astype(np.int64)
        frac_q = iq - base_q
        frac_p = ip - base_p
        if interp == "linear":
            offsets = (0, 1)
            weights_q = [1.0 - frac_q, frac_q]
            weights_p = [1.0 - frac_p, frac_p]
        else:
            offsets = (-1, 0, 1, 2)
            weights_q = _keys_weights(frac_q)
            weights_p = _keys_weights(frac_p)

        self._shape = shape
        self._indices = []
        self._weights = []
        for oi, wq in zip(offsets, weights_q):
            qi = base_q + oi
            q_ok = (qi >= 0) & (qi < nq)
            q_clip = np.clip(qi, 0, nq - 1)
            for oj, wp in zip(offsets, weights_p):
                pj = base_p + oj
                ok = q_ok & (pj >= 0) & (pj < n_p)
                self._indices.append(q_clip * n_p + np.clip(pj, 0, n_p - 1))
                self._weights.append(wq * wp * ok)

    def __call__(self, values: np.ndarray) -> np.ndarray:
        flat = values.ravel()
        out = self._weights[0] * flat[self._indices[0]]
        for idx, w in zip(self._indices[1:], self._weights[1:]):
            out += w * flat[idx]
        return out.reshape(self._shape)


def evolve_closed_form(f0: WignerGrid, params: EvolutionParams,
                       interp: str = "linear") -> WignerGrid:
    """Evaluate the rotated solution at time t in one interpolation pass.

    Preimages outside the grid take the value 0 (truncation of a compactly
    concentrated state).
    """
    iq, ip = _backtrace_coords(f0, params.t, params.lam * params.energy)
    sampler = _GridSampler(f0.values.shape, iq, ip, interp)
    return f0.with_values(sampler(f0.values))


def evolve_numeric(f0: WignerGrid, params: EvolutionParams, dt: float,
                   interp: str = "linear") -> WignerGrid:
    """Semi-Lagrangian stepping: backtrace one step along the exact
    characteristic and interpolate, repeated to time t.

    Unconditionally stable; converges to evolve_closed_form as the grid
    refines, at the interpolation order (the per-step backtrace is exact,
    so interpolation is the only error source and it scales with the
    distance travelled, not with dt).
    """
    if dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    steps = max(1, int(round(abs(params.t) / dt)))
    angle = params.t / steps
    iq, ip = _backtrace_coords(f0, angle, params.lam * params.energy)
    sampler = _GridSampler(f0.values.shape, iq, ip, interp)
    values = f0.values
    for _ in range(steps):
        values = sampler(values)
    return f0.with_values(values)


def coherent_wigner(q0: float, p0: float, sigma: float, *,
                    q_min: float, q_max: float, p_min: float, p_max: float,
                    nq: int, n_p: int) -> WignerGrid:
    """An isotropic Gaussian bump at (q0, p0), normalized to unit mass on the
    grid (midpoint rule).

    The grid must cover at least 5 sigma around the center; sigma = 1/sqrt(2)
    is the coherent-state width in the unit-frequency convention.
    """
    if sigma <= 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    margin = 5.0 * sigma
    if (q0 - margin < q_min or q0 + margin > q_max
            or p0 - margin < p_min or p0 + margin > p_max):
        raise DomainError("grid too small: needs >= 5 sigma around the center")
    grid = WignerGrid(q_min, q_max, p_min, p_max, nq, n_p,
                      np.zeros((nq, n_p)))
    qq, pp = np.meshgrid(grid.q_centers(), grid.p_centers(), indexing="ij")
    values = np.exp(-((qq - q0)**2 + (pp - p0)**2) / (2.0 * sigma**2))
    values /= np.sum(values) * grid.cell_area
    return grid.with_values(values)


def center_set(lam: float, n_max: int) -> list[tuple[float, float]]:
    """All (eigenvalue E, rotation center -lam*E) for scales n <= n_max.

    The E are exactly the odd-numerator dyadics in (-1, 1); they are dense
    in that interval as n_max grows, so the accessible centers fill
    (-lam, lam) on the q axis.
    """
    if not 1 <= n_max <= 20:
        raise DomainError(f"n_max must be in [1, 20], got {n_max}")
    out = []
    for n in range(1, n_max + 1):
        for k in range(1 << (n - 1)):
            for s in (+1, -1):
                energy = s * (2 * k + 1) * 0.5**n
                out.append((energy, -lam * energy))
    return out


def fit_circle(qs: np.ndarray, ps: np.ndarray) -> tuple[float, float, float]:
    """Least-squares circle through the points: returns (center_q, center_p, r).

    Algebraic fit of q**2 + p**2 = 2 a q + 2 b p + c.
    """
    qs = np.asarray(qs, dtype=np.float64)
    ps = np.asarray(ps, dtype=np.float64)
    if qs.size < 3:
        raise DomainError("circle fit needs at least 3 points")
    design = np.column_stack([2.0 * qs, 2.0 * ps, np.ones(qs.size)])
    rhs = qs**2 + ps**2
    (a, b, c), *_ = np.linalg.lstsq(design, rhs, rcond=None)
    return float(a), float(b), float(np.sqrt(max(c + a * a + b * b, 0.0)))


def centroid_trajectory(f0: WignerGrid, lam: float, energy: float,
                        times: np.ndarray, interp: str = "linear") -> np.ndarray:
    """Centroids of independent closed-form snapshots at the given times."""
    points = np.empty((len(times), 2))
    for i, t in enumerate(times):
        frame = evolve_closed_form(f0, EvolutionParams(lam, energy, float(t)),
                                   interp=interp)
        points[i] = frame.centroid()
    return points


def displaced_spectrum_check(eps: float, grid_size: int = 2048, *,
                             x_max: float = 12.0, n_eigs: int = 20) -> float:
    """Finite-difference spectral-shift check for H = (P**2 + Q**2)/2 + eps*Q.

    Diagonalizes the tridiagonal discretization on [-x_max, x_max] (Dirichlet)
    for eps and for 0 on the same grid, verifies the eps spectrum matches
    (n + 1/2) - eps**2/2 within the measured discretization error, and
    returns the fitted constant shift (mean difference of the two spectra).
    """
    if grid_size < 512:
        raise DomainError(f"grid too coarse: grid_size must be >= 512, "
                          f"got {grid_size}")
    h = 2.0 * x_max / (grid_size + 1)
    x = -x_max + h * np.arange(1, grid_size + 1)
    kinetic = 1.0 / h**2
    off = np.full(grid_size - 1, -0.5 / h**2)

    def lowest(e: float) -> np.ndarray:
        diag = kinetic + 0.5 * x**2 + e * x
        return scipy.linalg.eigh_tridiagonal(
            diag, off, select="i", select_range=(0, n_eigs - 1),
            eigvals_only=True)

    base = lowest(0.0)
    shifted = lowest(eps)
    exact = np.arange(n_eigs) + 0.5
    disc_err = float(np.max(np.abs(base - exact)))
    target = exact - 0.5 * eps**2
    if np.max(np.abs(shifted - target)) > 2.0 * disc_err + 1e-8:
        raise ConsistencyError("displaced spectrum deviates from the "
                               "closed-form shift beyond discretization error")
    return float(np.mean(shifted - base))
