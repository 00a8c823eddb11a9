"""Phase-space rotation: closed form, semi-Lagrangian solver, spectral shift."""

import numpy as np
import pytest

from fractal_qmm import (
    ConsistencyError,
    DomainError,
    EvolutionParams,
    WignerGrid,
    center_set,
    characteristic_map,
    coherent_wigner,
    displaced_spectrum_check,
    evolve_closed_form,
    evolve_numeric,
    fit_circle,
)
from fractal_qmm.wigner import centroid_trajectory

RNG = np.random.default_rng(53)


def gaussian(nq=256, extent=4.0, q0=0.0, p0=0.0, sigma=2.0**-0.5):
    return coherent_wigner(q0, p0, sigma, q_min=-extent, q_max=extent,
                           p_min=-extent, p_max=extent, nq=nq, n_p=nq)


def l2_diff(a: WignerGrid, b: WignerGrid) -> float:
    return a.with_values(a.values - b.values).l2_norm()


class TestCharacteristicMap:
    def test_full_period_identity(self):
        q, p = RNG.standard_normal(2)
        q2, p2 = characteristic_map(q, p, 2.0 * np.pi, 0.7)
        assert abs(q2 - q) < 1e-14 and abs(p2 - p) < 1e-14

    def test_quarter_turn_about_origin(self):
        q2, p2 = characteristic_map(0.3, 0.8, np.pi / 2.0, 0.0)
        np.testing.assert_allclose([q2, p2], [-0.8, 0.3], atol=1e-15)

    def test_half_turn_about_shifted_center(self):
        q2, p2 = characteristic_map(0.0, 0.0, np.pi, 0.5)
        np.testing.assert_allclose([q2, p2], [-1.0, 0.0], atol=1e-15)

    def test_symplectic_radius_preserved(self):
        lam_e = 0.3
        q, p = 0.4, -1.1
        q2, p2 = characteristic_map(q, p, 1.234, lam_e)
        r0 = np.hypot(q + lam_e, p)
        r1 = np.hypot(q2 + lam_e, p2)
        assert abs(r1 - r0) < 1e-14

    def test_array_broadcast(self):
        q = np.linspace(-1, 1, 5)
        p = np.zeros(5)
        q2, p2 = characteristic_map(q, p, np.pi / 2.0, 0.0)
        np.testing.assert_allclose(q2, np.zeros(5), atol=1e-15)
        np.testing.assert_allclose(p2, q, atol=1e-15)


class TestCoherentState:
    def test_unit_mass(self):
        assert abs(gaussian().integral() - 1.0) < 1e-6

    def test_symmetric_about_center(self):
        g = gaussian(q0=0.5, p0=-0.25)
        qc, pc = g.centroid()
        assert abs(qc - 0.5) < 1e-9 and abs(pc + 0.25) < 1e-9

    def test_coherent_width(self):
        # sigma = 1/sqrt(2) gives Var(q) = 1/2 in the unit-frequency convention
        g = gaussian(nq=512)
        qs = g.q_centers()[:, None]
        var_q = np.sum(g.values * qs**2) * g.cell_area
        assert abs(var_q - 0.5) < 1e-6

    def test_grid_coverage_required(self):
        with pytest.raises(DomainError):
            coherent_wigner(3.0, 0.0, 1.0, q_min=-4, q_max=4,
                            p_min=-4, p_max=4, nq=64, n_p=64)

    def test_sigma_positive(self):
        with pytest.raises(DomainError):
            gaussian(sigma=0.0)


class TestClosedForm:
    def test_zero_time_exact(self):
        g = gaussian()
        out = evolve_closed_form(g, EvolutionParams(1.0, 0.3, 0.0))
        assert np.array_equal(out.values, g.values)

    def test_full_period_recovers_initial(self):
        g = gaussian(nq=512)
        out = evolve_closed_form(g, EvolutionParams(1.0, 0.5, 2.0 * np.pi))
        assert l2_diff(out, g) < 1e-10

    def test_half_turn_moves_center(self):
        g = coherent_wigner(1.0, 0.5, 2.0**-0.5, q_min=-6, q_max=6,
                            p_min=-6, p_max=6, nq=512, n_p=512)
        out = evolve_closed_form(g, EvolutionParams(1.0, 0.0, np.pi))
        ref = coherent_wigner(-1.0, -0.5, 2.0**-0.5, q_min=-6, q_max=6,
                              p_min=-6, p_max=6, nq=512, n_p=512)
        assert l2_diff(out, ref) < 1e-3

    def test_fixed_point_invariance(self):
        lam, energy = 1.0, 0.5
        g = gaussian(q0=-lam * energy)
        out = evolve_closed_form(g, EvolutionParams(lam, energy, 2.1))
        assert l2_diff(out, g) < 1e-3

    def test_composition(self):
        g = gaussian()
        p1 = EvolutionParams(1.0, 0.25, 0.7)
        p2 = EvolutionParams(1.0, 0.25, 1.5)
        both = EvolutionParams(1.0, 0.25, 2.2)
        chained = evolve_closed_form(evolve_closed_form(g, p1), p2)
        direct = evolve_closed_form(g, both)
        assert l2_diff(chained, direct) < 10.0 * g.hq**2

    def test_conservation(self):
        g = gaussian(nq=512)
        out = evolve_closed_form(g, EvolutionParams(1.0, 0.375, 1.1))
        assert abs(out.integral() - g.integral()) < 1e-3
        assert abs(out.l2_norm()**2 - g.l2_norm()**2) < 1e-3

    def test_interp_validated(self):
        with pytest.raises(DomainError):
            evolve_closed_form(gaussian(nq=32, sigma=0.5),
                               EvolutionParams(1.0, 0.0, 1.0), interp="quintic")


class TestSemiLagrangian:
    def test_constant_preserved_in_interior(self):
        grid = WignerGrid(-4, 4, -4, 4, 128, 128, np.ones((128, 128)))
        out = evolve_numeric(grid, EvolutionParams(1.0, 0.0, 0.5), 0.05)
        qq, pp = np.meshgrid(grid.q_centers(), grid.p_centers(), indexing="ij")
        interior = np.hypot(qq, pp) < 3.0  # characteristics stay in-grid
        assert np.max(np.abs(out.values[interior] - 1.0)) < 1e-12

    @pytest.mark.parametrize("interp", ["linear", "cubic"])
    def test_converges_under_refinement(self, interp):
        errors = []
        for nq in (128, 256):
            g = gaussian(nq=nq)
            params = EvolutionParams(1.0, 0.25, 1.0)
            closed = evolve_closed_form(g, params, interp=interp)
            numeric = evolve_numeric(g, params, 0.02, interp=interp)
            errors.append(l2_diff(numeric, closed))
        order = np.log2(errors[0] / errors[1])
        assert errors[1] < errors[0]
        assert order >= (0.9 if interp == "linear" else 2.0)

    def test_matches_closed_form_on_fine_grid(self):
        g = gaussian(nq=256)
        params = EvolutionParams(1.0, 0.25, 1.0)
        closed = evolve_closed_form(g, params, interp="cubic")
        numeric = evolve_numeric(g, params, 0.01, interp="cubic")
        assert l2_diff(numeric, closed) < 1e-3

    def test_dt_validated(self):
        with pytest.raises(DomainError):
            evolve_numeric(gaussian(nq=32, sigma=0.5),
                           EvolutionParams(1.0, 0.0, 1.0), dt=0.0)


class TestCenterSet:
    def test_scale_one(self):
        assert center_set(1.0, 1) == [(0.5, -0.5), (-0.5, 0.5)]

    def test_scale_three_energies(self):
        energies = sorted(e for e, _ in center_set(1.0, 3))
        expected = sorted([s * x for x in (0.5, 0.25, 0.75, 0.125, 0.375,
                                           0.625, 0.875) for s in (1, -1)])
        np.testing.assert_allclose(energies, expected, atol=1e-15)

    def test_no_duplicates(self):
        energies = [e for e, _ in center_set(2.0, 6)]
        assert len(energies) == len(set(energies))

    def test_extreme_center(self):
        lam, n_max = 1.5, 5
        centers = [abs(c) for _, c in center_set(lam, n_max)]
        assert max(centers) == lam * (2.0**n_max - 1.0) / 2.0**n_max
        assert max(centers) < lam

    @pytest.mark.parametrize("bad", [0, 21])
    def test_range(self, bad):
        with pytest.raises(DomainError):
            center_set(1.0, bad)


class TestCircleFit:
    def test_recovers_synthetic_circle(self):
        angles = np.linspace(0, 2 * np.pi, 17)
        qs = -0.4 + 1.3 * np.cos(angles)
        ps = 0.2 + 1.3 * np.sin(angles)
        a, b, r = fit_circle(qs, ps)
        np.testing.assert_allclose([a, b, r], [-0.4, 0.2, 1.3], atol=1e-12)

    def test_needs_three_points(self):
        with pytest.raises(DomainError):
            fit_circle(np.array([0.0, 1.0]), np.array([0.0, 1.0]))

    def test_centroid_trajectory_circles(self):
        g = gaussian()
        times = np.linspace(0.0, 2.0 * np.pi, 12, endpoint=False)
        for energy, center_q in center_set(1.0, 2):
            points = centroid_trajectory(g, 1.0, energy, times)
            a, b, _ = fit_circle(points[:, 0], points[:, 1])
            assert np.hypot(a - center_q, b) < g.hq


class TestDisplacedSpectrum:
    def test_zero_displacement(self):
        assert abs(displaced_spectrum_check(0.0)) < 1e-12

    def test_half_displacement_shift(self):
        shift = displaced_spectrum_check(0.5)
        assert abs(shift + 0.125) < 1e-4

    def test_even_in_displacement(self):
        assert abs(displaced_spectrum_check(0.5)
                   - displaced_spectrum_check(-0.5)) < 1e-9

    def test_coarse_grid_rejected(self):
        with pytest.raises(DomainError):
            displaced_spectrum_check(0.5, grid_size=256)

    @pytest.mark.parametrize("eps", [0.25, 0.8, 1.2])
    def test_quadratic_in_displacement(self, eps):
        assert abs(displaced_spectrum_check(eps) + 0.5 * eps**2) < 1e-4
