"""Coupling operator: grid action, detail blocks, spectrum, eigenfunctions.

Dense oracles are built in-test from first principles: the two-scale
recurrence starting at the 2x2 seed, projections through the explicit
ladder embedding, and np.kron conjugations.  The library paths must agree
with these within stated tolerances.
"""

from functools import reduce

import numpy as np
import pytest

from fractal_qmm import (
    DomainError,
    EigenIndex,
    HaarCoeffs,
    PiecewiseConstantFn,
    SignString,
    apply_c_grid,
    apply_exp_itc,
    b_transform,
    block_dn,
    dn_eigenvalues,
    eigen_index_from_value,
    eigen_relation_residual,
    eigenfunction,
    fast_apply_c,
    haar_basis_function,
    haar_forward,
    haar_inverse,
    jn_matrix,
    jn_projection_check,
    restricted_matrix,
    scaling_function,
    sign_string_eigenvalue,
    spectral_diagonal,
)
from fractal_qmm.coupling import U_MIX, eigen_coefficient_vector

RNG = np.random.default_rng(23)


def recurrence_c(level: int) -> np.ndarray:
    """Oracle: C_{n+1} = [[C_n, I], [I, C_n]] / 2 from the 2x2 seed."""
    mat = np.array([[0.5, 0.5], [0.5, 0.5]])
    for _ in range(level - 1):
        eye = np.eye(mat.shape[0])
        mat = 0.5 * np.block([[mat, eye], [eye, mat]])
    return mat


def recurrence_d(n: int) -> np.ndarray:
    """Oracle: D_0 = [0], D_{n+1} = [[D_n, I], [I, D_n]] / 2."""
    mat = np.zeros((1, 1))
    for _ in range(n):
        eye = np.eye(mat.shape[0])
        mat = 0.5 * np.block([[mat, eye], [eye, mat]])
    return mat


class TestGridApplication:
    def test_constant_is_fixed(self):
        out = apply_c_grid(PiecewiseConstantFn(1, [1.0, 1.0]))
        np.testing.assert_array_equal(out.values, [1.0, 1.0])

    def test_mother_function_annihilated(self):
        # dense oracle: C_1 = [[1,1],[1,1]]/2 applied to (1,-1)
        f = np.array([1.0, -1.0])
        np.testing.assert_allclose(recurrence_c(1) @ f, [0.0, 0.0], atol=1e-15)
        out = apply_c_grid(PiecewiseConstantFn(1, f))
        np.testing.assert_allclose(out.values, [0.0, 0.0], atol=1e-15)

    def test_detail_function_shifts(self):
        # C_2 from the recurrence sends H(1,0) to H(1,1)/2
        h10 = haar_basis_function(1, 0, 2).values
        h11 = haar_basis_function(1, 1, 2).values
        np.testing.assert_allclose(recurrence_c(2) @ h10, 0.5 * h11, atol=1e-15)
        out = apply_c_grid(PiecewiseConstantFn(2, h10))
        np.testing.assert_allclose(out.values, 0.5 * h11, atol=1e-15)

    @pytest.mark.parametrize("level", range(1, 9))
    def test_restriction_matches_recurrence(self, level):
        np.testing.assert_allclose(restricted_matrix(level), recurrence_c(level),
                                   rtol=0, atol=1e-14)

    @pytest.mark.parametrize("level", [1, 4, 8])
    def test_grid_apply_matches_matrix(self, level):
        f = RNG.standard_normal(1 << level)
        out = apply_c_grid(PiecewiseConstantFn(level, f))
        np.testing.assert_allclose(out.values, restricted_matrix(level) @ f,
                                   rtol=0, atol=1e-13)

    @pytest.mark.parametrize("level", [1, 3, 7, 12])
    def test_row_sums_are_one(self, level):
        sums = restricted_matrix(level).sum(axis=1)
        np.testing.assert_allclose(sums, 1.0, rtol=0, atol=1e-14)

    def test_level_zero_rejected(self):
        with pytest.raises(DomainError):
            apply_c_grid(PiecewiseConstantFn(0, [1.0]))

    def test_dense_cap(self):
        with pytest.raises(DomainError):
            restricted_matrix(13)


class TestDetailBlocks:
    def test_scale_zero_block(self):
        np.testing.assert_array_equal(block_dn(0), [[0.0]])

    def test_scale_one_is_half_sigma_x(self):
        # projection oracle through the explicit ladder embedding
        j1 = jn_matrix(1)
        oracle = j1.T @ recurrence_c(2) @ j1
        np.testing.assert_allclose(oracle, [[0.0, 0.5], [0.5, 0.0]], atol=1e-15)
        np.testing.assert_allclose(block_dn(1), oracle, atol=1e-15)

    def test_scale_two_first_column(self):
        # project the image of H(2,0) back onto the scale-2 detail basis
        image = apply_c_grid(haar_basis_function(2, 0, 3))
        column = [0.5**3 * np.sum(haar_basis_function(2, k, 3).values
                                  * image.values) for k in range(4)]
        np.testing.assert_allclose(column, [0.0, 0.25, 0.5, 0.0], atol=1e-15)
        np.testing.assert_allclose(block_dn(2)[:, 0], column, atol=1e-15)

    @pytest.mark.parametrize("n", range(9))
    def test_blocks_match_recurrence(self, n):
        np.testing.assert_allclose(block_dn(n), recurrence_d(n),
                                   rtol=0, atol=1e-14)

    @pytest.mark.parametrize("n", [0, 1, 6])
    def test_projection_check(self, n):
        assert jn_projection_check(n)

    def test_block_cap(self):
        with pytest.raises(DomainError):
            block_dn(13)


class TestSpectrum:
    def test_scale_one(self):
        np.testing.assert_array_equal(dn_eigenvalues(1), [-0.5, 0.5])

    def test_scale_two(self):
        np.testing.assert_array_equal(dn_eigenvalues(2),
                                      [-0.75, -0.25, 0.25, 0.75])

    def test_scale_zero(self):
        np.testing.assert_array_equal(dn_eigenvalues(0), [0.0])

    @pytest.mark.parametrize("n", range(1, 11))
    def test_dense_solver_agrees(self, n):
        eigs = np.linalg.eigvalsh(block_dn(n))
        np.testing.assert_allclose(eigs, dn_eigenvalues(n), rtol=0, atol=1e-10)
        assert np.min(np.diff(eigs)) > 1e-12  # all simple

    @pytest.mark.parametrize("n", range(1, 11))
    def test_extreme_eigenvalue(self, n):
        assert dn_eigenvalues(n)[-1] == (2.0**n - 1.0) / 2.0**n


class TestSignStrings:
    def test_eigenvalue_accumulation(self):
        assert sign_string_eigenvalue(SignString([+1, +1])) == 0.75
        assert sign_string_eigenvalue(SignString([+1, -1])) == 0.25
        assert sign_string_eigenvalue(SignString([-1])) == -0.5

    @pytest.mark.parametrize("n", range(1, 9))
    def test_multiset_equals_block_spectrum(self, n):
        values = []
        for bits in range(1 << n):
            signs = [1 - 2 * ((bits >> j) & 1) for j in range(n)]
            values.append(sign_string_eigenvalue(SignString(signs)))
        np.testing.assert_allclose(np.sort(values), dn_eigenvalues(n), atol=1e-15)

    def test_index_recovery(self):
        idx, signs = eigen_index_from_value(2, 0.75)
        assert (idx.n, idx.k, idx.s) == (2, 1, +1)
        np.testing.assert_array_equal(signs.signs, [1, 1])

        idx, signs = eigen_index_from_value(1, -0.5)
        assert (idx.n, idx.k, idx.s) == (1, 0, -1)
        np.testing.assert_array_equal(signs.signs, [-1])

        idx, signs = eigen_index_from_value(3, 5.0 / 8.0)
        assert (idx.n, idx.k, idx.s) == (3, 2, +1)
        np.testing.assert_array_equal(signs.signs, [1, 1, -1])

    @pytest.mark.parametrize("bad", [0.0, 0.5, 1.0, 0.3, -2.0])
    def test_unrepresentable_rejected(self, bad):
        with pytest.raises(DomainError):
            eigen_index_from_value(2, bad)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_bijection_roundtrip(self, n):
        for k in range(1 << (n - 1)):
            for s in (+1, -1):
                idx = EigenIndex(n, k, s)
                back, signs = eigen_index_from_value(n, idx.eigenvalue)
                assert (back.n, back.k, back.s) == (n, k, s)
                assert sign_string_eigenvalue(signs) == idx.eigenvalue

    def test_invalid_labels(self):
        with pytest.raises(DomainError):
            EigenIndex(2, 2, +1)
        with pytest.raises(DomainError):
            EigenIndex(0, 0, +1)
        with pytest.raises(DomainError):
            EigenIndex(2, 0, 2)


class TestEigenfunctions:
    def test_plus_half(self):
        f = eigenfunction(EigenIndex(1, 0, +1), 2)
        np.testing.assert_array_equal(f.values, [1.0, -1.0, 1.0, -1.0])

    def test_minus_half(self):
        f = eigenfunction(EigenIndex(1, 0, -1), 2)
        np.testing.assert_array_equal(f.values, [1.0, -1.0, -1.0, 1.0])

    def test_constant_mode_fixed_at_any_level(self):
        for level in (1, 4, 9):
            g = scaling_function(level)
            np.testing.assert_array_equal(apply_c_grid(g).values, g.values)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_exact_eigen_relation_and_walsh_values(self, n):
        for k in range(1 << (n - 1)):
            for s in (+1, -1):
                idx = EigenIndex(n, k, s)
                f = eigenfunction(idx, n + 2)
                assert eigen_relation_residual(idx, n + 2) == 0.0
                values = np.unique(f.values)
                assert values.tolist() == [-1.0, 1.0]

    def test_matches_detail_slot_tensor(self):
        level = 6
        for n in (1, 2, 4):
            for s in (+1, -1):
                idx = EigenIndex(n, (1 << (n - 1)) - 1, s)
                coeffs = haar_forward(eigenfunction(idx, level)).coeffs
                expected = np.zeros(1 << level)
                expected[(1 << n):(1 << (n + 1))] = eigen_coefficient_vector(idx)
                np.testing.assert_allclose(coeffs, expected, rtol=0, atol=1e-13)

    def test_level_too_small(self):
        with pytest.raises(DomainError):
            eigenfunction(EigenIndex(3, 0, +1), 3)


class TestFastApply:
    def test_constant_slot_fixed(self):
        c = np.zeros(8)
        c[0] = 1.0
        out = fast_apply_c(HaarCoeffs(3, c))
        np.testing.assert_array_equal(out.coeffs, c)

    def test_scale_zero_slot_annihilated(self):
        c = np.zeros(8)
        c[1] = 1.0
        out = fast_apply_c(HaarCoeffs(3, c))
        np.testing.assert_array_equal(out.coeffs, np.zeros(8))

    def test_matches_grid_path(self):
        level = 10
        worst = 0.0
        for _ in range(100):
            f = PiecewiseConstantFn(level, RNG.standard_normal(1 << level))
            grid = apply_c_grid(f).values
            fast = haar_inverse(fast_apply_c(haar_forward(f))).values
            worst = max(worst, float(np.max(np.abs(grid - fast))))
        assert worst < 1e-12

    def test_complex_input(self):
        level = 5
        values = RNG.standard_normal(1 << level) + 1j * RNG.standard_normal(1 << level)
        f = PiecewiseConstantFn(level, values)
        fast = haar_inverse(fast_apply_c(haar_forward(f))).values
        grid = apply_c_grid(f).values
        np.testing.assert_allclose(fast, grid, rtol=0, atol=1e-12)


class TestMixTransform:
    def test_direction_validated(self):
        c = HaarCoeffs(2, np.zeros(4))
        with pytest.raises(DomainError):
            b_transform(c, "sideways")

    def test_involution(self):
        level = 9
        c = HaarCoeffs(level, RNG.standard_normal(1 << level))
        twice = b_transform(b_transform(c, "forward"), "inverse")
        assert np.max(np.abs(twice.coeffs - c.coeffs)) < 1e-13

    def test_scale_one_diagonalized(self):
        conj = U_MIX @ block_dn(1) @ U_MIX
        np.testing.assert_allclose(conj, np.diag([-0.5, 0.5]), atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 6])
    def test_dense_conjugation_oracle(self, n):
        u_full = reduce(np.kron, [U_MIX] * n)
        conj = u_full @ block_dn(n) @ u_full
        np.testing.assert_allclose(conj, np.diag(dn_eigenvalues(n)),
                                   rtol=0, atol=1e-12)

    def test_spectral_diagonal_layout(self):
        level = 6
        diag = spectral_diagonal(level)
        assert diag[0] == 1.0
        assert diag[1] == 0.0
        for n in range(1, level):
            np.testing.assert_allclose(diag[(1 << n):(1 << (n + 1))],
                                       dn_eigenvalues(n), atol=1e-15)

    def test_mix_then_scale_applies_operator(self):
        # B diag B on coefficients == fast_apply_c
        level = 8
        c = HaarCoeffs(level, RNG.standard_normal(1 << level))
        mixed = b_transform(c)
        scaled = HaarCoeffs(level, mixed.coeffs * spectral_diagonal(level))
        via_diag = b_transform(scaled).coeffs
        np.testing.assert_allclose(via_diag, fast_apply_c(c).coeffs,
                                   rtol=0, atol=1e-12)


class TestUnitaryEvolution:
    def test_zero_time_is_identity(self):
        f = PiecewiseConstantFn(4, RNG.standard_normal(16))
        out = apply_exp_itc(0.0, f)
        np.testing.assert_allclose(out.values, f.values, rtol=0, atol=1e-14)

    def test_eigen_phase(self):
        idx = EigenIndex(2, 1, -1)
        f = eigenfunction(idx, 5)
        t = 0.83
        out = apply_exp_itc(t, f)
        expected = np.exp(1j * t * idx.eigenvalue) * f.values
        assert np.max(np.abs(out.values - expected)) < 1e-12

    def test_constant_mode_phase(self):
        g = scaling_function(3)
        out = apply_exp_itc(0.4, g)
        np.testing.assert_allclose(out.values, np.exp(0.4j) * g.values,
                                   rtol=0, atol=1e-13)

    def test_unitarity(self):
        f = PiecewiseConstantFn(10, RNG.standard_normal(1 << 10))
        out = apply_exp_itc(1.7, f)
        assert abs(out.l2_norm() - f.l2_norm()) < 1e-12

    def test_group_property(self):
        f = PiecewiseConstantFn(10, RNG.standard_normal(1 << 10))
        t1, t2 = 0.9, -2.3
        chained = apply_exp_itc(t1, apply_exp_itc(t2, f)).values
        direct = apply_exp_itc(t1 + t2, f).values
        assert np.max(np.abs(chained - direct)) < 1e-12
