"""Quadrature rules, basis tables, and the forward/inverse transforms."""

import math

import numpy as np
import pytest

from hnls.hermite import (
    HermiteError,
    PhysicalField,
    SpectralField,
    eval_basis,
    eval_basis_at,
    gauss_hermite_rule,
    to_physical,
    to_spectral,
    triangle_index,
    triangle_size,
)
from hnls.rng import SplitMix64

from oracles import random_field


class TestQuadratureRule:
    def test_single_node_rule(self):
        rule = gauss_hermite_rule(1, 1)
        assert rule.nodes[0] == pytest.approx(0.0, abs=1e-14)
        assert rule.weights[0] == pytest.approx(math.sqrt(math.pi), rel=1e-14)

    def test_two_node_rule(self):
        rule = gauss_hermite_rule(2, 1)
        assert sorted(rule.nodes) == pytest.approx(
            [-1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)], rel=1e-13
        )

    def test_gaussian_fourth_moment(self):
        rule = gauss_hermite_rule(40, 1)
        val = rule.integrate(rule.nodes**4 * np.exp(-rule.nodes**2))
        assert val == pytest.approx(0.75 * math.sqrt(math.pi), rel=1e-12)

    def test_scale2_is_rescaled_scale1(self):
        r1 = gauss_hermite_rule(24, 1)
        r2 = gauss_hermite_rule(24, 2)
        assert np.allclose(r2.nodes, r1.nodes / math.sqrt(2.0), atol=1e-13)
        assert np.allclose(r2.weights, r1.weights / math.sqrt(2.0), atol=1e-13)

    @pytest.mark.parametrize("scale", [1, 2])
    def test_even_moment_exactness(self, scale):
        # integral x^{2m} e^{-scale x^2} = Gamma(m + 1/2) / scale^{m + 1/2}
        Q = 20
        rule = gauss_hermite_rule(Q, scale)
        for m in range((2 * Q - 1) // 2 + 1):
            got = rule.integrate(rule.nodes ** (2 * m) * np.exp(-scale * rule.nodes**2))
            want = math.gamma(m + 0.5) / scale ** (m + 0.5)
            assert got == pytest.approx(want, rel=1e-12), f"moment 2m={2*m}"

    def test_invalid_size_rejected(self):
        with pytest.raises(HermiteError):
            gauss_hermite_rule(0, 1)


class TestBasisTable:
    def test_seed_values_at_origin(self):
        x = np.array([0.0])
        B = eval_basis_at(2, x)
        assert B[0, 0] == pytest.approx(math.pi**-0.25, rel=1e-14)
        assert B[1, 0] == pytest.approx(0.0, abs=1e-14)

    def test_orthonormality_small(self):
        basis = eval_basis(8, gauss_hermite_rule(16, 1))
        val = basis.rule.integrate(basis.values[3] * basis.values[5])
        assert abs(val) <= 1e-10

    @pytest.mark.parametrize("K", [16, 64, 128])
    def test_discrete_orthonormality(self, K):
        basis = eval_basis(K, gauss_hermite_rule(2 * K, 1))
        G = (basis.values * basis.rule.weights) @ basis.values.T
        assert np.max(np.abs(G - np.eye(K))) <= 1e-10


class TestTriangleLayout:
    def test_size(self):
        assert triangle_size(0) == 1
        assert triangle_size(2) == 6

    def test_index_within_triangle(self):
        k1, k2, deg = triangle_index(5)
        assert len(k1) == triangle_size(5)
        assert np.all(k1 + k2 == deg)
        assert np.all(deg <= 5)

    def test_coeff_accessors_roundtrip(self):
        u = SpectralField.zero(4)
        u.set_coeff(2, 1, 3.5 - 1j)
        assert u.coeff(2, 1) == 3.5 - 1j
        with pytest.raises(HermiteError):
            u.coeff(3, 2)


class TestTransforms:
    def test_zero_coefficients_zero_field(self):
        basis = eval_basis(6, gauss_hermite_rule(12, 1))
        f = to_physical(SpectralField.zero(4), basis)
        assert np.all(f.values == 0)

    def test_single_mode_tensor_product(self):
        basis = eval_basis(6, gauss_hermite_rule(12, 1))
        f = to_physical(SpectralField.mode(4, 0, 0), basis)
        want = np.outer(basis.values[0], basis.values[0])
        assert np.max(np.abs(f.values - want)) <= 1e-13

    def test_parseval(self):
        basis = eval_basis(14, gauss_hermite_rule(28, 1))
        u = random_field(12, SplitMix64(11))
        f = to_physical(u, basis)
        quad = basis.rule.integrate_2d(np.abs(f.values) ** 2)
        assert quad == pytest.approx(np.sum(np.abs(u.coeffs) ** 2), rel=1e-12)

    def test_roundtrip(self):
        basis = eval_basis(34, gauss_hermite_rule(64, 1))
        u = random_field(32, SplitMix64(3))
        v = to_spectral(to_physical(u, basis), basis, 32)
        assert np.max(np.abs(v.coeffs - u.coeffs)) <= 1e-10

    def test_delta_data_recovers_mode(self):
        basis = eval_basis(6, gauss_hermite_rule(12, 1))
        values = np.outer(basis.values[0], basis.values[0])
        c = to_spectral(PhysicalField(values, basis.rule), basis, 4)
        assert c.coeff(0, 0) == pytest.approx(1.0, abs=1e-12)
        rest = c.coeffs.copy()
        rest[0] = 0.0
        assert np.max(np.abs(rest)) <= 1e-12

    def test_linearity(self):
        basis = eval_basis(10, gauss_hermite_rule(20, 1))
        u = random_field(8, SplitMix64(7))
        v = random_field(8, SplitMix64(8))
        lhs = to_physical(u * 2.0 + v * (-0.5j), basis).values
        rhs = 2.0 * to_physical(u, basis).values - 0.5j * to_physical(v, basis).values
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    def test_basis_too_small_rejected(self):
        basis = eval_basis(4, gauss_hermite_rule(8, 1))
        with pytest.raises(HermiteError):
            to_physical(SpectralField.zero(8), basis)


class TestSpectralFieldAlgebra:
    def test_mismatched_truncations_rejected(self):
        with pytest.raises(HermiteError):
            SpectralField.zero(4) + SpectralField.zero(5)

    def test_truncate_preserves_low_modes(self):
        u = random_field(8, SplitMix64(1))
        up = u.truncate(12).truncate(8)
        assert np.allclose(up.coeffs, u.coeffs)

    def test_eval_at_matches_grid_synthesis(self):
        u = random_field(6, SplitMix64(2))
        basis = eval_basis(8, gauss_hermite_rule(16, 1))
        f = to_physical(u, basis)
        x = basis.rule.nodes
        X, Y = np.meshgrid(x, x, indexing="ij")
        direct = u.eval_at(X.ravel(), Y.ravel()).reshape(f.values.shape)
        assert np.max(np.abs(direct - f.values)) <= 1e-12
