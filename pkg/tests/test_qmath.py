"""Tests for the dense 2x2 / 4x4 operator toolkit."""

import math
import os
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from src.config import settings
from src.linalg.qmath import (
    NonHermitianError,
    NonUnitaryError,
    as_operator,
    assert_unitary,
    dagger,
    expm_oracle,
    identity,
    is_hermitian,
    is_unitary,
    kron,
    on_first,
    on_second,
    pauli,
    spin_operators,
    svd2,
)
from src.protocol.heisenberg import hamiltonian_isotropic, propagator_step1


def random_hermitian(rng, dim=4):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (m + dagger(m)) / 2


class TestPauli:
    """Test cases for the Pauli constants."""

    def test_pauli_z_is_diagonal(self):
        """sigma_z is diag(1, -1)."""
        assert_allclose(pauli("z"), np.diag([1, -1]))

    def test_pauli_squares_to_identity(self):
        """sigma_x squared is the identity."""
        assert_allclose(pauli("x") @ pauli("x"), identity(2))

    def test_pauli_algebra(self):
        """sigma_x sigma_y = i sigma_z."""
        assert_allclose(pauli("x") @ pauli("y"), 1j * pauli("z"))

    def test_pauli_is_hermitian_and_unitary(self):
        """Every Pauli matrix is hermitian and unitary."""
        for axis in "xyz":
            assert is_hermitian(pauli(axis))
            assert is_unitary(pauli(axis))

    def test_pauli_invalid_axis(self):
        """Unknown axes are rejected."""
        with pytest.raises(ValueError):
            pauli("w")

    def test_pauli_returns_copy(self):
        """Mutating a returned matrix does not change the constant."""
        z = pauli("z")
        z[0, 0] = 5
        assert pauli("z")[0, 0] == 1


class TestKron:
    """Test cases for tensor products in the shared basis order."""

    def test_kron_identity(self):
        """I x I is the 4x4 identity."""
        assert_allclose(kron(identity(2), identity(2)), identity(4))

    def test_kron_basis_order(self):
        """sigma_z on spin 1 gives diag(1, 1, -1, -1)."""
        assert_allclose(kron(pauli("z"), identity(2)), np.diag([1, 1, -1, -1]))

    def test_kron_xx_antidiagonal(self):
        """sigma_x x sigma_x has ones on the anti-diagonal."""
        assert_allclose(kron(pauli("x"), pauli("x")), np.fliplr(np.eye(4)))

    def test_kron_bilinear(self):
        """kron(a + b, c) = kron(a, c) + kron(b, c)."""
        rng = np.random.default_rng(3)
        for _ in range(100):
            a, b, c = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(3))
            assert np.max(np.abs(kron(a + b, c) - kron(a, c) - kron(b, c))) <= 1e-15 * 10

    def test_lifts(self):
        """on_first/on_second place the operator on the right tensor slot."""
        assert_allclose(on_first(pauli("x")), np.kron(pauli("x"), np.eye(2)))
        assert_allclose(on_second(pauli("x")), np.kron(np.eye(2), pauli("x")))

    def test_spin_operators_commutation(self):
        """[Sx, Sy] = i Sz and the two spins commute."""
        sx, sy, sz, ix, iy, iz = spin_operators()
        assert_allclose(sx @ sy - sy @ sx, 1j * sz, atol=1e-15)
        assert_allclose(sx @ ix - ix @ sx, np.zeros((4, 4)), atol=1e-15)

    def test_as_operator_rejects_bad_shape(self):
        """Shape mismatches raise ValueError."""
        with pytest.raises(ValueError):
            as_operator(np.eye(3), 2)

    def test_as_operator_rejects_nan(self):
        """Non-finite entries raise ValueError."""
        with pytest.raises(ValueError):
            as_operator([[np.nan, 0], [0, 1]], 2)


class TestUnitarity:
    """Test cases for unitarity checks."""

    def test_assert_unitary_passes(self):
        """Unitary input is returned unchanged."""
        assert_allclose(assert_unitary(pauli("y")), pauli("y"))

    def test_assert_unitary_rejects(self):
        """A scaled matrix is not unitary."""
        with pytest.raises(NonUnitaryError):
            assert_unitary(2 * identity(2))

    def test_default_tolerance_from_settings(self, monkeypatch):
        """Without an explicit tol the checks use settings.numeric_tolerance."""
        nearly = (1 + 1e-8) * identity(2)
        assert not is_unitary(nearly)
        monkeypatch.setattr(settings, "numeric_tolerance", 1e-6)
        assert is_unitary(nearly)
        assert is_hermitian(nearly + 1e-9j * identity(2))
        assert_allclose(assert_unitary(nearly), nearly)


class TestExpmOracle:
    """Test cases for the brute-force matrix exponential."""

    def test_zero_time_is_identity(self):
        """exp(0) is the identity."""
        rng = np.random.default_rng(0)
        assert_allclose(expm_oracle(random_hermitian(rng), 0.0), identity(4), atol=1e-14)

    def test_matches_isotropic_closed_form(self):
        """A = 1, t = pi agrees with the closed-form step-one propagator."""
        oracle = expm_oracle(hamiltonian_isotropic(1.0), math.pi)
        assert np.max(np.abs(oracle - propagator_step1(1.0, math.pi))) <= 1e-12

    def test_group_property(self):
        """U(t) U(-t) is the identity."""
        rng = np.random.default_rng(1)
        h = random_hermitian(rng)
        assert np.max(np.abs(expm_oracle(h, 2.5) @ expm_oracle(h, -2.5) - identity(4))) <= 1e-12

    def test_unitary_for_random_hermitian(self):
        """1000 random hermitian matrices and times give unitary results."""
        rng = np.random.default_rng(2)
        for _ in range(1000):
            u = expm_oracle(random_hermitian(rng), rng.uniform(0, 10))
            assert is_unitary(u, 1e-10)

    def test_eigh_and_series_agree(self):
        """Both oracle paths give the same exponential."""
        rng = np.random.default_rng(4)
        for _ in range(50):
            h, t = random_hermitian(rng), rng.uniform(0, 5)
            diff = expm_oracle(h, t, method="eigh") - expm_oracle(h, t, method="series")
            assert np.max(np.abs(diff)) <= 1e-10

    def test_rejects_non_hermitian(self):
        """Non-hermitian generators are rejected."""
        with pytest.raises(NonHermitianError):
            expm_oracle(np.triu(np.ones((4, 4))), 1.0)

    def test_rejects_unknown_method(self):
        """Only eigh, series and auto are accepted."""
        with pytest.raises(ValueError):
            expm_oracle(identity(4), 1.0, method="pade")


class TestSVD2:
    """Test cases for the 2x2 singular value decomposition."""

    def test_identity(self):
        """svd2(I) has singular values (1, 1)."""
        assert svd2(identity(2)).singular_values == pytest.approx((1.0, 1.0))

    def test_rank_one(self):
        """svd2(diag(1, 0)) has singular values (1, 0)."""
        assert svd2(np.diag([1.0, 0.0])).singular_values == pytest.approx((1.0, 0.0))

    def test_triplet_amplitudes(self):
        """The T0 amplitude matrix has equal singular values 1/sqrt(2)."""
        s = svd2(np.array([[0, 1], [1, 0]]) / math.sqrt(2)).singular_values
        assert s == pytest.approx((1 / math.sqrt(2), 1 / math.sqrt(2)), abs=1e-15)

    def test_reconstruction_random(self):
        """1000 random matrices in the unit disk are reconstructed within 1e-12."""
        rng = np.random.default_rng(5)
        for _ in range(1000):
            a = np.sqrt(rng.uniform(0, 1, (2, 2))) * np.exp(1j * rng.uniform(0, 2 * np.pi, (2, 2)))
            result = svd2(a)
            s1, s2 = result.singular_values
            assert s1 >= s2 >= 0
            assert np.max(np.abs(result.reconstruct() - a)) <= 1e-12
            assert is_unitary(result.left, 1e-12) and is_unitary(result.right, 1e-12)

    def test_left_gauge(self):
        """The first nonzero entry of each left column is real and nonnegative."""
        rng = np.random.default_rng(6)
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        left = svd2(a).left
        for k in range(2):
            assert abs(left[0, k].imag) <= 1e-15
            assert left[0, k].real >= 0
