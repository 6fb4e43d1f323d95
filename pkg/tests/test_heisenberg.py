"""Tests for the two-step preparation protocol."""

import math
import os
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import settings as hyp_settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from src.linalg.qmath import expm_oracle, identity, is_unitary, kron, pauli
from src.config import settings
from src.protocol.heisenberg import (
    DOWN_DOWN,
    UP_DOWN,
    UP_UP,
    PreparationPlan,
    PulseParams,
    TwoQubitState,
    global_phase,
    haar_random_state,
    hamiltonian_isotropic,
    prepare,
    propagator_step1,
    pulse_factor,
    pulse_unitary,
    singlet_state,
    state_after_step1,
    triplet_plan,
    triplet_states,
)
from src.protocol.schmidt import fidelity_states

angles = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)


def random_pulse(rng):
    return PulseParams(chi=rng.uniform(-math.pi, math.pi), theta=rng.uniform(0, math.pi), phi=rng.uniform(0, 2 * math.pi))


def sigma_dot(p: PulseParams):
    nx, ny, nz = p.direction()
    return nx * pauli("x") + ny * pauli("y") + nz * pauli("z")


def rotation_entries(p: PulseParams):
    """Entries (r_uu, r_ud, r_du, r_dd) of cos(chi) - i sin(chi) sigma.n written out by hand."""
    c, s = math.cos(p.chi), math.sin(p.chi)
    ct, st_ = math.cos(p.theta), math.sin(p.theta)
    return (c - 1j * s * ct,
            -1j * s * st_ * np.exp(-1j * p.phi),
            -1j * s * st_ * np.exp(1j * p.phi),
            c + 1j * s * ct)


class TestTwoQubitState:
    """Test cases for TwoQubitState validation."""

    def test_rejects_unnormalized(self):
        """A norm away from 1 is rejected."""
        with pytest.raises(ValueError):
            TwoQubitState(np.array([1, 1, 0, 0]))

    def test_rejects_nan(self):
        """NaN amplitudes are rejected."""
        with pytest.raises(ValueError):
            TwoQubitState(np.array([np.nan, 0, 0, 0]))

    def test_rejects_wrong_size(self):
        """Three amplitudes are not a two-qubit state."""
        with pytest.raises(ValueError):
            TwoQubitState(np.array([1, 0, 0]))

    def test_from_amplitudes_normalizes(self):
        """normalize=True rescales to unit norm."""
        state = TwoQubitState.from_amplitudes([0, 1, 1, 0], normalize=True)
        assert_allclose(state.amplitudes, np.array([0, 1, 1, 0]) / math.sqrt(2))

    def test_from_amplitudes_tolerance(self):
        """A tolerance bounds how far the input norm may be from 1."""
        with pytest.raises(ValueError):
            TwoQubitState.from_amplitudes([0, 1.1, 0, 0], normalize=True, tolerance=1e-6)

    def test_amplitudes_read_only(self):
        """Stored amplitudes cannot be modified in place."""
        with pytest.raises(ValueError):
            UP_DOWN.amplitudes[0] = 1

    def test_norm_checked_to_rounding_level(self):
        """A squared norm of 1 + 1e-11 is already rejected."""
        with pytest.raises(ValueError):
            TwoQubitState(np.array([0, math.sqrt(1 + 1e-11), 0, 0]))

    def test_norm_tolerance_from_settings(self, monkeypatch):
        """The accepted norm deviation follows settings.numeric_tolerance."""
        monkeypatch.setattr(settings, "numeric_tolerance", 1e-9)
        state = TwoQubitState(np.array([0, math.sqrt(1 + 1e-11), 0, 0]))
        assert state.norm() == pytest.approx(1.0, abs=1e-10)

    def test_amplitude_matrix_layout(self):
        """Rows index spin 1 and columns index spin 2."""
        assert_allclose(UP_DOWN.amplitude_matrix(), np.array([[0, 1], [0, 0]]))


class TestPulseParams:
    """Test cases for PulseParams normalization."""

    def test_phi_reduced(self):
        """phi is taken modulo 2*pi."""
        assert PulseParams(phi=3 * math.pi).phi == pytest.approx(math.pi)

    def test_theta_clamped(self):
        """theta is clamped to [0, pi]."""
        assert PulseParams(theta=4.0).theta == math.pi

    def test_rejects_infinite(self):
        """Non-finite pulse parameters are rejected."""
        with pytest.raises(ValueError):
            PulseParams(chi=math.inf)

    def test_plan_rejects_negative_time(self):
        """t1 must be nonnegative."""
        with pytest.raises(ValueError):
            PreparationPlan(coupling_A=1.0, t1=-1.0)


class TestStepOne:
    """Test cases for the coupling Hamiltonian and its propagator."""

    def test_triplet_and_singlet_energies(self):
        """Triplets sit at A/2 and the singlet at -A/2."""
        A = 1.7
        h = hamiltonian_isotropic(A)
        for state in triplet_states():
            assert_allclose(h @ state.amplitudes, A / 2 * state.amplitudes, atol=1e-15)
        s = singlet_state().amplitudes
        assert_allclose(h @ s, -A / 2 * s, atol=1e-15)

    def test_closed_form_matches_oracle(self):
        """500 random (A, t) draws agree with the brute-force exponential."""
        rng = np.random.default_rng(10)
        for _ in range(500):
            A, t = rng.uniform(-5, 5), rng.uniform(0, 10)
            u = propagator_step1(A, t)
            assert np.max(np.abs(u - expm_oracle(hamiltonian_isotropic(A), t))) <= 1e-10

    def test_hamiltonian_squares_to_constant(self):
        """H^2 = (A/2)^2 on the whole space."""
        for A in (-3.0, 0.4, 2.5):
            h = hamiltonian_isotropic(A)
            assert np.max(np.abs(h @ h - (A / 2) ** 2 * identity(4))) <= 1e-12

    def test_polarized_states_only_pick_up_phase(self):
        """|up,up> and |down,down> gain e^{-iAt/2} and nothing else."""
        rng = np.random.default_rng(14)
        for _ in range(50):
            A, t = rng.uniform(-5, 5), rng.uniform(0, 10)
            u = propagator_step1(A, t)
            for ket in (UP_UP, DOWN_DOWN):
                assert_allclose(u @ ket.amplitudes, np.exp(-1j * A * t / 2) * ket.amplitudes, atol=1e-12)

    def test_zero_coupling_is_identity(self):
        """A = 0 leaves the state alone."""
        assert_allclose(propagator_step1(0.0, 3.0), identity(4))

    def test_negative_time_rejected(self):
        """Negative times are rejected."""
        with pytest.raises(ValueError):
            propagator_step1(1.0, -0.1)

    def test_state_after_step1(self):
        """The closed-form state equals the propagator applied to |up,down>."""
        rng = np.random.default_rng(11)
        for _ in range(50):
            A, t = rng.uniform(-5, 5), rng.uniform(0, 10)
            expected = propagator_step1(A, t) @ UP_DOWN.amplitudes
            assert_allclose(state_after_step1(A, t).amplitudes, expected, atol=1e-12)


class TestPulses:
    """Test cases for the instantaneous pulse unitary."""

    def test_pulse_unitary_matches_oracle(self):
        """500 random pulse pairs agree with exp(-i(chi1 s1.n1 + chi2 s2.n2))."""
        rng = np.random.default_rng(12)
        for _ in range(500):
            p1, p2 = random_pulse(rng), random_pulse(rng)
            generator = p1.chi * kron(sigma_dot(p1), identity(2)) + p2.chi * kron(identity(2), sigma_dot(p2))
            assert np.max(np.abs(pulse_unitary(p1, p2) - expm_oracle(generator, 1.0))) <= 1e-10

    def test_factors_commute(self):
        """Pulsing spin 1 then spin 2 equals the other order and the joint pulse."""
        rng = np.random.default_rng(15)
        none = PulseParams()
        for _ in range(200):
            p1, p2 = random_pulse(rng), random_pulse(rng)
            joint = pulse_unitary(p1, p2)
            first, second = pulse_unitary(p1, none), pulse_unitary(none, p2)
            assert np.max(np.abs(joint - first @ second)) <= 1e-12
            assert np.max(np.abs(joint - second @ first)) <= 1e-12

    def test_no_pulse_is_identity(self):
        """chi1 = chi2 = 0 does nothing."""
        assert_allclose(pulse_unitary(PulseParams(), PulseParams()), identity(4), atol=1e-15)

    def test_quarter_z_pulse_on_spin_one(self):
        """chi1 = pi/4 along z gives diag(e^{-i pi/4}, e^{-i pi/4}, e^{i pi/4}, e^{i pi/4})."""
        q = np.exp(-1j * math.pi / 4)
        expected = np.diag([q, q, np.conj(q), np.conj(q)])
        assert_allclose(pulse_unitary(PulseParams(chi=math.pi / 4), PulseParams()), expected, atol=1e-15)

    def test_prepare_without_evolution_or_pulses(self):
        """t1 = 0 and zero pulses leave |up,down> untouched."""
        state = prepare(PreparationPlan(coupling_A=1.3, t1=0.0))
        assert_allclose(state.amplitudes, UP_DOWN.amplitudes, atol=1e-15)

    def test_prepare_matches_written_out_products(self):
        """Each amplitude equals the two hand-expanded products for that ket."""
        rng = np.random.default_rng(16)
        for _ in range(300):
            A, t1 = rng.uniform(-5, 5), rng.uniform(0, 10)
            p1, p2 = random_pulse(rng), random_pulse(rng)
            c, s = math.cos(A * t1 / 2), math.sin(A * t1 / 2)
            r_uu, r_ud, r_du, r_dd = rotation_entries(p1)
            q_uu, q_ud, q_du, q_dd = rotation_entries(p2)
            expected = [
                c * r_uu * q_ud - 1j * s * r_ud * q_uu,
                c * r_uu * q_dd - 1j * s * r_ud * q_du,
                c * r_du * q_ud - 1j * s * r_dd * q_uu,
                c * r_du * q_dd - 1j * s * r_dd * q_du,
            ]
            state = prepare(PreparationPlan(A, t1, p1, p2))
            assert np.max(np.abs(state.amplitudes - np.array(expected))) <= 1e-12

    def test_pulse_factor_is_su2(self):
        """Each single-spin factor is unitary with determinant 1."""
        rng = np.random.default_rng(13)
        for _ in range(100):
            r = pulse_factor(random_pulse(rng))
            assert is_unitary(r)
            assert abs(np.linalg.det(r) - 1) <= 1e-12

    @hyp_settings(max_examples=200, deadline=None)
    @given(A=st.floats(min_value=-10, max_value=10, allow_nan=False), t1=st.floats(min_value=0, max_value=20),
           chi1=angles, theta1=angles, phi1=angles, chi2=angles, theta2=angles, phi2=angles)
    def test_prepare_keeps_norm(self, A, t1, chi1, theta1, phi1, chi2, theta2, phi2):
        """The prepared state has unit norm for any plan."""
        plan = PreparationPlan(A, t1, PulseParams(chi1, theta1, phi1), PulseParams(chi2, theta2, phi2))
        assert abs(prepare(plan).norm() - 1) <= 1e-12


class TestTripletPreparation:
    """Test cases for the unpolarized triplet example."""

    def test_positive_coupling(self):
        """A > 0 reaches e^{-i pi/4} T0."""
        t0 = triplet_states()[2]
        state = prepare(triplet_plan(1.0))
        assert fidelity_states(t0, state) >= 1 - 1e-12
        assert global_phase(t0, state) == pytest.approx(-math.pi / 4, abs=1e-10)

    def test_negative_coupling(self):
        """A < 0 reaches e^{+i pi/4} T0."""
        t0 = triplet_states()[2]
        state = prepare(triplet_plan(-1.0))
        assert fidelity_states(t0, state) >= 1 - 1e-12
        assert global_phase(t0, state) == pytest.approx(math.pi / 4, abs=1e-10)

    def test_family_ignores_chi2(self):
        """Only chi1 - chi2 matters for the triplet."""
        t0 = triplet_states()[2]
        for chi2 in (-1.0, 0.3, 2.2):
            assert fidelity_states(t0, prepare(triplet_plan(2.5, chi2=chi2))) >= 1 - 1e-12

    def test_zero_coupling_rejected(self):
        """No plan exists without coupling."""
        with pytest.raises(ValueError):
            triplet_plan(0.0)


class TestHaar:
    """Test cases for random targets."""

    def test_haar_states_normalized(self):
        """Sampled states have unit norm."""
        rng = np.random.default_rng(14)
        for _ in range(100):
            assert abs(haar_random_state(rng).norm() - 1) <= 1e-12
