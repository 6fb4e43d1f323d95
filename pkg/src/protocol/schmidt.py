"""
Schmidt form of two-qubit states and the inverse problem of the two-step protocol.

Forward: any pure state is written as c1 |a1>|b1> + c2 |a2>|b2> through the SVD of
its 2x2 amplitude matrix.

Inverse: the protocol produces states whose amplitude matrix is

    R1 . K(t1) . R2^T,   K(t1) = [[0, cos(A t1/2)], [-i sin(A t1/2), 0]],

with R1, R2 the SU(2) pulse factors. ``synthesize`` matches this against the SVD
of a target, fixes the gauge so that alpha = <up|R1|up> is real and nonnegative,
reads (chi, theta, phi) off R1 and R2, and verifies the result by running the
forward protocol.
"""

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from src.config import settings
from src.execution.executor import SweepExecutor
from src.linalg.qmath import Matrix, dagger, identity, svd2
from src.protocol.heisenberg import (
    PreparationPlan,
    PulseParams,
    TwoQubitState,
    global_phase,
    prepare,
    pulse_factor,
)

logger = logging.getLogger(__name__)

DEGENERACY_TOLERANCE = 1e-12
FEASIBILITY_TOLERANCE = 1e-12
_SWAP = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_QUARTER_PHASE = np.exp(-1j * math.pi / 4.0)


class SynthesisFailed(RuntimeError):
    """
    Raised when no plan reaches the requested fidelity; carries the best attempt.
    """

    def __init__(self, message: str, plan: PreparationPlan, residual_fidelity: float):
        super().__init__(message)
        self.plan = plan
        self.residual_fidelity = residual_fidelity


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    """
    c1 |alpha1>|beta1> + c2 |alpha2>|beta2> with orthonormal single-spin pairs.
    """
    c1: float
    c2: float
    alpha1: np.ndarray
    alpha2: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray

    def reconstruct(self) -> TwoQubitState:
        amps = self.c1 * np.kron(self.alpha1, self.beta1) + self.c2 * np.kron(self.alpha2, self.beta2)
        return TwoQubitState(amps)


@dataclass(frozen=True)
class SpinAngles:
    """
    Moduli and phase of one spin's pulse factor.

    For spin 1: ``modulus`` = |alpha|, ``phase`` = gamma (alpha = |alpha| e^{-i gamma}),
    ``partner_modulus`` = |alpha'|. For spin 2: ``modulus`` = |beta'|,
    ``phase`` = eta (beta' = |beta'| e^{i eta}), ``partner_modulus`` = |beta|.
    """
    spin: str
    modulus: float
    phase: float
    partner_modulus: float
    phi: float


@dataclass(frozen=True)
class PulseAngleSolution:
    abs_alpha: float
    gamma: float
    abs_alphaP: float
    abs_betaP: float
    eta: float
    abs_beta: float
    phi1: float
    phi2: float


@dataclass(frozen=True)
class SynthesisResult:
    """
    A plan for a target state, the phase g with prepare(plan) ~ e^{ig} target, and
    the fidelity |<target|prepare(plan)>|^2 measured on the forward protocol.
    """
    plan: PreparationPlan
    global_phase: float
    residual_fidelity: float
    refined: bool = False


def fidelity_states(a: TwoQubitState, b: TwoQubitState) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    return float(min(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2, 1.0))


def decompose(state: TwoQubitState) -> SchmidtForm:
    """
    Schmidt decomposition from the SVD of the amplitude matrix; c1 >= c2 >= 0.
    """
    svd = svd2(state.amplitude_matrix())
    c1, c2 = svd.singular_values
    return SchmidtForm(
        c1=c1,
        c2=c2,
        alpha1=svd.left[:, 0].copy(),
        alpha2=svd.left[:, 1].copy(),
        beta1=np.conj(svd.right[:, 0]),
        beta2=np.conj(svd.right[:, 1]),
    )


def pulse_angles_from_params(p: PulseParams, which: str) -> SpinAngles:
    """
    |alpha| and gamma (spin1) or |beta'| and eta (spin2) for one pulse.

    Both phases satisfy tan = tan(chi) cos(theta); atan2 keeps the quadrant.
    """
    if which not in ("spin1", "spin2"):
        raise ValueError(f"which must be 'spin1' or 'spin2', got {which!r}")
    along = math.sin(p.chi) * math.cos(p.theta)
    modulus = math.hypot(math.cos(p.chi), along)
    partner = abs(math.sin(p.chi) * math.sin(p.theta))
    phase = math.atan2(along, math.cos(p.chi))
    return SpinAngles(spin=which, modulus=modulus, phase=phase, partner_modulus=partner, phi=p.phi)


def pulse_angle_solution(plan: PreparationPlan) -> PulseAngleSolution:
    first = pulse_angles_from_params(plan.pulse1, "spin1")
    second = pulse_angles_from_params(plan.pulse2, "spin2")
    return PulseAngleSolution(
        abs_alpha=first.modulus,
        gamma=first.phase,
        abs_alphaP=first.partner_modulus,
        abs_betaP=second.modulus,
        eta=second.phase,
        abs_beta=second.partner_modulus,
        phi1=first.phi,
        phi2=second.phi,
    )


def gamma_feasible(chi1: float, abs_alphaP: float) -> bool:
    """
    True when sin^2(chi1) >= |alpha'|^2, i.e. tan(gamma) from |alpha'| is real.
    """
    if not 0.0 <= abs_alphaP <= 1.0:
        raise ValueError(f"|alpha'| must lie in [0, 1], got {abs_alphaP}")
    return math.sin(chi1) ** 2 >= abs_alphaP ** 2 - FEASIBILITY_TOLERANCE


def tan_gamma_from_alpha_prime(chi1: float, abs_alphaP: float) -> float:
    """
    tan(gamma) = sqrt(1 - |alpha'|^2 / sin^2(chi1)) tan(chi1).

    Raises:
        ValueError: If the pair is not feasible.
    """
    if not gamma_feasible(chi1, abs_alphaP):
        raise ValueError(f"sin^2(chi1) = {math.sin(chi1) ** 2:.6g} < |alpha'|^2 = {abs_alphaP ** 2:.6g}")
    sin_sq = math.sin(chi1) ** 2
    if sin_sq == 0.0:
        return 0.0
    return math.sqrt(max(1.0 - abs_alphaP ** 2 / sin_sq, 0.0)) * math.tan(chi1)


def constrained_schmidt_form(plan: PreparationPlan) -> SchmidtForm:
    """
    Schmidt form of prepare(plan) in the protocol's own parameterization:
    alpha1 = (alpha, alpha'), alpha2 = e^{-i pi/4}(-alpha'*, alpha*),
    beta1 = (beta, beta'), beta2 = e^{-i pi/4}(beta'*, -beta*),
    c1 = cos(A t1/2), c2 = sin(A t1/2). Negative coefficients are made
    nonnegative by flipping the sign of the matching alpha vector.
    """
    r1 = pulse_factor(plan.pulse1)
    r2 = pulse_factor(plan.pulse2)
    alpha, alpha_p = r1[0, 0], r1[1, 0]
    beta, beta_p = r2[0, 1], r2[1, 1]
    alpha1 = np.array([alpha, alpha_p])
    alpha2 = _QUARTER_PHASE * np.array([-np.conj(alpha_p), np.conj(alpha)])
    beta1 = np.array([beta, beta_p])
    beta2 = _QUARTER_PHASE * np.array([np.conj(beta_p), -np.conj(beta)])

    half_angle = plan.coupling_A * plan.t1 / 2.0
    c1, c2 = math.cos(half_angle), math.sin(half_angle)
    if c1 < 0:
        c1, alpha1 = -c1, -alpha1
    if c2 < 0:
        c2, alpha2 = -c2, -alpha2
    return SchmidtForm(c1=c1, c2=c2, alpha1=alpha1, alpha2=alpha2, beta1=beta1, beta2=beta2)


def _special_unitary(m: Matrix) -> Matrix:
    """Rescales a 2x2 unitary by a phase so that its determinant is 1."""
    return m * np.exp(-0.5j * np.angle(np.linalg.det(m)))


def _pulse_from_su2(r: Matrix) -> PulseParams:
    """
    Reads (chi, theta, phi) off r = cos(chi) - i sin(chi) sigma.n with chi in [0, pi].
    Rotations about z are reported with theta = 0 and a signed chi.
    """
    p, q = r[0, 0], r[1, 0]
    if abs(q) <= 1e-15:
        return PulseParams(chi=-float(np.angle(p)), theta=0.0, phi=0.0)
    sin_chi = math.hypot(p.imag, abs(q))
    chi = math.atan2(sin_chi, p.real)
    theta = math.atan2(abs(q), -p.imag)
    phi = float(np.angle(1j * q))
    return PulseParams(chi=chi, theta=theta, phi=phi)


def _closed_form_plan(target: TwoQubitState, A: float) -> PreparationPlan:
    svd = svd2(target.amplitude_matrix())
    s1, s2 = svd.singular_values
    t1 = 2.0 * math.acos(min(max(s1, 0.0), 1.0)) / abs(A)
    # sin(A t1/2) carries the sign of A; its phase lands in d_inv
    d_inv = np.diag([1.0, 1j * math.copysign(1.0, A)])

    if s1 - s2 <= DEGENERACY_TOLERANCE:
        # any rotation of the Schmidt basis works; keep spin 1 untouched
        r1 = identity(2)
        polar = svd.left @ dagger(svd.right)
        r2_transposed = _SWAP @ d_inv @ polar
    else:
        r1 = _special_unitary(svd.left @ d_inv)
        alpha = r1[0, 0]
        u = -float(np.angle(alpha)) if abs(alpha) > 1e-15 else 0.0
        gauge = np.diag([np.exp(1j * u), np.exp(-1j * u)])
        r1 = r1 @ gauge
        right_h = dagger(svd.right)
        if s2 <= DEGENERACY_TOLERANCE:
            # product target: the second right vector has free phase; pick the
            # one that makes spin 2 rotate least
            lead, tail = right_h[1, 0], right_h[0, 1]
            if abs(lead) > 1e-15 and abs(tail) > 1e-15:
                kappa = float(np.angle(lead) - np.angle(tail)) + 2.0 * u
                right_h[1, :] = right_h[1, :] * np.exp(-1j * kappa)
        r2_transposed = _SWAP @ dagger(gauge) @ right_h
    r2 = _special_unitary(r2_transposed).T
    if np.trace(r2).real < 0:
        r2 = -r2

    pulse1 = _pulse_from_su2(r1)
    pulse2 = _pulse_from_su2(r2)
    abs_alpha_p = min(abs(r1[1, 0]), 1.0)
    if not gamma_feasible(pulse1.chi, abs_alpha_p):
        logger.warning(f"Candidate violates sin^2(chi1) >= |alpha'|^2: chi1={pulse1.chi:.6g}, |alpha'|={abs_alpha_p:.6g}")
    logger.debug(f"Closed-form synthesis: s=({s1:.6g}, {s2:.6g}), t1={t1:.6g}, pulses={pulse1}, {pulse2}")
    return PreparationPlan(coupling_A=A, t1=t1, pulse1=pulse1, pulse2=pulse2)


def _plan_from_vector(A: float, x: Sequence[float]) -> PreparationPlan:
    return PreparationPlan(
        coupling_A=A,
        t1=abs(float(x[0])),
        pulse1=PulseParams(chi=x[1], theta=x[2], phi=x[3]),
        pulse2=PulseParams(chi=x[4], theta=x[5], phi=x[6]),
    )


def _refine(target: TwoQubitState, seed: PreparationPlan, max_evaluations: int) -> PreparationPlan:
    """Derivative-free minimization of 1 - fidelity over the seven raw plan parameters."""
    A = seed.coupling_A
    x0 = np.array([seed.t1,
                   seed.pulse1.chi, seed.pulse1.theta, seed.pulse1.phi,
                   seed.pulse2.chi, seed.pulse2.theta, seed.pulse2.phi])

    def infidelity(x):
        return 1.0 - fidelity_states(target, prepare(_plan_from_vector(A, x)))

    result = minimize(infidelity, x0, method="Nelder-Mead",
                      options={"maxfev": max_evaluations, "xatol": 1e-13, "fatol": 1e-15})
    logger.debug(f"Nelder-Mead finished after {result.nfev} evaluations: 1-F = {result.fun:.3e}")
    return _plan_from_vector(A, result.x)


def synthesize(target: TwoQubitState, A: float, min_fidelity: Optional[float] = None,
               max_evaluations: Optional[int] = None) -> SynthesisResult:
    """
    Computes a PreparationPlan whose output matches ``target`` up to global phase.

    Args:
        target: Normalized target state.
        A: Nonzero coupling in s^-1.
        min_fidelity: Acceptance threshold (default from settings, 1 - 1e-9).
        max_evaluations: Budget of the numerical refinement (default from settings).

    Returns:
        SynthesisResult with t1 in [0, pi/(2|A|)].

    Raises:
        ValueError: If A is zero or not finite.
        SynthesisFailed: If neither the closed form nor the refinement reaches
            ``min_fidelity``.
    """
    if A == 0 or not math.isfinite(A):
        raise ValueError(f"Synthesis needs a finite nonzero coupling, got A={A}")
    min_fidelity = settings.synthesis_min_fidelity if min_fidelity is None else min_fidelity
    max_evaluations = settings.synthesis_max_evaluations if max_evaluations is None else max_evaluations

    plan = _closed_form_plan(target, A)
    fidelity = fidelity_states(target, prepare(plan))
    refined = False

    if fidelity < min_fidelity:
        logger.warning(f"Closed-form plan reached fidelity {fidelity:.12f} < {min_fidelity}; refining numerically")
        candidate = _refine(target, plan, max_evaluations)
        candidate_fidelity = fidelity_states(target, prepare(candidate))
        if candidate_fidelity > fidelity:
            plan, fidelity, refined = candidate, candidate_fidelity, True
        if fidelity < min_fidelity:
            logger.warning(f"Synthesis failed: best residual fidelity {fidelity:.12f} for plan {plan}")
            raise SynthesisFailed(f"Best plan reaches fidelity {fidelity:.12f} < {min_fidelity}", plan, fidelity)

    prepared = prepare(plan)
    result = SynthesisResult(
        plan=plan,
        global_phase=global_phase(target, prepared),
        residual_fidelity=fidelity_states(target, prepared),
        refined=refined,
    )
    logger.info(f"Synthesized plan t1={plan.t1:.6g} s with fidelity {result.residual_fidelity:.15f}")
    return result


def synthesize_batch(targets: Sequence[TwoQubitState], A: float, workers: int = 1) -> List[SynthesisResult]:
    """Synthesizes many targets; results keep the input order for any worker count."""
    return SweepExecutor(workers=workers).map(partial(synthesize, A=A), targets)
