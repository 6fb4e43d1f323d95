"""
Field and time that turn |up,down> into a maximally entangled state
(|up,down> + e^{i chi}|down,up>)/sqrt(2) under a z-directed field.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.donor.system import DonorParams, derived_frequencies
from src.protocol.heisenberg import TwoQubitState
from src.protocol.schmidt import fidelity_states

logger = logging.getLogger(__name__)

CONDITION_TOLERANCE = 1e-10


class EntanglerDomainError(ValueError):
    """Raised when no entangling field/time exists for the requested input."""


@dataclass(frozen=True)
class EntanglerSpec:
    chi: float
    Bz: float
    t: float
    branch: int = 0


@dataclass(frozen=True)
class EntanglerReport:
    """
    Outcome of checking a (Bz, t) pair.

    ``cot_residual`` is None when Omega^2 < 2 omega_-^2, where the cot condition
    has no real solution. ``achieved_chi`` is the relative phase actually reached;
    ``fidelity_requested`` compares against the state with the requested phase.
    """
    domain_ok: bool
    conditions_ok: bool
    cot_residual: Optional[float]
    tan_residual: float
    achieved_chi: float
    concurrence: float
    fidelity_requested: float
    fidelity_achieved: float


def subspace_state(d: DonorParams, Bz: float, t: float) -> TwoQubitState:
    """
    (cos(Omega t) - i (omega_-/Omega) sin(Omega t))|up,down> - i (A/2Omega) sin(Omega t)|down,up>.
    """
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"Evolution time must be finite and >= 0, got {t}")
    freq = derived_frequencies(d, Bz)
    sin_over = t * np.sinc(freq.Omega * t / math.pi)
    a_ud = math.cos(freq.Omega * t) - 1j * freq.omega_minus * sin_over
    a_du = -1j * (d.hyperfine_A / 2.0) * sin_over
    return TwoQubitState.from_amplitudes([0.0, a_ud, a_du, 0.0])


def ent_state(chi: float) -> TwoQubitState:
    return TwoQubitState(np.array([0.0, 1.0, np.exp(1j * chi), 0.0]) / math.sqrt(2.0))


def concurrence(state: TwoQubitState) -> float:
    """Pure-state concurrence 2|a_uu a_dd - a_ud a_du|."""
    value = 2.0 * abs(state.a_uu * state.a_dd - state.a_ud * state.a_du)
    return float(min(value, 1.0))


def achieved_phase(state: TwoQubitState) -> float:
    """arg(a_du / a_ud) in (-pi, pi]; 0 when either amplitude vanishes."""
    return float(np.angle(state.a_du * np.conj(state.a_ud)))


def solve_entangler(d: DonorParams, chi: float, branch: int = 0) -> EntanglerSpec:
    """
    Bz = A cos(chi)/(gamma_e + gamma_n) and
    t = (arctan sqrt(1 + 2 cot^2 chi) + branch*pi) / Omega with Omega = (A/2) sqrt(1 + cos^2 chi).

    At sin(chi) = 0 the arctan takes its limit pi/2, so chi = 0 gives t = pi/(sqrt(2) A).

    Raises:
        EntanglerDomainError: If chi is not finite, A <= 0 or gamma_e + gamma_n = 0.
        ValueError: If ``branch`` is negative.
    """
    if not math.isfinite(chi):
        raise EntanglerDomainError(f"chi must be finite, got {chi}")
    if d.hyperfine_A <= 0:
        raise EntanglerDomainError(f"The entangling time needs A > 0, got {d.hyperfine_A}")
    gamma_sum = d.gamma_e + d.gamma_n
    if gamma_sum == 0:
        raise EntanglerDomainError("gamma_e + gamma_n = 0 leaves the field undetermined")
    if branch < 0:
        raise ValueError(f"Branch index must be >= 0, got {branch}")

    cos_chi, sin_chi = math.cos(chi), math.sin(chi)
    Bz = d.hyperfine_A * cos_chi / gamma_sum
    omega = (d.hyperfine_A / 2.0) * math.sqrt(1.0 + cos_chi ** 2)
    # sqrt(1 + 2 cot^2) = sqrt(sin^2 + 2 cos^2) / |sin|
    angle = math.atan2(math.sqrt(sin_chi ** 2 + 2.0 * cos_chi ** 2), abs(sin_chi))
    t = (angle + branch * math.pi) / omega

    logger.info(f"Entangler for chi={chi:.6g}: Bz={Bz:.6g} T, t={t:.6g} s (branch {branch})")
    return EntanglerSpec(chi=chi, Bz=Bz, t=t, branch=branch)


def verify_entangling_conditions(d: DonorParams, spec: EntanglerSpec,
                                 tolerance: float = CONDITION_TOLERANCE) -> EntanglerReport:
    """
    Evaluates both entangling conditions at (spec.Bz, spec.t) and simulates the state.

    The cot condition is checked for the achieved phase chi'; it reads
    cot(chi') = -omega_- / sqrt(Omega^2 - 2 omega_-^2). Both residuals are
    written without divisions by cot or tan so they stay finite, and the cot
    residual is squared with a separate sign test, so at chi = 0 or pi where
    the root vanishes it stays at rounding level.
    """
    freq = derived_frequencies(d, spec.Bz)
    if freq.Omega == 0:
        raise EntanglerDomainError("Omega = 0: no coupling and no field, nothing evolves")
    half_A = d.hyperfine_A / 2.0
    omega_sq = freq.Omega ** 2
    # Omega^2 - 2 omega_-^2 = (A/2)^2 - omega_-^2
    margin = (half_A - freq.omega_minus) * (half_A + freq.omega_minus)
    domain_ok = margin >= -tolerance * omega_sq

    state = subspace_state(d, spec.Bz, spec.t)
    chi_achieved = achieved_phase(state)
    angle = freq.Omega * spec.t
    tan_residual = abs(math.sin(angle) ** 2 * margin - omega_sq * math.cos(angle) ** 2) / omega_sq

    if domain_ok:
        # Squared form of cos(chi') sqrt(margin) = -omega_- sin(chi'); a margin that
        # rounding leaves just above zero must not be amplified by the root.
        cos_chi, sin_chi = math.cos(chi_achieved), math.sin(chi_achieved)
        cot_residual = abs(cos_chi ** 2 * margin - (freq.omega_minus * sin_chi) ** 2) / omega_sq
        same_sign = cos_chi * freq.omega_minus * sin_chi / freq.Omega
        if same_sign > tolerance:
            cot_residual = max(cot_residual, same_sign)
    else:
        cot_residual = None
        logger.warning(f"Entangling conditions undefined at Bz={spec.Bz:.6g} T: Omega^2 - 2 omega_-^2 = {margin:.6g}")

    conditions_ok = domain_ok and cot_residual <= tolerance and tan_residual <= tolerance
    report = EntanglerReport(
        domain_ok=domain_ok,
        conditions_ok=conditions_ok,
        cot_residual=cot_residual,
        tan_residual=tan_residual,
        achieved_chi=chi_achieved,
        concurrence=concurrence(state),
        fidelity_requested=fidelity_states(ent_state(spec.chi), state),
        fidelity_achieved=fidelity_states(ent_state(chi_achieved), state),
    )
    if domain_ok and not conditions_ok:
        logger.warning(f"Entangling conditions violated: cot residual {cot_residual:.3e}, tan residual {tan_residual:.3e}")
    logger.debug(f"Entangler report: {report}")
    return report
