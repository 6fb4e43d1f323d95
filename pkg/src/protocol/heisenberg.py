"""
Two-step state preparation under an isotropic Heisenberg coupling.

Step one lets the pair evolve from |up,down> under H = (A/4)(sum_i s_i^1 s_i^2 + 1)
for a time t1. Step two applies simultaneous, instantaneous single-spin rotations
exp(-i chi_k sigma.n_k) to each spin. Units: hbar = 1, A in s^-1, times in s,
pulse areas in radians.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Tuple

import numpy as np

from src.config import settings
from src.linalg.qmath import Matrix, identity, kron, pauli

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """
    Pure state of two spin-1/2 particles over (up-up, up-down, down-up, down-down).

    The squared norm must equal 1 within ``settings.numeric_tolerance``.
    """
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape != (4,):
            raise ValueError(f"A two-qubit state has 4 amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("State amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > settings.numeric_tolerance:
            raise ValueError(f"State is not normalized: sum |a|^2 = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, values: Iterable[complex], normalize: bool = False,
                        tolerance: Optional[float] = None) -> "TwoQubitState":
        """
        Builds a state from four complex amplitudes.

        Args:
            values: The amplitudes in basis order.
            normalize: Rescale to unit norm before validation.
            tolerance: When normalizing, the largest accepted deviation of the
                input norm from 1 (None accepts any nonzero input).
        """
        amps = np.array(list(values), dtype=np.complex128)
        if normalize:
            norm = float(np.linalg.norm(amps))
            if norm == 0.0 or not np.isfinite(norm):
                raise ValueError("Cannot normalize a zero or non-finite vector")
            if tolerance is not None and abs(norm ** 2 - 1.0) > tolerance:
                raise ValueError(f"State norm deviates from 1 by {abs(norm ** 2 - 1.0):.3e} (> {tolerance:.1e})")
            amps = amps / norm
        return cls(amps)

    @property
    def a_uu(self) -> complex:
        return complex(self.amplitudes[0])

    @property
    def a_ud(self) -> complex:
        return complex(self.amplitudes[1])

    @property
    def a_du(self) -> complex:
        return complex(self.amplitudes[2])

    @property
    def a_dd(self) -> complex:
        return complex(self.amplitudes[3])

    def amplitude_matrix(self) -> Matrix:
        """Amplitudes as a 2x2 matrix: rows index spin 1, columns index spin 2."""
        return self.amplitudes.reshape(2, 2).copy()

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def evolved(self, u: Matrix) -> "TwoQubitState":
        return TwoQubitState(np.asarray(u, dtype=np.complex128) @ self.amplitudes)

    def __repr__(self) -> str:
        amps = ", ".join(f"{a:.6g}" for a in self.amplitudes)
        return f"TwoQubitState([{amps}])"


@dataclass(frozen=True)
class PulseParams:
    """
    One delta pulse on a single spin: area ``chi`` and field direction (``theta``, ``phi``).

    ``theta`` is clamped to [0, pi] and ``phi`` reduced modulo 2*pi.
    """
    chi: float = 0.0
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        for name in ("chi", "theta", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"Pulse parameter {name} must be finite")
        object.__setattr__(self, "chi", float(self.chi))
        object.__setattr__(self, "theta", float(min(max(self.theta, 0.0), math.pi)))
        object.__setattr__(self, "phi", float(self.phi % TWO_PI))

    def direction(self) -> Tuple[float, float, float]:
        return (math.sin(self.theta) * math.cos(self.phi),
                math.sin(self.theta) * math.sin(self.phi),
                math.cos(self.theta))


@dataclass(frozen=True)
class PreparationPlan:
    """
    Everything the two-step protocol needs: coupling, free-evolution time and both pulses.
    """
    coupling_A: float
    t1: float
    pulse1: PulseParams = field(default_factory=PulseParams)
    pulse2: PulseParams = field(default_factory=PulseParams)

    def __post_init__(self):
        if not math.isfinite(self.coupling_A):
            raise ValueError("Coupling A must be finite")
        if not math.isfinite(self.t1) or self.t1 < 0:
            raise ValueError(f"Free-evolution time t1 must be finite and >= 0, got {self.t1}")


def basis_state(index: int) -> TwoQubitState:
    amps = np.zeros(4, dtype=np.complex128)
    amps[index] = 1.0
    return TwoQubitState(amps)


UP_UP = basis_state(0)
UP_DOWN = basis_state(1)
DOWN_UP = basis_state(2)
DOWN_DOWN = basis_state(3)


def triplet_states() -> Tuple[TwoQubitState, TwoQubitState, TwoQubitState]:
    """The triplet eigenstates (T+, T-, T0) of the coupling Hamiltonian."""
    t0 = TwoQubitState(np.array([0, 1, 1, 0], dtype=np.complex128) / math.sqrt(2))
    return UP_UP, DOWN_DOWN, t0


def singlet_state() -> TwoQubitState:
    return TwoQubitState(np.array([0, 1, -1, 0], dtype=np.complex128) / math.sqrt(2))


def hamiltonian_isotropic(A: float) -> Matrix:
    """
    H = (A/4) (sum_i sigma_i^1 sigma_i^2 + 1); eigenvalues A/2 (triplet) and -A/2 (singlet).
    """
    if not math.isfinite(A):
        raise ValueError("Coupling A must be finite")
    exchange = sum(kron(pauli(a), pauli(a)) for a in "xyz")
    return (A / 4.0) * (exchange + identity(4))


def propagator_step1(A: float, t: float) -> Matrix:
    """
    Closed-form exp(-i H t) = cos(At/2) - i (2/A) sin(At/2) H, identity for A = 0.
    """
    if t < 0:
        raise ValueError(f"Evolution time must be >= 0, got {t}")
    half_angle = A * t / 2.0
    # (2/A) sin(At/2) written as t * sinc so that A -> 0 is regular
    weight = t * np.sinc(half_angle / math.pi)
    return math.cos(half_angle) * identity(4) - 1j * weight * hamiltonian_isotropic(A)


def state_after_step1(A: float, t1: float) -> TwoQubitState:
    """
    cos(A t1/2)|up,down> + sin(A t1/2) e^{-i pi/2} |down,up>, starting from |up,down>.
    """
    if t1 < 0:
        raise ValueError(f"Free-evolution time must be >= 0, got {t1}")
    half_angle = A * t1 / 2.0
    return TwoQubitState(np.array([0.0, math.cos(half_angle), -1j * math.sin(half_angle), 0.0]))


def pulse_factor(p: PulseParams) -> Matrix:
    """Single-spin factor cos(chi) - i sigma.n sin(chi) of an instantaneous pulse."""
    nx, ny, nz = p.direction()
    sigma_n = nx * pauli("x") + ny * pauli("y") + nz * pauli("z")
    return math.cos(p.chi) * identity(2) - 1j * math.sin(p.chi) * sigma_n


def pulse_unitary(p1: PulseParams, p2: PulseParams) -> Matrix:
    """
    exp(-i(chi1 sigma^1.n^1 + chi2 sigma^2.n^2)); the two single-spin factors commute.
    """
    return kron(pulse_factor(p1), pulse_factor(p2))


def prepare(plan: PreparationPlan) -> TwoQubitState:
    """
    Runs both steps of the protocol and returns the final state (global phase kept).
    """
    intermediate = state_after_step1(plan.coupling_A, plan.t1)
    final = intermediate.evolved(pulse_unitary(plan.pulse1, plan.pulse2))
    return final


def global_phase(reference: TwoQubitState, state: TwoQubitState) -> float:
    """
    Phase g in (-pi, pi] such that ``state`` is closest to e^{ig} * ``reference``.
    """
    return float(np.angle(np.vdot(reference.amplitudes, state.amplitudes)))


def haar_random_state(rng: np.random.Generator) -> TwoQubitState:
    """Uniformly distributed pure state: 8 standard normals as 4 complex amplitudes, normalized."""
    raw = rng.standard_normal(8)
    amps = raw[:4] + 1j * raw[4:]
    return TwoQubitState(amps / np.linalg.norm(amps))


def triplet_plan(A: float, chi2: float = 0.0) -> PreparationPlan:
    """
    Plan preparing the unpolarized triplet: t1 = pi/(2|A|), z-directed pulses with
    chi1 - chi2 = pi/4 for A > 0 and -pi/4 for A < 0.
    """
    if A == 0:
        raise ValueError("The triplet cannot be reached without coupling (A = 0)")
    t1 = math.pi / (2.0 * abs(A))
    chi1 = chi2 + math.copysign(math.pi / 4.0, A)
    return PreparationPlan(coupling_A=A, t1=t1, pulse1=PulseParams(chi=chi1), pulse2=PulseParams(chi=chi2))
