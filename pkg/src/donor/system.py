"""
Electron-nuclear spin pair with hyperfine coupling in a uniform magnetic field.

H = gamma_e B S.n - gamma_n B I.n + A S.I, with the electron in the first tensor
slot and the nucleus in the second. Rates are plain s^-1 numbers (hbar = 1),
gyromagnetic ratios are s^-1 T^-1 and fields are tesla.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.data.registry import ConstantsRegistry, load_registry
from src.linalg.qmath import Matrix, identity, spin_operators
from src.protocol.heisenberg import TWO_PI, TwoQubitState

logger = logging.getLogger(__name__)

# 1/2 - 2 SzIz and 1/2 + 2 SzIz in the product basis
_MIDDLE_PROJECTOR = np.diag([0, 1, 1, 0]).astype(np.complex128)
_OUTER_PROJECTOR = np.diag([1, 0, 0, 1]).astype(np.complex128)


@dataclass(frozen=True)
class DonorParams:
    """
    Gyromagnetic ratios (s^-1 T^-1) and hyperfine coupling (s^-1) of a donor.
    """
    gamma_e: float
    gamma_n: float
    hyperfine_A: float

    def __post_init__(self):
        for name in ("gamma_e", "gamma_n", "hyperfine_A"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"Donor parameter {name} must be finite, got {value}")
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_registry(cls, registry: ConstantsRegistry) -> "DonorParams":
        return cls(gamma_e=registry.get("gamma_e"),
                   gamma_n=registry.get("gamma_n"),
                   hyperfine_A=registry.get("A"))

    @classmethod
    def phosphorus(cls, registry: Optional[ConstantsRegistry] = None) -> "DonorParams":
        """The 31P preset, read from the constants registry."""
        return cls.from_registry(registry or load_registry())


@dataclass(frozen=True)
class FieldConfig:
    """
    Field magnitude ``B`` (tesla, >= 0) along n = (sin t cos p, sin t sin p, cos t).
    """
    B: float
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.B) or self.B < 0:
            raise ValueError(f"Field magnitude must be finite and >= 0, got {self.B}")
        if not math.isfinite(self.theta) or not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not math.isfinite(self.phi):
            raise ValueError("phi must be finite")
        object.__setattr__(self, "phi", float(self.phi % TWO_PI))

    def direction(self) -> Tuple[float, float, float]:
        return (math.sin(self.theta) * math.cos(self.phi),
                math.sin(self.theta) * math.sin(self.phi),
                math.cos(self.theta))


@dataclass(frozen=True)
class DerivedFrequencies:
    omega_minus: float
    omega_plus: float
    Omega: float
    eta: float


@dataclass(frozen=True)
class Spectrum:
    """
    Energies E1..E4 and eigenvectors in the |++>, psi2, psi3, |--> labeling (not sorted).
    """
    energies: Tuple[float, float, float, float]
    eigenvectors: Tuple[TwoQubitState, TwoQubitState, TwoQubitState, TwoQubitState]
    eta: float

    def residual(self, h: Matrix) -> float:
        """Largest ||H psi_k - E_k psi_k|| over the four levels."""
        return max(float(np.linalg.norm(h @ v.amplitudes - e * v.amplitudes))
                   for e, v in zip(self.energies, self.eigenvectors))


def derived_frequencies(d: DonorParams, Bz: float) -> DerivedFrequencies:
    """
    omega_-, omega_+, Omega = sqrt(omega_-^2 + (A/2)^2) and the mixing angle eta with
    cos(eta) = omega_-/Omega, sin(eta) = (A/2)/Omega.
    """
    if not math.isfinite(Bz):
        raise ValueError("Field must be finite")
    omega_minus = (d.gamma_e + d.gamma_n) * Bz / 2.0
    omega_plus = (d.gamma_e - d.gamma_n) * Bz / 2.0
    half_A = d.hyperfine_A / 2.0
    return DerivedFrequencies(
        omega_minus=omega_minus,
        omega_plus=omega_plus,
        Omega=math.hypot(omega_minus, half_A),
        eta=math.atan2(half_A, omega_minus),
    )


def hamiltonian_full(d: DonorParams, f: FieldConfig) -> Matrix:
    sx, sy, sz, ix, iy, iz = spin_operators()
    nx, ny, nz = f.direction()
    s_n = nx * sx + ny * sy + nz * sz
    i_n = nx * ix + ny * iy + nz * iz
    s_dot_i = sx @ ix + sy @ iy + sz @ iz
    return d.gamma_e * f.B * s_n - d.gamma_n * f.B * i_n + d.hyperfine_A * s_dot_i


def dressed_basis(f: FieldConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    |+> = cos(t/2)|up> + sin(t/2) e^{ip}|down>, |-> = -sin(t/2)|up> + cos(t/2) e^{ip}|down>.
    """
    c, s = math.cos(f.theta / 2.0), math.sin(f.theta / 2.0)
    phase = np.exp(1j * f.phi)
    plus = np.array([c, s * phase], dtype=np.complex128)
    minus = np.array([-s, c * phase], dtype=np.complex128)
    return plus, minus


def spectrum(d: DonorParams, f: FieldConfig) -> Spectrum:
    """
    Closed-form levels and eigenvectors. In the dressed product basis the field
    terms are diagonal and S.I keeps its form, so only the |+->, |-+> block mixes.
    """
    freq = derived_frequencies(d, f.B)
    quarter_A = d.hyperfine_A / 4.0
    energies = (
        freq.omega_plus + quarter_A,
        freq.Omega - quarter_A,
        -freq.Omega - quarter_A,
        -freq.omega_plus + quarter_A,
    )

    plus, minus = dressed_basis(f)
    pp, pm, mp, mm = (np.kron(a, b) for a in (plus, minus) for b in (plus, minus))
    c, s = math.cos(freq.eta / 2.0), math.sin(freq.eta / 2.0)
    vectors = (
        TwoQubitState(pp),
        TwoQubitState(c * pm + s * mp),
        TwoQubitState(-s * pm + c * mp),
        TwoQubitState(mm),
    )
    return Spectrum(energies=energies, eigenvectors=vectors, eta=freq.eta)


def strong_field_levels(d: DonorParams, f: FieldConfig) -> Tuple[float, float, float, float]:
    """
    Approximate levels of |++>, |+->, |-+>, |--> when (gamma_e + gamma_n) B >> A.
    """
    freq = derived_frequencies(d, f.B)
    quarter_A = d.hyperfine_A / 4.0
    return (
        freq.omega_plus + quarter_A,
        freq.omega_minus - quarter_A,
        -freq.omega_minus - quarter_A,
        -freq.omega_plus + quarter_A,
    )


def split_hamiltonian(d: DonorParams, Bz: float) -> Tuple[Matrix, Matrix, Matrix]:
    """
    The three commuting parts (H_xy, H_zz, H_+) of the z-field Hamiltonian.
    """
    freq = derived_frequencies(d, Bz)
    sx, sy, sz, ix, iy, iz = spin_operators()
    h_xy = freq.omega_minus * (sz - iz) + d.hyperfine_A * (sx @ ix + sy @ iy)
    h_zz = d.hyperfine_A * (sz @ iz)
    h_plus = freq.omega_plus * (sz + iz)
    return h_xy, h_zz, h_plus


def _check_time(t: float) -> None:
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"Evolution time must be finite and >= 0, got {t}")


def split_propagator_factors(d: DonorParams, Bz: float, t: float) -> Tuple[Matrix, Matrix, Matrix]:
    """
    exp(-i H_xy t), exp(-i H_zz t) and exp(-i H_+ t) from their operator closed forms.

    sin(x t)/x is evaluated as t*sinc so vanishing frequencies stay regular.
    """
    _check_time(t)
    freq = derived_frequencies(d, Bz)
    h_xy, h_zz, h_plus = split_hamiltonian(d, Bz)
    one = identity(4)

    u_xy = (one + (math.cos(freq.Omega * t) - 1.0) * _MIDDLE_PROJECTOR
            - 1j * t * np.sinc(freq.Omega * t / math.pi) * h_xy)
    quarter_At = d.hyperfine_A * t / 4.0
    u_zz = math.cos(quarter_At) * one - 1j * t * np.sinc(quarter_At / math.pi) * h_zz
    u_plus = (one + (math.cos(freq.omega_plus * t) - 1.0) * _OUTER_PROJECTOR
              - 1j * t * np.sinc(freq.omega_plus * t / math.pi) * h_plus)
    return u_xy, u_zz, u_plus


def block_propagators(d: DonorParams, Bz: float, t: float) -> Tuple[Matrix, Matrix]:
    """
    The commuting factors (U1, U2) for a field Bz along z: U1 carries the |up,up>,
    |down,down> phases, U2 rotates the {|up,down>, |down,up>} block at frequency Omega.
    """
    _check_time(t)
    freq = derived_frequencies(d, Bz)
    quarter_At = d.hyperfine_A * t / 4.0

    u1 = identity(4)
    u1[0, 0] = np.exp(-1j * (freq.omega_plus * t + quarter_At))
    u1[3, 3] = np.exp(1j * (freq.omega_plus * t - quarter_At))

    cos_w = math.cos(freq.Omega * t)
    sin_over = t * np.sinc(freq.Omega * t / math.pi)  # sin(Omega t)/Omega
    shift = np.exp(1j * quarter_At)
    flip = -1j * (d.hyperfine_A / 2.0) * sin_over * shift

    u2 = identity(4)
    u2[1, 1] = (cos_w - 1j * freq.omega_minus * sin_over) * shift
    u2[1, 2] = flip
    u2[2, 1] = flip
    u2[2, 2] = (cos_w + 1j * freq.omega_minus * sin_over) * shift
    return u1, u2


def split_propagator(d: DonorParams, Bz: float, t: float) -> Matrix:
    """U(t) = U1 U2, see ``block_propagators``."""
    u1, u2 = block_propagators(d, Bz, t)
    return u1 @ u2


def evolve(d: DonorParams, state: TwoQubitState, Bz: float, t: float) -> TwoQubitState:
    return state.evolved(split_propagator(d, Bz, t))


def plus_minus_state(theta: float, phi: float) -> TwoQubitState:
    """The product state |+->: electron along n, nucleus against it."""
    plus, minus = dressed_basis(FieldConfig(B=0.0, theta=theta, phi=phi))
    return TwoQubitState(np.kron(plus, minus))


def evolve_from_plus_minus(d: DonorParams, init_angles: Tuple[float, float], Bz: float, t: float) -> TwoQubitState:
    """
    U(t)|+-> written out amplitude by amplitude. The e^{i pi} factors come from the
    -sin(theta/2) component of |->.
    """
    _check_time(t)
    theta, phi = init_angles
    freq = derived_frequencies(d, Bz)
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    quarter_At = d.hyperfine_A * t / 4.0
    cos_w = math.cos(freq.Omega * t)
    sin_w = math.sin(freq.Omega * t)
    if freq.Omega > 0:
        flip_ratio = d.hyperfine_A / (2.0 * freq.Omega)
        detune_ratio = freq.omega_minus / freq.Omega
    else:
        flip_ratio = detune_ratio = 0.0
    e_pi = np.exp(1j * math.pi)

    a_uu = np.exp(-1j * freq.omega_plus * t) * np.exp(-1j * quarter_At) * e_pi * c * s
    a_ud = (np.exp(1j * quarter_At) * np.exp(1j * phi)
            * (cos_w * c ** 2 + 1j * (flip_ratio * s ** 2 - detune_ratio * c ** 2) * sin_w))
    a_du = (np.exp(1j * quarter_At) * np.exp(1j * phi) * e_pi
            * (cos_w * s ** 2 + 1j * (flip_ratio * c ** 2 + detune_ratio * s ** 2) * sin_w))
    a_dd = np.exp(1j * freq.omega_plus * t) * np.exp(-1j * quarter_At) * np.exp(2j * phi) * c * s
    return TwoQubitState.from_amplitudes([a_uu, a_ud, a_du, a_dd])
