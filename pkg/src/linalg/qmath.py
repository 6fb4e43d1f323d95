"""
Dense complex linear algebra for single-spin (2x2) and two-spin (4x4) operators.

Operators are plain ``numpy`` arrays of dtype ``complex128``. The two-spin basis
order is fixed to (up-up, up-down, down-up, down-down), i.e. the first tensor
factor is spin 1 (the electron in the donor model) and the second is spin 2.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from src.config import settings

logger = logging.getLogger(__name__)

Matrix = NDArray[np.complex128]

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


class NonHermitianError(ValueError):
    """Raised when an operator expected to be hermitian is not."""


class NonUnitaryError(ValueError):
    """Raised when an operator expected to be unitary is not."""


@dataclass(frozen=True)
class SVD2Result:
    """
    Singular value decomposition of a 2x2 matrix, ``a = left @ diag(s) @ right^H``.

    Attributes:
        singular_values: (s1, s2) with s1 >= s2 >= 0.
        left: Left unitary; the first nonzero entry of each column is real and nonnegative.
        right: Right unitary carrying the remaining phases.
    """
    singular_values: Tuple[float, float]
    left: Matrix
    right: Matrix

    def reconstruct(self) -> Matrix:
        return self.left @ np.diag(np.asarray(self.singular_values, dtype=np.complex128)) @ dagger(self.right)


def as_operator(m, dim: int) -> Matrix:
    """
    Validates and converts ``m`` into a ``dim x dim`` complex matrix.

    Raises:
        ValueError: If the shape is wrong or any entry is NaN or infinite.
    """
    arr = np.asarray(m, dtype=np.complex128)
    if arr.shape != (dim, dim):
        raise ValueError(f"Expected a {dim}x{dim} operator, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Operator entries must be finite")
    return arr


def pauli(axis: str) -> Matrix:
    """
    Returns the Pauli matrix for ``axis`` in {"x", "y", "z"}.
    """
    try:
        return _PAULI[axis.lower()].copy()
    except (KeyError, AttributeError):
        raise ValueError(f"Unknown Pauli axis: {axis!r}. Must be one of 'x', 'y', 'z'")


def identity(dim: int = 2) -> Matrix:
    return np.eye(dim, dtype=np.complex128)


def kron(a, b) -> Matrix:
    """Tensor product of two single-spin operators in the shared basis order."""
    return np.kron(as_operator(a, 2), as_operator(b, 2))


def on_first(op) -> Matrix:
    """Lifts a single-spin operator onto spin 1 (op x 1)."""
    return kron(op, identity(2))


def on_second(op) -> Matrix:
    """Lifts a single-spin operator onto spin 2 (1 x op)."""
    return kron(identity(2), op)


def spin_operators() -> Tuple[Matrix, Matrix, Matrix, Matrix, Matrix, Matrix]:
    """
    Spin-1/2 operators (Sx, Sy, Sz) on spin 1 and (Ix, Iy, Iz) on spin 2.
    """
    s = tuple(on_first(pauli(a) / 2) for a in "xyz")
    i = tuple(on_second(pauli(a) / 2) for a in "xyz")
    return s + i


def dagger(m) -> Matrix:
    return np.conj(np.asarray(m, dtype=np.complex128)).T


def is_hermitian(m, tol: Optional[float] = None) -> bool:
    """
    Checks ``m == m^H`` relative to the operator scale (absolute for norms below 1).
    """
    tol = settings.numeric_tolerance if tol is None else tol
    arr = np.asarray(m, dtype=np.complex128)
    scale = max(1.0, float(np.max(np.abs(arr))))
    return float(np.max(np.abs(arr - dagger(arr)))) <= tol * scale


def is_unitary(m, tol: Optional[float] = None) -> bool:
    tol = settings.numeric_tolerance if tol is None else tol
    arr = np.asarray(m, dtype=np.complex128)
    return float(np.max(np.abs(dagger(arr) @ arr - identity(arr.shape[0])))) <= tol


def assert_unitary(m, tol: Optional[float] = None) -> Matrix:
    """
    Returns ``m`` unchanged if it is unitary within ``tol``.

    Raises:
        NonUnitaryError: Otherwise.
    """
    tol = settings.numeric_tolerance if tol is None else tol
    arr = np.asarray(m, dtype=np.complex128)
    deviation = float(np.max(np.abs(dagger(arr) @ arr - identity(arr.shape[0]))))
    if deviation > tol:
        raise NonUnitaryError(f"Operator is not unitary: max |U^H U - 1| = {deviation:.3e} > {tol:.1e}")
    return arr


def expm_oracle(h, t: float, method: str = "auto", tol: Optional[float] = None) -> Matrix:
    """
    Computes exp(-i h t) for a hermitian 4x4 ``h`` without any closed form.

    Args:
        h: Hermitian operator (energies in s^-1, hbar = 1).
        t: Evolution time in seconds (any sign).
        method: "eigh" (eigendecomposition), "series" (scaled Pade series via
            scipy) or "auto" (eigh, falling back to the series on failure).
        tol: Hermiticity tolerance (default ``settings.numeric_tolerance``).

    Raises:
        NonHermitianError: If ``h`` is not hermitian within ``tol``.
    """
    h = as_operator(h, 4)
    if not is_hermitian(h, tol):
        raise NonHermitianError("expm_oracle requires a hermitian operator")
    if not np.isfinite(t):
        raise ValueError(f"Time must be finite, got {t}")

    if method == "series":
        return scipy.linalg.expm(-1j * h * t)
    if method not in ("eigh", "auto"):
        raise ValueError(f"Unknown method: {method!r}")

    try:
        energies, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as e:
        if method == "eigh":
            raise
        logger.warning(f"Eigendecomposition failed ({e}); using series expansion")
        return scipy.linalg.expm(-1j * h * t)
    return (vectors * np.exp(-1j * energies * t)) @ dagger(vectors)


def svd2(a) -> SVD2Result:
    """
    Singular value decomposition of a 2x2 complex matrix with a fixed phase gauge.

    Each left singular vector is rotated so its first nonzero component is real
    and nonnegative; the compensating phase moves into the matching right vector.
    """
    a = as_operator(a, 2)
    u, s, vh = np.linalg.svd(a)
    right = dagger(vh)
    for k in range(2):
        column = u[:, k]
        nonzero = np.flatnonzero(np.abs(column) > 1e-15)
        if nonzero.size == 0:
            continue
        phase = np.exp(-1j * np.angle(column[nonzero[0]]))
        u[:, k] = column * phase
        right[:, k] = right[:, k] * phase
    return SVD2Result(singular_values=(float(s[0]), float(s[1])), left=u, right=right)
