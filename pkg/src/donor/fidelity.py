import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

from src.config import settings
from src.donor.system import DonorParams, split_propagator
from src.linalg.qmath import Matrix, assert_unitary, dagger

logger = logging.getLogger(__name__)

UNITARY_TOLERANCE = 1e-10
FIELD_GUARD_TOLERANCE = 1e-9
_SQRT2 = math.sqrt(2.0)


def entangling_point(d: DonorParams) -> Tuple[float, float]:
    """(Bz*, t*) = (A/(gamma_e + gamma_n), pi/(sqrt(2) A)), where |up,down> becomes the triplet."""
    if d.hyperfine_A <= 0 or d.gamma_e + d.gamma_n == 0:
        raise ValueError("The entangling point needs A > 0 and gamma_e + gamma_n != 0")
    return d.hyperfine_A / (d.gamma_e + d.gamma_n), math.pi / (_SQRT2 * d.hyperfine_A)


def _gamma_ratio(d: DonorParams) -> float:
    return (d.gamma_e - d.gamma_n) / (d.gamma_e + d.gamma_n)


def gate_W(d: DonorParams) -> Matrix:
    """
    The triplet-making gate: U(t*) at Bz*, written with explicit phases.
    """
    r = _gamma_ratio(d)
    base = math.pi / (2.0 * _SQRT2)
    block = -(1j / _SQRT2) * np.exp(1j * math.pi / (4.0 * _SQRT2))

    w = np.zeros((4, 4), dtype=np.complex128)
    w[0, 0] = np.exp(-1j * base * (r + 0.5))
    w[1, 1] = block
    w[1, 2] = block
    w[2, 1] = block
    w[2, 2] = -block
    w[3, 3] = np.exp(1j * base * (r - 0.5))
    return w


def fidelity_trace(u: Matrix, w: Matrix) -> float:
    """
    (1/N) Re Tr[W^H U].

    Raises:
        NonUnitaryError: If either operator is not unitary within 1e-10.
    """
    u = assert_unitary(u, UNITARY_TOLERANCE)
    w = assert_unitary(w, UNITARY_TOLERANCE)
    if u.shape != w.shape:
        raise ValueError(f"Operator shapes differ: {u.shape} vs {w.shape}")
    return float(np.trace(dagger(w) @ u).real / u.shape[0])


def _analytic(d: DonorParams, t):
    A = d.hyperfine_A
    r = _gamma_ratio(d)
    envelope = np.cos(A * t / 4.0 - math.pi / (4.0 * _SQRT2))
    return 0.5 * envelope * (np.cos(r * (A * t / 2.0 - math.pi / (2.0 * _SQRT2))) + np.sin(A * t / _SQRT2))


def fidelity_analytic(d: DonorParams, t: float, Bz: Optional[float] = None) -> float:
    """
    Closed-form fidelity between U(t) and W, valid only at the entangling field.

    Args:
        d: Donor parameters.
        t: Evolution time in seconds, >= 0.
        Bz: Optional field the caller intends to use; anything other than
            A/(gamma_e + gamma_n) is rejected.

    Raises:
        ValueError: For negative t or a field other than the entangling one.
    """
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"Evolution time must be finite and >= 0, got {t}")
    if Bz is not None:
        bz_star, _ = entangling_point(d)
        if abs(Bz - bz_star) > FIELD_GUARD_TOLERANCE * abs(bz_star):
            logger.warning(f"Rejected analytic fidelity at Bz={Bz:.6g} T (valid only at {bz_star:.6g} T)")
            raise ValueError(f"The analytic fidelity holds only at Bz = {bz_star!r} T, got {Bz!r}")
    return float(_analytic(d, t))


class FidelityCurve:
    """
    Sampled fidelity F(t) on a uniform time grid, optionally with the trace-formula column.
    """

    def __init__(self, times: np.ndarray, fidelity: np.ndarray, params: DonorParams,
                 trace: Optional[np.ndarray] = None):
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("A curve needs at least 2 samples")
        if np.any(np.diff(times) <= 0):
            raise ValueError("Curve times must be strictly increasing")
        self.times = times
        self.fidelity = np.asarray(fidelity, dtype=float)
        self.params = params
        self.trace = None if trace is None else np.asarray(trace, dtype=float)

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.times.tolist(), self.fidelity.tolist()))

    def max_deviation(self) -> Optional[float]:
        """Largest |analytic - trace| over the grid, None without a trace column."""
        if self.trace is None:
            return None
        return float(np.max(np.abs(self.fidelity - self.trace)))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t_s": self.times, "t_ns": self.times * 1e9, "F": self.fidelity})
        if self.trace is not None:
            frame["F_trace"] = self.trace
            frame["deviation"] = np.abs(self.fidelity - self.trace)
        return frame

    def peak(self, refine: bool = True) -> Tuple[float, float]:
        """
        (t, F) at the grid maximum; with ``refine`` the maximum is polished by a
        bounded scalar search between the neighbouring grid points.
        """
        i = int(np.argmax(self.fidelity))
        t_best, f_best = float(self.times[i]), float(self.fidelity[i])
        if not refine:
            return t_best, f_best

        lo = float(self.times[max(i - 1, 0)])
        hi = float(self.times[min(i + 1, self.times.size - 1)])
        result = minimize_scalar(lambda t: -_analytic(self.params, t), bounds=(lo, hi),
                                 method="bounded", options={"xatol": 1e-18})
        if result.success and -result.fun > f_best:
            t_best, f_best = float(result.x), float(-result.fun)
        logger.debug(f"Curve peak at t={t_best:.9g} s, F={f_best:.15f}")
        return t_best, f_best


def fidelity_curve(d: DonorParams, t_max: Optional[float] = None, n: Optional[int] = None,
                   with_trace: bool = False) -> FidelityCurve:
    """
    Samples the analytic fidelity at n uniform points on [0, t_max].

    Args:
        d: Donor parameters.
        t_max: Range end in seconds (default ``settings.curve_t_max_ns`` ns).
        n: Number of samples, >= 2 (default ``settings.curve_points``).
        with_trace: Also evaluate the trace formula on the full propagator at Bz*.
    """
    t_max = settings.curve_t_max_ns * 1e-9 if t_max is None else t_max
    n = settings.curve_points if n is None else n
    if n < 2:
        raise ValueError(f"A curve needs n >= 2 points, got {n}")
    if not math.isfinite(t_max) or t_max <= 0:
        raise ValueError(f"t_max must be positive, got {t_max}")

    times = np.linspace(0.0, t_max, n)
    fidelity = _analytic(d, times)

    trace = None
    if with_trace:
        bz_star, _ = entangling_point(d)
        w = gate_W(d)
        trace = np.array([fidelity_trace(split_propagator(d, bz_star, t), w) for t in times])

    logger.info(f"Sampled fidelity curve: {n} points on [0, {t_max:.6g}] s")
    return FidelityCurve(times, fidelity, d, trace)
