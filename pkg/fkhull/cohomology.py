"""Difference equations phi(sigma + n omega alpha) - phi(sigma) = eta(sigma).

All operators here are diagonal in the Fourier basis. Division by a small
divisor goes through a :class:`DivisorFloor`, which either raises or clamps
and counts the clamped modes.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt

from .exceptions import FKHullCohomologyError, FKHullConfigError, FKHullSmallDivisorError
from .fourier import ComplexArray, FourierSeries, FrequencyBasis, weighted_norm
from .index_space import IndexSet

logger = logging.getLogger(__name__)

# |<eta>| allowed before the mean is considered material, relative to |eta|_0
MEAN_TOL = 1e-12


class FloorPolicy(str, Enum):
    ERROR = "error"
    CLAMP = "clamp"


@dataclass(frozen=True)
class DivisorFloor:
    floor: float = 1e-14
    policy: FloorPolicy = FloorPolicy.ERROR

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "policy", FloorPolicy(self.policy))
        except ValueError:
            raise FKHullConfigError(f"Unknown divisor policy {self.policy!r}") from None
        if not self.floor > 0:
            raise FKHullConfigError(f"Divisor floor must be positive, got {self.floor}")


DEFAULT_FLOOR = DivisorFloor()


def small_divisors(basis: FrequencyBasis, index_set: IndexSet, n: int = 1) -> ComplexArray:
    """Return e^{i n k . omega alpha} - 1 for every member."""
    return np.exp(1j * basis.phases(index_set, n)) - 1.0


def condition(basis: FrequencyBasis, index_set: IndexSet, n: int = 1) -> float:
    """Return 1 / min |e^{i n k . omega alpha} - 1| over the nonzero members."""
    magnitudes = np.abs(small_divisors(basis, index_set, n))
    magnitudes[index_set.zero_position] = np.inf
    smallest = float(magnitudes.min())
    return np.inf if smallest == 0.0 else 1.0 / smallest


def floor_hits(basis: FrequencyBasis, index_set: IndexSet, floor: DivisorFloor = DEFAULT_FLOOR, n: int = 1) -> int:
    """Count nonzero members whose divisor lies below the floor."""
    magnitudes = np.abs(small_divisors(basis, index_set, n))
    magnitudes[index_set.zero_position] = np.inf
    return int(np.count_nonzero(magnitudes < floor.floor))


def _guarded(
    denominators: ComplexArray, active: npt.NDArray[np.bool_], index_set: IndexSet, floor: DivisorFloor
) -> ComplexArray:
    denominators = denominators.copy()
    magnitudes = np.abs(denominators)
    small = active & (magnitudes < floor.floor)
    small[index_set.zero_position] = False
    if np.any(small):
        worst = int(np.flatnonzero(small)[np.argmin(magnitudes[small])])
        if floor.policy is FloorPolicy.ERROR:
            raise FKHullSmallDivisorError(index=index_set[worst].entries, divisor=float(magnitudes[worst]))
        logger.warning(
            "Clamping %d divisors below %.1e (smallest %.3e)", int(small.sum()), floor.floor, magnitudes[worst]
        )
        phase = np.where(magnitudes[small] > 0, denominators[small] / np.maximum(magnitudes[small], 1e-300), 1.0)
        denominators[small] = floor.floor * phase
    denominators[index_set.zero_position] = 1.0
    return denominators


def _check_mean(eta: FourierSeries, what: str) -> None:
    scale = weighted_norm(eta, 0.0)
    if abs(eta.mean) > MEAN_TOL * scale:
        raise FKHullCohomologyError(f"{what}: average {eta.mean:.3e} is not zero (|eta|_0 = {scale:.3e})")


def apply_S(n: int, f: FourierSeries, basis: FrequencyBasis) -> FourierSeries:
    """Return f(sigma + n omega alpha) - f(sigma)."""
    return FourierSeries(f.index_set, f.coeffs * small_divisors(basis, f.index_set, n), f.loss)


def solve_S(n: int, eta: FourierSeries, basis: FrequencyBasis, floor: DivisorFloor = DEFAULT_FLOOR) -> FourierSeries:
    """Return the zero-average phi with phi(sigma + n omega alpha) - phi(sigma) = eta - <eta>.

    The average of eta must vanish up to roundoff and is dropped.
    """
    if n == 0:
        raise ValueError("solve_S needs n != 0")
    _check_mean(eta, "solve_S")
    index_set = eta.index_set
    active = eta.coeffs != 0
    denominators = _guarded(small_divisors(basis, index_set, n), active, index_set, floor)
    coeffs = eta.coeffs / denominators
    coeffs[index_set.zero_position] = 0.0
    return FourierSeries(index_set, coeffs, eta.loss)


def multiplier(
    n: int, basis: FrequencyBasis, index_set: IndexSet, sign: int = 1, floor: DivisorFloor = DEFAULT_FLOOR
) -> ComplexArray:
    """Return m_k = (e^{i n k . omega alpha} - 1) / (e^{i sign k . omega alpha} - 1), 0 at k = 0."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if n == 0:
        return np.zeros(len(index_set), dtype=np.complex128)
    active = np.ones(len(index_set), dtype=bool)
    denominators = _guarded(small_divisors(basis, index_set, sign), active, index_set, floor)
    values = small_divisors(basis, index_set, n) / denominators
    values[index_set.zero_position] = 0.0
    return values


def apply_L(
    n: int, f: FourierSeries, basis: FrequencyBasis, sign: int = 1, floor: DivisorFloor = DEFAULT_FLOOR
) -> FourierSeries:
    """Apply L_n = S_sign^{-1} S_n to the zero-average part of f."""
    if n == 0:
        return FourierSeries.zero(f.index_set)
    return FourierSeries(f.index_set, f.coeffs * multiplier(n, basis, f.index_set, sign, floor), f.loss)


def apply_R(
    n: int, f: FourierSeries, basis: FrequencyBasis, sign: int = 1, floor: DivisorFloor = DEFAULT_FLOOR
) -> FourierSeries:
    """Apply R_n = S_n S_sign^{-1} to a zero-average f.

    On diagonal operators the two orders agree; the mean of f must vanish.
    """
    if n == 0:
        return FourierSeries.zero(f.index_set)
    _check_mean(f, "apply_R")
    return FourierSeries(f.index_set, f.coeffs * multiplier(n, basis, f.index_set, sign, floor), f.loss)
