"""Finite Diophantine certificates over a truncated index set.

Two weight families are supported:

* ``product``: |omega alpha . k - 2 pi n| >= nu / prod_j (1 + <<j>>^(1+tau) |k_j|^(1+tau))
* ``power``:   |omega alpha . k - 2 pi n| >= nu |k|_1^(-tau)

The check is exhaustive over the index set the solver works on, which is
exactly what a truncated iteration divides by.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np

from .entities.report import DiophantineReport
from .exceptions import FKHullConfigError
from .index_space import FloatArray, IndexSet, IntArray, MultiIndex

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class DiophantineStyle(str, Enum):
    """Weight families of the Diophantine condition."""

    PRODUCT = "product"
    POWER = "power"


@dataclass(frozen=True)
class DiophantineParams:
    nu: float
    tau: float
    style: DiophantineStyle = DiophantineStyle.PRODUCT
    level: Optional[int] = None

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "style", DiophantineStyle(self.style))
        except ValueError:
            raise FKHullConfigError(f"Unknown Diophantine style {self.style!r}") from None
        if not self.nu > 0 or not self.tau > 0:
            raise FKHullConfigError(f"nu and tau must be positive, got nu={self.nu}, tau={self.tau}")


def lattice_distance(x: Union[float, FloatArray]) -> Union[float, FloatArray]:
    """Return the distance of x to 2 pi Z."""
    return np.abs(x - TWO_PI * np.round(np.asarray(x) / TWO_PI))


def divisor(omega: float, alpha: Union[FloatArray, Tuple[float, ...]], k: MultiIndex) -> float:
    """Return min_n |omega alpha . k - 2 pi n| for a nonzero k."""
    if not k:
        raise ValueError("Divisor of the zero index is undefined")
    alpha = np.asarray(alpha, dtype=np.float64)
    if k.max_position > alpha.shape[0]:
        raise ValueError(f"Multi-index {k} needs {k.max_position} frequencies, alpha has {alpha.shape[0]}")
    x = omega * float(sum(alpha[j - 1] * kj for j, kj in k.entries))
    return float(lattice_distance(x))


def divisors(omega: float, alpha: Union[FloatArray, Tuple[float, ...]], index_set: IndexSet, n: int = 1) -> FloatArray:
    """Return |n omega alpha . k| reduced mod 2 pi for every member (0 at k = 0)."""
    alpha = np.asarray(alpha, dtype=np.float64)[: index_set.active_count]
    return np.asarray(lattice_distance(n * omega * (index_set.vectors @ alpha)), dtype=np.float64)


def weight(vectors: IntArray, tau: float, style: DiophantineStyle) -> FloatArray:
    """Return the weight multiplying the divisor for each dense vector row."""
    vectors = np.atleast_2d(np.abs(np.asarray(vectors)))
    if DiophantineStyle(style) is DiophantineStyle.POWER:
        return vectors.sum(axis=1).astype(np.float64) ** tau
    positions = np.arange(1, vectors.shape[1] + 1, dtype=np.float64)
    return np.prod(1.0 + (positions * vectors) ** (1.0 + tau), axis=1)


def _weighted(
    omega: float, alpha: Union[FloatArray, Tuple[float, ...]], index_set: IndexSet, tau: float, style: DiophantineStyle
) -> Tuple[FloatArray, FloatArray]:
    nonzero = np.arange(len(index_set)) != index_set.zero_position
    if not np.any(nonzero):
        raise ValueError("Index set holds only the zero index")
    values = divisors(omega, alpha, index_set)
    return values, np.where(nonzero, values * weight(index_set.vectors, tau, style), np.inf)


def empirical_nu(
    omega: float,
    alpha: Union[FloatArray, Tuple[float, ...]],
    index_set: IndexSet,
    tau: float,
    style: DiophantineStyle = DiophantineStyle.PRODUCT,
) -> float:
    """Return the largest nu for which the condition holds on the index set."""
    _, weighted = _weighted(omega, alpha, index_set, tau, style)
    return float(weighted.min())


def check(
    params: DiophantineParams, omega: float, alpha: Union[FloatArray, Tuple[float, ...]], index_set: IndexSet
) -> DiophantineReport:
    """Check the condition on every nonzero member and report the worst one."""
    values, weighted = _weighted(omega, alpha, index_set, params.tau, params.style)
    worst = int(np.argmin(weighted))
    masked = np.where(np.arange(len(index_set)) == index_set.zero_position, np.inf, values)
    smallest = int(np.argmin(masked))
    nu = float(weighted[worst])
    failed = nu < params.nu
    report = DiophantineReport(
        style=params.style.value,
        tau=params.tau,
        nu=params.nu,
        empirical_nu=nu,
        witness=str(index_set[worst]) if failed else None,
        witness_divisor=float(values[worst]) if failed else None,
        min_divisor=float(masked[smallest]),
        min_divisor_index=str(index_set[smallest]),
        set_size=len(index_set),
    )
    if failed:
        logger.warning(
            "Diophantine %s check fails at k=%s: divisor %.3e, empirical nu %.3e < %.3e",
            params.style.value,
            report.witness,
            values[worst],
            nu,
            params.nu,
        )
    else:
        logger.debug("Diophantine %s check passes with empirical nu %.3e", params.style.value, nu)
    return report


def homogeneous_nu(alpha: Union[FloatArray, Tuple[float, ...]], index_set: IndexSet, tau: float) -> float:
    """Return min |alpha . k| prod_j (1 + <<j>>^(1+tau) |k_j|^(1+tau)) over nonzero members.

    A positive value certifies rational independence of alpha on the set.
    """
    alpha = np.asarray(alpha, dtype=np.float64)[: index_set.active_count]
    nonzero = np.arange(len(index_set)) != index_set.zero_position
    if not np.any(nonzero):
        raise ValueError("Index set holds only the zero index")
    values = np.abs(index_set.vectors @ alpha) * weight(index_set.vectors, tau, DiophantineStyle.PRODUCT)
    return float(values[nonzero].min())


def check_homogeneous(
    params: DiophantineParams, alpha: Union[FloatArray, Tuple[float, ...]], index_set: IndexSet
) -> DiophantineReport:
    """Check the homogeneous condition |alpha . k| >= nu / weight(k) on the set."""
    alpha = np.asarray(alpha, dtype=np.float64)[: index_set.active_count]
    values = np.abs(index_set.vectors @ alpha)
    weighted = values * weight(index_set.vectors, params.tau, DiophantineStyle.PRODUCT)
    weighted[index_set.zero_position] = np.inf
    masked = values.copy()
    masked[index_set.zero_position] = np.inf
    worst = int(np.argmin(weighted))
    smallest = int(np.argmin(masked))
    failed = weighted[worst] < params.nu
    return DiophantineReport(
        style="homogeneous",
        tau=params.tau,
        nu=params.nu,
        empirical_nu=float(weighted[worst]),
        witness=str(index_set[worst]) if failed else None,
        witness_divisor=float(values[worst]) if failed else None,
        min_divisor=float(masked[smallest]),
        min_divisor_index=str(index_set[smallest]),
        set_size=len(index_set),
    )


def divisor_table(
    omega: float, alpha: Union[FloatArray, Tuple[float, ...]], index_set: IndexSet, count: int = 10
) -> List[Tuple[MultiIndex, float]]:
    """Return the ``count`` smallest divisors with their multi-indices.

    Only one of k and -k is listed.
    """
    values = divisors(omega, alpha, index_set)
    positions = np.arange(len(index_set))
    keep = positions < index_set.neg_positions
    order = positions[keep][np.argsort(values[keep], kind="stable")]
    return [(index_set[int(p)], float(values[p])) for p in order[:count]]
