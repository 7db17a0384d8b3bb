"""Truncated Fourier series on the N-torus and the analytic rho-norm.

A series stores one complex coefficient per member of its :class:`IndexSet`.
Operations whose exact result leaves the index set (products, translations,
compositions) drop those modes and record them in a :class:`TruncationLoss`
attached to the result.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt

from .exceptions import (
    FKHullCompositionError,
    FKHullSeriesError,
    FKHullSingularSeriesError,
)
from .index_space import FloatArray, IndexSet, IntArray, MultiIndex

logger = logging.getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]

SERIES_TOL = 1e-14
EXP_MAX_TERMS = 64
EXP_ARGUMENT_CAP = 8.0
RECIPROCAL_TOL = 1e-12
RECIPROCAL_MAX_ITER = 60

# Largest number of coefficient pairs formed at once by a product.
PAIR_CHUNK = 4_000_000


@dataclass(frozen=True, eq=False)
class TruncationLoss:
    """Coefficient mass dropped by truncation, kept per mode weight |k|_s."""

    weights: FloatArray = field(default_factory=lambda: np.zeros(0))
    masses: FloatArray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def none(cls) -> "TruncationLoss":
        return cls()

    @classmethod
    def from_modes(cls, weights: FloatArray, values: ComplexArray) -> "TruncationLoss":
        masses = np.abs(values)
        keep = masses > 0
        return cls(np.asarray(weights, dtype=np.float64)[keep], masses[keep]).compressed()

    def at(self, rho: float) -> float:
        """Return the dropped mass measured in the rho-norm."""
        if self.masses.size == 0:
            return 0.0
        return float(np.sum(self.masses * np.exp(rho * self.weights)))

    @property
    def is_empty(self) -> bool:
        return self.masses.size == 0

    def scaled(self, factor: complex) -> "TruncationLoss":
        return TruncationLoss(self.weights, self.masses * abs(factor))

    def compressed(self) -> "TruncationLoss":
        """Merge entries with equal weight."""
        if self.masses.size < 2:
            return self
        unique, inverse = np.unique(np.round(self.weights, 10), return_inverse=True)
        return TruncationLoss(unique, np.bincount(inverse, weights=self.masses))

    def __add__(self, other: "TruncationLoss") -> "TruncationLoss":
        if other.is_empty:
            return self
        if self.is_empty:
            return other
        return TruncationLoss(
            np.concatenate([self.weights, other.weights]), np.concatenate([self.masses, other.masses])
        ).compressed()


@dataclass(frozen=True)
class FrequencyBasis:
    """Rotation number, frequency vector and analyticity parameters.

    ``alpha`` may hold more entries than an index set has frequencies; only
    the first ``N`` are used on an N-frequency set.
    """

    alpha: Tuple[float, ...]
    omega: float
    rho: float
    s: float = 1.0
    iota: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if not self.alpha:
            raise FKHullSeriesError("Frequency vector alpha is empty")
        if any(a == 0.0 or not 0.0 <= a <= 1.0 for a in self.alpha):
            raise FKHullSeriesError(f"alpha entries must lie in (0, 1], got {self.alpha}")
        if len(set(self.alpha)) != len(self.alpha):
            raise FKHullSeriesError(f"alpha entries must be pairwise distinct, got {self.alpha}")
        if not self.rho > 0 or not self.iota > 0 or not self.s > 0:
            raise FKHullSeriesError(f"rho, iota and s must be positive, got {self.rho}, {self.iota}, {self.s}")

    @property
    def n(self) -> int:
        return len(self.alpha)

    def alpha_array(self, n: Optional[int] = None) -> FloatArray:
        n = self.n if n is None else n
        if n > self.n:
            raise FKHullSeriesError(f"Basis has {self.n} frequencies, {n} requested")
        return np.array(self.alpha[:n], dtype=np.float64)

    def alpha_dot(self, index_set: IndexSet) -> FloatArray:
        """Return k . alpha for every member of the index set."""
        return _alpha_dot(self.alpha[: index_set.active_count], index_set)

    def phases(self, index_set: IndexSet, n: int = 1) -> FloatArray:
        """Return n k . omega alpha for every member of the index set."""
        return n * self.omega * self.alpha_dot(index_set)

    def with_rho(self, rho: float) -> "FrequencyBasis":
        return FrequencyBasis(self.alpha, self.omega, rho, self.s, self.iota)

    def truncated(self, n: int) -> "FrequencyBasis":
        """Return the basis restricted to the first n frequencies."""
        return FrequencyBasis(self.alpha[:n], self.omega, self.rho, self.s, self.iota)


@lru_cache(maxsize=64)
def _alpha_dot(alpha: Tuple[float, ...], index_set: IndexSet) -> FloatArray:
    if len(alpha) < index_set.active_count:
        raise FKHullSeriesError(f"Basis has {len(alpha)} frequencies, index set needs {index_set.active_count}")
    values = index_set.vectors @ np.array(alpha, dtype=np.float64)
    values.setflags(write=False)
    return values


ModeKey = Union[MultiIndex, str]


class FourierSeries:
    """Complex coefficients over a truncated index set.

    Series are values: operations return new series and never modify their
    inputs.
    """

    __slots__ = ("index_set", "coeffs", "loss")

    # numpy scalars defer to the reflected operators
    __array_ufunc__ = None

    def __init__(
        self, index_set: IndexSet, coeffs: ComplexArray, loss: Optional[TruncationLoss] = None
    ) -> None:
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (len(index_set),):
            raise FKHullSeriesError(f"Expected {len(index_set)} coefficients, got shape {coeffs.shape}")
        coeffs.setflags(write=False)
        self.index_set = index_set
        self.coeffs = coeffs
        self.loss = TruncationLoss.none() if loss is None else loss

    @classmethod
    def zero(cls, index_set: IndexSet) -> "FourierSeries":
        return cls(index_set, np.zeros(len(index_set), dtype=np.complex128))

    @classmethod
    def constant(cls, index_set: IndexSet, value: complex) -> "FourierSeries":
        coeffs = np.zeros(len(index_set), dtype=np.complex128)
        coeffs[index_set.zero_position] = value
        return cls(index_set, coeffs)

    @classmethod
    def from_modes(cls, index_set: IndexSet, modes: Mapping[ModeKey, complex]) -> "FourierSeries":
        """Build from a mapping of multi-index (or its text form) to coefficient."""
        coeffs = np.zeros(len(index_set), dtype=np.complex128)
        for key, value in modes.items():
            k = MultiIndex.parse(key) if isinstance(key, str) else key
            position = index_set.position(k)
            if position is None:
                raise FKHullSeriesError(f"Mode {str(k)!r} is outside {index_set!r}")
            coeffs[position] += value
        return cls(index_set, coeffs)

    @classmethod
    def cos_mode(cls, index_set: IndexSet, k: ModeKey, amplitude: float = 1.0) -> "FourierSeries":
        """Return amplitude * cos(k . sigma)."""
        k = MultiIndex.parse(k) if isinstance(k, str) else k
        if not k:
            return cls.constant(index_set, amplitude)
        return cls.from_modes(index_set, {k: amplitude / 2, -k: amplitude / 2})

    @classmethod
    def sin_mode(cls, index_set: IndexSet, k: ModeKey, amplitude: float = 1.0) -> "FourierSeries":
        """Return amplitude * sin(k . sigma)."""
        k = MultiIndex.parse(k) if isinstance(k, str) else k
        if not k:
            return cls.zero(index_set)
        return cls.from_modes(index_set, {k: -0.5j * amplitude, -k: 0.5j * amplitude})

    def _check(self, other: "FourierSeries") -> None:
        if self.index_set != other.index_set:
            raise FKHullSeriesError(f"Incompatible index sets {self.index_set!r} and {other.index_set!r}")

    def __add__(self, other: Union["FourierSeries", complex, float]) -> "FourierSeries":
        if isinstance(other, FourierSeries):
            self._check(other)
            return FourierSeries(self.index_set, self.coeffs + other.coeffs, self.loss + other.loss)
        coeffs = self.coeffs.copy()
        coeffs[self.index_set.zero_position] += other
        return FourierSeries(self.index_set, coeffs, self.loss)

    __radd__ = __add__

    def __neg__(self) -> "FourierSeries":
        return FourierSeries(self.index_set, -self.coeffs, self.loss)

    def __sub__(self, other: Union["FourierSeries", complex, float]) -> "FourierSeries":
        return self + (-other)

    def __rsub__(self, other: Union[complex, float]) -> "FourierSeries":
        return (-self) + other

    def __mul__(self, other: Union["FourierSeries", complex, float]) -> "FourierSeries":
        if isinstance(other, FourierSeries):
            return multiply(self, other)
        return FourierSeries(self.index_set, self.coeffs * other, self.loss.scaled(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Union[complex, float]) -> "FourierSeries":
        return self * (1.0 / other)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __repr__(self) -> str:
        return f"FourierSeries({self.index_set!r}, nonzero={int(np.count_nonzero(self.coeffs))})"

    @property
    def mean(self) -> complex:
        return complex(self.coeffs[self.index_set.zero_position])

    def norm(self, rho: float) -> float:
        return weighted_norm(self, rho)

    def coefficient(self, k: ModeKey) -> complex:
        k = MultiIndex.parse(k) if isinstance(k, str) else k
        position = self.index_set.position(k)
        return 0j if position is None else complex(self.coeffs[position])

    def modes(self) -> Dict[MultiIndex, complex]:
        """Return the nonzero coefficients keyed by multi-index."""
        return {self.index_set[int(p)]: complex(self.coeffs[p]) for p in np.flatnonzero(self.coeffs)}

    def without_mean(self) -> "FourierSeries":
        coeffs = self.coeffs.copy()
        coeffs[self.index_set.zero_position] = 0.0
        return FourierSeries(self.index_set, coeffs, self.loss)

    def without_loss(self) -> "FourierSeries":
        return FourierSeries(self.index_set, self.coeffs)

    def conj(self) -> "FourierSeries":
        """Return the complex conjugate function."""
        return FourierSeries(self.index_set, np.conj(self.coeffs[self.index_set.neg_positions]), self.loss)

    def real_projection(self) -> "FourierSeries":
        """Return the real part of the function, (c_k + conj c_{-k}) / 2."""
        return real_projection(self)

    def is_real(self, tol: float = 1e-12) -> bool:
        """Check c_{-k} = conj(c_k) coefficient-wise."""
        mirrored = np.conj(self.coeffs[self.index_set.neg_positions])
        return bool(np.all(np.abs(self.coeffs - mirrored) <= tol * max(1.0, float(np.abs(self.coeffs).max()))))

    def sup_distance(self, other: "FourierSeries") -> float:
        """Return max_k |c_k - c'_k|."""
        self._check(other)
        return float(np.abs(self.coeffs - other.coeffs).max())

    def embed(self, wider: IndexSet) -> "FourierSeries":
        """Return the same function over an index set with more frequencies."""
        positions = self.index_set.embed_positions(wider)
        inside = positions >= 0
        coeffs = np.zeros(len(wider), dtype=np.complex128)
        coeffs[positions[inside]] = self.coeffs[inside]
        loss = self.loss
        if not np.all(inside):
            loss = loss + TruncationLoss.from_modes(self.index_set.weights[~inside], self.coeffs[~inside])
        return FourierSeries(wider, coeffs, loss)

    def restrict(self, narrower: IndexSet) -> "FourierSeries":
        """Return the coefficients on a smaller index set; the rest goes to the loss."""
        positions = narrower.embed_positions(self.index_set)
        if np.any(positions < 0):
            raise FKHullSeriesError(f"{narrower!r} is not contained in {self.index_set!r}")
        kept = np.zeros(len(self.index_set), dtype=bool)
        kept[positions] = True
        loss = self.loss + TruncationLoss.from_modes(self.index_set.weights[~kept], self.coeffs[~kept])
        return FourierSeries(narrower, self.coeffs[positions], loss)


def weighted_norm(f: FourierSeries, rho: float) -> float:
    """Return sum_k |c_k| e^{rho |k|_s}."""
    return float(np.sum(np.abs(f.coeffs) * np.exp(rho * f.index_set.weights)))


def _dropped(index_set: IndexSet, keys: IntArray, values: ComplexArray) -> TruncationLoss:
    unique, inverse = np.unique(keys, return_inverse=True)
    summed = np.bincount(inverse, weights=values.real) + 1j * np.bincount(inverse, weights=values.imag)
    return TruncationLoss.from_modes(index_set.weights_of(index_set.decode(unique)), summed)


def multiply(f: FourierSeries, g: FourierSeries) -> FourierSeries:
    """Return the truncated product f * g.

    Modes of the exact convolution outside the index set are dropped and
    recorded in the result's loss, so that
    ``|f g|_rho <= |f|_rho |g|_rho`` holds with the loss added back.
    """
    f._check(g)
    index_set = f.index_set
    size = len(index_set)
    f_nonzero = np.flatnonzero(f.coeffs)
    g_nonzero = np.flatnonzero(g.coeffs)
    loss = f.loss + g.loss
    if f_nonzero.size == 0 or g_nonzero.size == 0:
        return FourierSeries(index_set, np.zeros(size, dtype=np.complex128), loss)

    g_keys = index_set.keys[g_nonzero] - index_set.zero_key
    g_values = g.coeffs[g_nonzero]
    real = np.zeros(size)
    imag = np.zeros(size)
    outside_keys = []
    outside_values = []
    chunk = max(1, PAIR_CHUNK // g_nonzero.size)
    for start in range(0, f_nonzero.size, chunk):
        rows = f_nonzero[start : start + chunk]
        keys = (index_set.keys[rows][:, None] + g_keys[None, :]).ravel()
        values = (f.coeffs[rows][:, None] * g_values[None, :]).ravel()
        positions = index_set.lookup(keys)
        inside = positions >= 0
        real += np.bincount(positions[inside], weights=values.real[inside], minlength=size)
        imag += np.bincount(positions[inside], weights=values.imag[inside], minlength=size)
        if not np.all(inside):
            outside_keys.append(keys[~inside])
            outside_values.append(values[~inside])
    if outside_keys:
        loss = loss + _dropped(index_set, np.concatenate(outside_keys), np.concatenate(outside_values))
    return FourierSeries(index_set, real + 1j * imag, loss)


def shift(f: FourierSeries, x: Union[FloatArray, Tuple[float, ...]]) -> FourierSeries:
    """Return f composed with the translation sigma -> sigma + x."""
    x = np.asarray(x, dtype=np.float64)
    n = f.index_set.active_count
    if x.shape[0] < n:
        raise FKHullSeriesError(f"Shift vector has {x.shape[0]} entries, series needs {n}")
    phases = f.index_set.vectors @ x[:n]
    return FourierSeries(f.index_set, f.coeffs * np.exp(1j * phases), f.loss)


def shift_orbit(f: FourierSeries, basis: FrequencyBasis, n: float) -> FourierSeries:
    """Return f composed with sigma -> sigma + n omega alpha."""
    return FourierSeries(f.index_set, f.coeffs * np.exp(1j * basis.phases(f.index_set, 1) * n), f.loss)


def translate(f: FourierSeries, k: Union[MultiIndex, IntArray], coeff: complex = 1.0) -> FourierSeries:
    """Return coeff * e^{i k . sigma} * f, dropping modes pushed out of the index set."""
    index_set = f.index_set
    vector = k.dense(index_set.active_count) if isinstance(k, MultiIndex) else np.asarray(k, dtype=np.int64)
    if not np.any(vector):
        return f * coeff
    targets = index_set.vectors + vector
    nonzero = f.coeffs != 0
    positions = np.full(len(index_set), -1, dtype=np.int64)
    reachable = index_set.in_key_range(targets) & nonzero
    positions[reachable] = index_set.lookup(index_set.encode(targets[reachable]))
    inside = positions >= 0
    coeffs = np.zeros(len(index_set), dtype=np.complex128)
    coeffs[positions[inside]] = coeff * f.coeffs[inside]
    loss = f.loss.scaled(coeff)
    dropped = nonzero & ~inside
    if np.any(dropped):
        loss = loss + TruncationLoss.from_modes(index_set.weights_of(targets[dropped]), coeff * f.coeffs[dropped])
    return FourierSeries(index_set, coeffs, loss)


def derive_alpha(f: FourierSeries, basis: FrequencyBasis) -> FourierSeries:
    """Return the directional derivative alpha . grad f, coefficients i (k . alpha) c_k."""
    return FourierSeries(f.index_set, 1j * basis.alpha_dot(f.index_set) * f.coeffs, f.loss)


def average(f: FourierSeries) -> complex:
    """Return the zero mode of f."""
    return f.mean


def real_projection(f: FourierSeries) -> FourierSeries:
    mirrored = np.conj(f.coeffs[f.index_set.neg_positions])
    return FourierSeries(f.index_set, 0.5 * (f.coeffs + mirrored), f.loss)


def reciprocal(
    f: FourierSeries, tol: float = RECIPROCAL_TOL, rho: float = 0.0, max_iter: int = RECIPROCAL_MAX_ITER
) -> FourierSeries:
    """Return r with |f r - 1|_rho <= tol.

    Newton iteration r <- r (2 - f r) seeded with 1 / <f>. Raises
    :class:`FKHullSingularSeriesError` when <f> vanishes or the iteration
    does not reach the tolerance.
    """
    mean = f.mean
    scale = max(weighted_norm(f, rho), 1.0)
    if abs(mean) <= SERIES_TOL * scale:
        raise FKHullSingularSeriesError(f"Series average {mean!r} is zero, no reciprocal")
    r = FourierSeries.constant(f.index_set, 1.0 / mean)
    best = math.inf
    for iteration in range(max_iter):
        defect = 1.0 - multiply(f, r)
        error = weighted_norm(defect, rho)
        logger.debug("reciprocal iteration %d defect %.3e", iteration, error)
        if error <= tol:
            return FourierSeries(f.index_set, r.coeffs, f.loss + defect.loss)
        if not math.isfinite(error) or (iteration > 2 and error > best):
            break
        best = min(best, error)
        r = r + multiply(r, defect).without_loss()
    raise FKHullSingularSeriesError(f"Reciprocal did not converge, defect {best:.3e} above {tol:.1e}")


def exp_i_series(
    t: float,
    h: FourierSeries,
    rho: float,
    tol: float = SERIES_TOL,
    max_terms: int = EXP_MAX_TERMS,
    cap: float = EXP_ARGUMENT_CAP,
) -> FourierSeries:
    """Return the partial sum of e^{i t h} = sum_n (i t)^n h^n / n!.

    Terms are added until a term's rho-norm drops below ``tol`` relative to
    the sum.
    """
    one = FourierSeries.constant(h.index_set, 1.0)
    if t == 0.0 or not np.any(h.coeffs):
        return one
    size = abs(t) * weighted_norm(h, rho)
    if size > cap:
        raise FKHullCompositionError(f"|t| |h|_rho = {size:.3e} exceeds the exponential cap {cap}")
    total = one
    term = one
    for n in range(1, max_terms + 1):
        term = multiply(term, h) * (1j * t / n)
        total = total + term
        if weighted_norm(term, rho) <= tol * max(1.0, weighted_norm(total, rho)):
            return total
    raise FKHullCompositionError(f"Exponential series did not converge in {max_terms} terms (|t h| = {size:.3e})")


def compose_shell(
    U: FourierSeries, h: FourierSeries, basis: FrequencyBasis, rho: Optional[float] = None
) -> FourierSeries:
    """Return U(sigma + alpha h(sigma)) as a series.

    Each mode k of U contributes U_k e^{i k . sigma} e^{i (k . alpha) h}, with
    the exponential expanded by :func:`exp_i_series`. Requires
    |h|_rho < iota.
    """
    U._check(h)
    rho = basis.rho if rho is None else rho
    size = weighted_norm(h, rho)
    if size >= basis.iota:
        raise FKHullCompositionError(f"|h|_rho = {size:.3e} is not below the composition margin {basis.iota}")
    alpha_dot = basis.alpha_dot(U.index_set)
    exponentials: Dict[float, FourierSeries] = {}
    result = FourierSeries.zero(U.index_set)
    for position in np.flatnonzero(U.coeffs):
        t = float(alpha_dot[position])
        if t not in exponentials:
            exponentials[t] = exp_i_series(t, h, rho)
        result = result + translate(exponentials[t], U.index_set.vectors[position], complex(U.coeffs[position]))
    return FourierSeries(result.index_set, result.coeffs, result.loss + U.loss)


def evaluate(f: FourierSeries, sigma: Union[FloatArray, Tuple[float, ...]]) -> Union[complex, ComplexArray]:
    """Return sum_k c_k e^{i k . sigma} at one point (shape (N,)) or many (shape (P, N))."""
    points = np.asarray(sigma, dtype=np.float64)
    single = points.ndim == 1
    points = np.atleast_2d(points)
    n = f.index_set.active_count
    if points.shape[1] < n:
        raise FKHullSeriesError(f"Points have {points.shape[1]} coordinates, series needs {n}")
    nonzero = np.flatnonzero(f.coeffs)
    phases = points[:, :n] @ f.index_set.vectors[nonzero].T
    values = np.exp(1j * phases) @ f.coeffs[nonzero]
    return complex(values[0]) if single else values


def interpolation_check(f: FourierSeries, rho: float, delta: float, slack: float = 1e-12) -> bool:
    """Check |f|_rho <= |f|_{rho-delta}^(1/2) |f|_{rho+delta}^(1/2)."""
    if not 0 < delta <= rho:
        raise FKHullSeriesError(f"Need 0 < delta <= rho, got delta={delta}, rho={rho}")
    lhs = weighted_norm(f, rho)
    rhs = math.sqrt(weighted_norm(f, rho - delta) * weighted_norm(f, rho + delta))
    return lhs <= rhs * (1.0 + slack) + np.finfo(float).tiny
