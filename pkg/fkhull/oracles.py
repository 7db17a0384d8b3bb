"""Brute-force solvers used to check the quasi-Newton results.

* :func:`oracle_dense_newton` runs plain Newton on the truncated coefficient
  system with the full Jacobian.
* :func:`oracle_finite_chain` solves a periodic chain of q particles for a
  rational rotation number 2 pi p / q, without any Fourier series.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .entities.state import SolverState
from .exceptions import FKHullOracleError
from .fourier import FourierSeries, FrequencyBasis, compose_shell, derive_alpha, evaluate, real_projection
from .index_space import IndexSet, MultiIndex
from .solvers.short_range import ShortRangeModel, residual

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

DENSE_UNKNOWN_CAP = 4001


@dataclass(frozen=True)
class CosinePotential:
    """V(u) = sum_m a_m cos(m u) + b_m sin(m u) over integer wavenumbers m >= 1."""

    terms: Tuple[Tuple[int, float, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple((int(m), float(a), float(b)) for m, a, b in self.terms))
        if any(m < 1 for m, _, _ in self.terms):
            raise FKHullOracleError("Cosine potential wavenumbers must be >= 1")

    @classmethod
    def from_shell(cls, shell_U: FourierSeries, basis: FrequencyBasis) -> "CosinePotential":
        """Return the potential whose derivative is the one-frequency force shell U."""
        if shell_U.index_set.active_count != 1 or basis.alpha[0] != 1.0:
            raise FKHullOracleError("Chain potentials need a single frequency with alpha = 1")
        if abs(shell_U.mean) > 1e-14:
            raise FKHullOracleError(f"Force shell with average {shell_U.mean:.3e} has no periodic potential")
        terms = []
        for k, value in shell_U.modes().items():
            m = k[1]
            if m <= 0:
                continue
            # U = A cos(m u) + B sin(m u) from c_m e^{imu} + conj(c_m) e^{-imu}
            A, B = 2.0 * value.real, -2.0 * value.imag
            terms.append((m, -B / m, A / m))
        return cls(tuple(sorted(terms)))

    def value(self, u: FloatArray) -> FloatArray:
        u = np.asarray(u, dtype=np.float64)
        return sum((a * np.cos(m * u) + b * np.sin(m * u) for m, a, b in self.terms), np.zeros_like(u))

    def force(self, u: FloatArray) -> FloatArray:
        """Return V'(u)."""
        u = np.asarray(u, dtype=np.float64)
        return sum((m * (b * np.cos(m * u) - a * np.sin(m * u)) for m, a, b in self.terms), np.zeros_like(u))

    def curvature(self, u: FloatArray) -> FloatArray:
        """Return V''(u)."""
        u = np.asarray(u, dtype=np.float64)
        return sum((-m * m * (a * np.cos(m * u) + b * np.sin(m * u)) for m, a, b in self.terms), np.zeros_like(u))

    def force_shell(self, index_set: IndexSet) -> FourierSeries:
        """Return V' as a series over a one-frequency index set."""
        total = FourierSeries.zero(index_set)
        for m, a, b in self.terms:
            k = MultiIndex.unit(1, m)
            total = total + FourierSeries.cos_mode(index_set, k, b * m) + FourierSeries.sin_mode(index_set, k, -a * m)
        return total


def _convolution_matrix(g: FourierSeries) -> npt.NDArray[np.complex128]:
    """Return the matrix of x -> P(g x) on coefficient vectors."""
    index_set = g.index_set
    keys = index_set.keys
    difference = (keys[:, None] - keys[None, :] + index_set.zero_key).ravel()
    positions = index_set.lookup(difference).reshape(len(index_set), len(index_set))
    return np.where(positions >= 0, g.coeffs[np.maximum(positions, 0)], 0.0)


def oracle_dense_newton(
    model: ShortRangeModel,
    index_set: Optional[IndexSet] = None,
    tol: float = 1e-13,
    max_iter: int = 40,
    unknown_cap: int = DENSE_UNKNOWN_CAP,
) -> Tuple[FourierSeries, float]:
    """Solve e[h, lambda] = 0 with <h> = 0 by Newton with the full Jacobian.

    Unknowns are the real and imaginary parts of one coefficient of each
    pair (k, -k) plus lambda; equations are the matching parts of e.
    Returns (h, lambda) once max_k |e_k| <= tol.
    """
    if index_set is not None and index_set != model.index_set:
        model = ShortRangeModel(FourierSeries.from_modes(index_set, model.shell_U.modes()), model.basis)
    index_set = model.index_set
    basis = model.basis
    size = len(index_set)
    if size > unknown_cap:
        raise FKHullOracleError(f"Dense oracle needs {size} unknowns, cap is {unknown_cap}")

    positions = np.arange(size)
    half = positions[positions < index_set.neg_positions]
    mirror = index_set.neg_positions[half]
    zero = index_set.zero_position
    count = half.size

    # coefficient change per real unknown (a_j, b_j): c_k = a + i b, c_{-k} = a - i b
    A = np.zeros((size, 2 * count + 1), dtype=np.complex128)
    A[half, np.arange(count)] = 1.0
    A[mirror, np.arange(count)] = 1.0
    A[half, count + np.arange(count)] = 1j
    A[mirror, count + np.arange(count)] = -1j
    A[zero, 2 * count] = 1.0

    second_difference = 2.0 * np.cos(basis.phases(index_set)) - 2.0
    force_slope = derive_alpha(model.shell_U, basis)

    def real_rows(values: npt.NDArray[np.complex128]) -> FloatArray:
        return np.concatenate([values[[zero]].real, values[half].real, values[half].imag])

    h = FourierSeries.zero(index_set)
    lam = 0.0
    previous = math.inf
    for iteration in range(max_iter + 1):
        e = residual(SolverState(h=h, rho_n=basis.rho, lam=lam), model)
        error = float(np.abs(e.coeffs).max())
        logger.debug("dense Newton iteration %d: max |e_k| = %.3e", iteration, error)
        if error <= tol:
            return h, lam
        if not math.isfinite(error) or (iteration > 3 and error > previous):
            raise FKHullOracleError(f"Dense Newton diverged at iteration {iteration}: max |e_k| = {error:.3e}")
        previous = error

        g = compose_shell(force_slope, h, basis)
        jacobian = np.diag(second_difference.astype(np.complex128)) + _convolution_matrix(g)
        jacobian = np.column_stack([jacobian @ A[:, :-1], A[:, -1]])
        real_jacobian = np.vstack([jacobian[[zero]].real, jacobian[half].real, jacobian[half].imag])
        try:
            step = scipy.linalg.solve(real_jacobian, -real_rows(e.coeffs))
        except (scipy.linalg.LinAlgError, ValueError) as err:
            raise FKHullOracleError(f"Dense Newton Jacobian is singular: {err}") from err
        h = real_projection(FourierSeries(index_set, h.coeffs + A[:, :-1] @ step[:-1])).without_mean()
        lam += float(step[-1])
    raise FKHullOracleError(f"Dense Newton did not reach {tol:.1e} in {max_iter} iterations")


def oracle_finite_chain(
    potential: CosinePotential,
    p: int,
    q: int,
    tol: float = 1e-12,
    max_iter: int = 50,
    initial: Optional[FloatArray] = None,
) -> FloatArray:
    """Return a periodic equilibrium u_0..u_{q-1} with u_{n+q} = u_n + 2 pi p.

    Solves u_{n+1} + u_{n-1} - 2 u_n + V'(u_n) + lambda = 0 together with
    sum_n (u_n - 2 pi p n / q) = 0, which fixes the phase; lambda takes up
    the pinning force and stays tiny near an invariant circle.
    """
    if q < 1 or math.gcd(p, q) != 1:
        raise FKHullOracleError(f"Need q >= 1 and gcd(p, q) = 1, got p={p}, q={q}")
    n = np.arange(q)
    rotation = 2.0 * math.pi * p
    u = 2.0 * math.pi * p * n / q if initial is None else np.array(initial, dtype=np.float64)
    if u.shape != (q,):
        raise FKHullOracleError(f"Initial chain has shape {u.shape}, expected ({q},)")
    lam = 0.0

    after = (n + 1) % q
    before = (n - 1) % q
    wrap_after = np.where(n == q - 1, rotation, 0.0)
    wrap_before = np.where(n == 0, -rotation, 0.0)
    rows = np.concatenate([n, n, n, n, np.full(q, q), [q]])
    cols = np.concatenate([n, after, before, np.full(q, q), n, [q]])

    previous = math.inf
    for iteration in range(max_iter + 1):
        F = np.empty(q + 1)
        F[:q] = u[after] + wrap_after + u[before] + wrap_before - 2.0 * u + potential.force(u) + lam
        F[q] = np.sum(u - 2.0 * math.pi * p * n / q) / q
        error = float(np.abs(F).max())
        logger.debug("finite chain iteration %d: max |F| = %.3e", iteration, error)
        if error <= tol:
            logger.debug("finite chain p/q=%d/%d converged with lambda=%.3e", p, q, lam)
            return u
        if not math.isfinite(error) or (iteration > 3 and error > previous):
            raise FKHullOracleError(f"Finite chain Newton diverged at iteration {iteration}: max |F| = {error:.3e}")
        previous = error
        data = np.concatenate(
            [-2.0 + potential.curvature(u), np.ones(q), np.ones(q), np.ones(q), np.full(q, 1.0 / q), [0.0]]
        )
        # coo_matrix sums duplicates, which covers q <= 2
        jacobian = scipy.sparse.coo_matrix((data, (rows, cols)), shape=(q + 1, q + 1)).tocsc()
        step = scipy.sparse.linalg.spsolve(jacobian, -F)
        if not np.all(np.isfinite(step)):
            raise FKHullOracleError(f"Finite chain Jacobian is singular at iteration {iteration}")
        u = u + step[:q]
        lam += float(step[q])
    raise FKHullOracleError(f"Finite chain Newton did not reach {tol:.1e} in {max_iter} iterations")


def compare_chain(h: FourierSeries, chain: FloatArray, p: int) -> FloatArray:
    """Return rows (n, u_chain, u_hull, diff) with u_hull = theta_n + h(theta_n), theta_n = 2 pi p n / q."""
    q = chain.shape[0]
    n = np.arange(q)
    theta = 2.0 * math.pi * p * n / q
    u_hull = theta + np.real(evaluate(h, theta[:, None]))
    return np.column_stack([n, chain, u_hull, chain - u_hull])
