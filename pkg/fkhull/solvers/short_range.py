"""Nearest-neighbour chains: u_{n+1} + u_{n-1} - 2 u_n + U(u_n alpha) + lambda = 0.

With u_n = n omega + h(n omega alpha) the equation becomes the torus residual

    e(sigma) = h(sigma + omega alpha) + h(sigma - omega alpha) - 2 h(sigma) + U(sigma + alpha h(sigma)) + lambda

solved for a zero-average h and a counterterm lambda by the quasi-Newton
step, which reduces every correction to two constant-coefficient
difference equations.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt

from ..cohomology import solve_S
from ..entities.report import UniquenessReport, VanishingReport, VerificationReport
from ..entities.state import SolverState, StepDiagnostics
from ..exceptions import FKHullCompositionError, FKHullSeriesError, FKHullSolverError
from ..fourier import (
    FourierSeries,
    FrequencyBasis,
    compose_shell,
    derive_alpha,
    evaluate,
    multiply,
    real_projection,
    shift_orbit,
    weighted_norm,
)
from ..index_space import IndexSet
from .abc import QuasiNewtonSolver, SolveOptions, l_factors

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShortRangeModel:
    """Force shell U on the torus, optionally declared as U = d_alpha V."""

    shell_U: FourierSeries
    basis: FrequencyBasis
    shell_V: Optional[FourierSeries] = None

    def __post_init__(self) -> None:
        if self.shell_V is not None:
            mismatch = weighted_norm(derive_alpha(self.shell_V, self.basis) - self.shell_U, self.basis.rho)
            if mismatch > 1e-12 * max(1.0, weighted_norm(self.shell_U, self.basis.rho)):
                raise FKHullSeriesError(f"shell_U differs from d_alpha shell_V by {mismatch:.3e}")

    @classmethod
    def from_potential(cls, shell_V: FourierSeries, basis: FrequencyBasis) -> "ShortRangeModel":
        """Return the gradient model U = d_alpha V."""
        return cls(shell_U=derive_alpha(shell_V, basis), basis=basis, shell_V=shell_V)

    @property
    def index_set(self) -> IndexSet:
        return self.shell_U.index_set

    @property
    def is_gradient(self) -> bool:
        return self.shell_V is not None or not np.any(self.shell_U.coeffs)


def residual(state: SolverState, model: ShortRangeModel) -> FourierSeries:
    """Return e = h o T_{omega alpha} + h o T_{-omega alpha} - 2 h + U o (id + alpha h) + lambda."""
    h = state.h
    basis = model.basis
    second_difference = shift_orbit(h, basis, 1) + shift_orbit(h, basis, -1) - 2.0 * h
    return second_difference + compose_shell(model.shell_U, h, basis, rho=state.rho_n) + state.lam


def newton_step(
    state: SolverState, model: ShortRangeModel, rho_next: float, options: Optional[SolveOptions] = None
) -> Tuple[SolverState, StepDiagnostics]:
    """Return the state after one quasi-Newton step.

    With l = 1 + d_alpha h and q = 1 / (l l o T_{-omega alpha}):

    1. delta = -<l e>
    2. S_1 W0 = l (e + delta)
    3. W_bar = -<W0 q> / <q>
    4. S_{-1} beta = (W0 + W_bar) q
    5. beta_bar = -<beta l>
    6. Delta = (beta + beta_bar) l
    """
    options = SolveOptions() if options is None else options
    basis = model.basis
    e = state.residual if state.residual is not None else residual(state, model)
    factors = l_factors(state.h, basis, options.reciprocal_tol, state.rho_n)
    l, q = factors.l, factors.twist

    delta = 0.0 if options.freeze_lambda else -multiply(l, e).mean.real
    w0 = solve_S(1, multiply(l, e + delta), basis, options.floor)
    w_bar = -multiply(w0, q).mean / q.mean
    beta = solve_S(-1, multiply(w0 + w_bar, q), basis, options.floor)
    beta_bar = -multiply(beta, l).mean
    correction = real_projection(multiply(beta + beta_bar, l)).without_mean()

    h_next = (state.h + correction.without_loss()).without_mean().without_loss()
    size = weighted_norm(h_next, rho_next)
    if size >= basis.iota:
        raise FKHullCompositionError(f"|h + Delta|_rho = {size:.3e} leaves the composition margin {basis.iota}")

    diagnostics = StepDiagnostics(
        eps=weighted_norm(e, state.rho_n),
        delta_norm=weighted_norm(correction, rho_next),
        delta_lambda=delta,
        rho=state.rho_n,
        rho_next=rho_next,
        truncation_loss=correction.loss.at(rho_next) + e.loss.at(state.rho_n),
        condition=factors.condition(state.rho_n),
        w_bar=complex(w_bar),
    )
    new_state = SolverState(h=h_next, rho_n=rho_next, lam=state.lam + delta, iteration=state.iteration + 1)
    return new_state, diagnostics


class ShortRangeSolver(QuasiNewtonSolver):
    kind = "short"

    def __init__(self, model: ShortRangeModel, options: Optional[SolveOptions] = None) -> None:
        super().__init__(model.basis, options)
        self.model = model

    def residual_series(self, state: SolverState) -> FourierSeries:
        return residual(state, self.model)

    def step(self, state: SolverState, rho_next: float) -> Tuple[SolverState, StepDiagnostics]:
        return newton_step(state, self.model, rho_next, self.options)


def solve(
    model: ShortRangeModel, initial: Optional[SolverState] = None, options: Optional[SolveOptions] = None
) -> Tuple[SolverState, VerificationReport]:
    """Run the quasi-Newton iteration; ``initial`` defaults to h = 0, lambda = 0 at rho."""
    if initial is None:
        initial = SolverState.initial(model.index_set, model.basis.rho)
    return ShortRangeSolver(model, options).solve(initial)


def vanishing_check(model: ShortRangeModel, final: SolverState, tol: float = 1e-10) -> VanishingReport:
    """Report whether the counterterm vanishes, as it must for gradient forces."""
    report = VanishingReport(applicable=model.is_gradient, lam=final.lam, tol=tol)
    if report.applicable and not report.passed:
        logger.warning("Counterterm lambda=%.3e does not vanish for a gradient model", final.lam)
    return report


def random_perturbation(
    index_set: IndexSet, rho: float, scale: float, rng: np.random.Generator, radius: float = 4.0
) -> FourierSeries:
    """Return a real zero-average series on low modes with |p|_rho = scale."""
    if scale == 0.0:
        return FourierSeries.zero(index_set)
    low = index_set.weights <= min(radius, index_set.radius)
    coeffs = np.where(low, rng.normal(size=len(index_set)) + 1j * rng.normal(size=len(index_set)), 0.0)
    p = real_projection(FourierSeries(index_set, coeffs)).without_mean()
    size = weighted_norm(p, rho)
    return p * (scale / size) if size > 0 else p


def uniqueness_probe(
    model: ShortRangeModel,
    final: SolverState,
    perturbation_scale: float,
    options: Optional[SolveOptions] = None,
    seed: int = 0,
) -> UniquenessReport:
    """Solve again from final.h plus a random zero-average perturbation and compare."""
    options = SolveOptions() if options is None else options
    rng = np.random.default_rng(seed)
    p = random_perturbation(final.h.index_set, final.rho_n, perturbation_scale, rng)
    start = SolverState(h=final.h + p, rho_n=final.rho_n, lam=final.lam)
    try:
        other, _ = ShortRangeSolver(model, options).solve(start)
    except FKHullSolverError as err:
        logger.warning("Uniqueness probe at scale %.1e did not converge: %s", perturbation_scale, err)
        return UniquenessReport(
            scale=perturbation_scale,
            converged=False,
            distance=float("inf"),
            lambda_distance=float("inf"),
            tol=10 * options.tol,
        )
    report = UniquenessReport(
        scale=perturbation_scale,
        converged=True,
        distance=other.h.sup_distance(final.h),
        lambda_distance=abs(other.lam - final.lam),
        tol=10 * options.tol,
    )
    if not report.agree:
        logger.warning("Uniqueness probe at scale %.1e reached a different solution", perturbation_scale)
    return report


def orbit(state: SolverState, basis: FrequencyBasis, m: npt.NDArray[np.int64]) -> npt.NDArray[np.float64]:
    """Return u_m = m omega + h(m omega alpha)."""
    n = state.h.index_set.active_count
    points = np.outer(m * basis.omega, basis.alpha_array(n))
    return m * basis.omega + np.real(evaluate(state.h, points))


def orbit_residual(model: ShortRangeModel, state: SolverState, m_max: int = 500) -> npt.NDArray[np.float64]:
    """Return u_{m+1} + u_{m-1} - 2 u_m + U(u_m alpha) + lambda for |m| <= m_max."""
    basis = model.basis
    n = model.index_set.active_count
    m = np.arange(-m_max - 1, m_max + 2)
    u = orbit(state, basis, m)
    force = np.real(evaluate(model.shell_U, np.outer(u[1:-1], basis.alpha_array(n))))
    return u[2:] + u[:-2] - 2.0 * u[1:-1] + force + state.lam

