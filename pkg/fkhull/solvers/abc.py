import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..cohomology import DEFAULT_FLOOR, DivisorFloor, floor_hits
from ..diophantine import DiophantineParams, check, divisors
from ..entities.report import (
    ConditionNumbers,
    IterationRecord,
    LinearizedBounds,
    VerificationReport,
)
from ..entities.state import SolverState, StepDiagnostics
from ..exceptions import (
    FKHullCohomologyError,
    FKHullConditionError,
    FKHullDivergenceError,
    FKHullNotConvergedError,
    FKHullSeriesError,
    FKHullSolverError,
)
from ..fourier import (
    FourierSeries,
    FrequencyBasis,
    derive_alpha,
    multiply,
    reciprocal,
    shift_orbit,
    weighted_norm,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveOptions:
    """Stopping rules, caps and tolerances of a quasi-Newton solve."""

    tol: float = 1e-12
    max_iter: int = 40
    # radius given up over the whole run, default rho_0 / 4
    rho_loss: Optional[float] = None
    divergence_floor: float = 1e-9
    n_plus_cap: float = 1e6
    n_minus_cap: float = 1e6
    c_floor: float = 1e-8
    freeze_lambda: bool = False
    floor: DivisorFloor = field(default_factory=lambda: DEFAULT_FLOOR)
    reciprocal_tol: float = 1e-12
    diophantine: Optional[DiophantineParams] = None
    fixed_point_tol: float = 1e-14
    fixed_point_max_iter: int = 200
    # refuse long-range steps whose (N-)^2 T beta is not below 1/2
    enforce_h5: bool = True


@dataclass
class LFactors:
    """l = 1 + d_alpha h with the reciprocals every step needs."""

    l: FourierSeries
    l_back: FourierSeries
    l_inverse: FourierSeries
    twist: FourierSeries

    def condition(self, rho: float) -> ConditionNumbers:
        return ConditionNumbers(
            n_plus=weighted_norm(self.l, rho),
            n_minus=weighted_norm(self.l_inverse, rho),
            c=abs(self.twist.mean),
            l_mean=self.l.mean.real,
        )


def l_factors(h: FourierSeries, basis: FrequencyBasis, tol: float = 1e-12, rho: float = 0.0) -> LFactors:
    """Return l, l o T_{-omega alpha}, 1 / l and 1 / (l l o T_{-omega alpha}).

    Both reciprocals meet |f r - 1|_rho <= tol at the given radius.
    """
    l = 1.0 + derive_alpha(h, basis)
    l_back = shift_orbit(l, basis, -1)
    return LFactors(
        l=l,
        l_back=l_back,
        l_inverse=reciprocal(l, tol, rho),
        twist=reciprocal(multiply(l, l_back), tol, rho),
    )


def condition_numbers(state: SolverState, basis: FrequencyBasis, rho: Optional[float] = None) -> ConditionNumbers:
    """Return N+ = |l|_rho, N- = |1/l|_rho and c = |<1/(l l o T_{-omega alpha})>|."""
    rho = state.rho_n if rho is None else rho
    return l_factors(state.h, basis, rho=rho).condition(rho)


def radius_schedule(rho0: float, n: int, rho_loss: Optional[float] = None) -> float:
    """Return rho_n = rho_{n-1} - rho_loss 2^{-n} with rho_loss = rho_0 / 4 by default."""
    rho_loss = rho0 / 4 if rho_loss is None else rho_loss
    return rho0 - rho_loss * (1.0 - 2.0**-n)


class QuasiNewtonSolver(ABC):
    """Base class for quasi-Newton hull solvers.

    Subclasses provide the residual and one step; the iteration with its
    radius schedule, divergence and stagnation detection and the final
    report are shared.

    Example:
    >>> class Solver(QuasiNewtonSolver):
    ...     kind = "short"
    ...     def residual_series(self, state): ...
    ...     def step(self, state, rho_next): ...
    ...
    >>> final, report = Solver(basis, options).solve(initial)
    """

    kind: str = "abstract"

    def __init__(self, basis: FrequencyBasis, options: Optional[SolveOptions] = None) -> None:
        self.basis = basis
        self.options = SolveOptions() if options is None else options

    @abstractmethod
    def residual_series(self, state: SolverState) -> FourierSeries:
        """Return the residual series of the equilibrium equation at the state."""
        pass

    @abstractmethod
    def step(self, state: SolverState, rho_next: float) -> Tuple[SolverState, StepDiagnostics]:
        """Return the state after one quasi-Newton step, at radius rho_next."""
        pass

    def bounds(self, state: SolverState) -> Optional[LinearizedBounds]:
        """Return bounds of the linearized operator, if the model has any."""
        return None

    def evaluate(self, state: SolverState) -> SolverState:
        """Return the state with its residual series and norm filled in."""
        if state.residual is not None:
            return state
        e = self.residual_series(state)
        return state.replace(residual=e, eps_n=weighted_norm(e, state.rho_n))

    def _check_caps(self, state: SolverState, condition: ConditionNumbers) -> None:
        options = self.options
        if condition.n_plus > options.n_plus_cap or condition.n_minus > options.n_minus_cap:
            raise FKHullConditionError(
                f"Condition numbers N+={condition.n_plus:.3e}, N-={condition.n_minus:.3e} exceed caps", state
            )
        if condition.c < options.c_floor:
            raise FKHullConditionError(f"Twist average c={condition.c:.3e} below {options.c_floor:.1e}", state)

    def solve(self, initial: SolverState) -> Tuple[SolverState, VerificationReport]:
        """Iterate steps from the initial state until the residual is below tolerance.

        Raises :class:`FKHullDivergenceError` when the residual grows twice in
        a row above the divergence floor or a step breaks down, and
        :class:`FKHullNotConvergedError` when the iteration stops above
        tolerance.
        """
        options = self.options
        h_scale = max(1.0, weighted_norm(initial.h, 0.0))
        if abs(initial.h.mean) > 1e-12 * h_scale:
            raise FKHullSolverError(f"Initial hull has average {initial.h.mean:.3e}, expected 0", initial)
        rho0 = initial.rho_n
        try:
            state = self.evaluate(initial.replace(iteration=0))
        except (FKHullSeriesError, FKHullCohomologyError) as err:
            raise FKHullDivergenceError(f"Initial residual could not be evaluated: {err}", initial) from err
        eps0 = state.eps_n
        history: List[IterationRecord] = [
            IterationRecord(iteration=0, rho=rho0, eps=eps0, lam=state.lam),
        ]
        logger.info("%s solve: eps_0=%.3e at rho=%.4g", self.kind, eps0, rho0)

        increases = 0
        non_decreases = 0
        converged = state.eps_n <= options.tol
        while not converged:
            n = state.iteration + 1
            if n > options.max_iter:
                break
            rho_next = radius_schedule(rho0, n, options.rho_loss)
            try:
                new_state, diagnostics = self.step(state, rho_next)
                new_state = self.evaluate(new_state.replace(iteration=n))
            except (FKHullSeriesError, FKHullCohomologyError) as err:
                raise FKHullDivergenceError(f"Iteration {n} broke down: {err}", state) from err
            self._check_caps(state, diagnostics.condition)
            history.append(
                IterationRecord(
                    iteration=n,
                    rho=rho_next,
                    eps=new_state.eps_n,
                    delta_norm=diagnostics.delta_norm,
                    lam=new_state.lam,
                    n_plus=diagnostics.condition.n_plus,
                    n_minus=diagnostics.condition.n_minus,
                    c=diagnostics.condition.c,
                    truncation_loss=diagnostics.truncation_loss,
                )
            )
            logger.debug(
                "%s iteration %d: rho=%.4g eps=%.3e |Delta|=%.3e lambda=%.6g",
                self.kind,
                n,
                rho_next,
                new_state.eps_n,
                diagnostics.delta_norm,
                new_state.lam,
            )
            if not math.isfinite(new_state.eps_n):
                raise FKHullDivergenceError(f"Residual is not finite at iteration {n}", state)
            if new_state.eps_n > state.eps_n and new_state.eps_n > options.divergence_floor:
                increases += 1
                if increases >= 2:
                    raise FKHullDivergenceError(
                        f"Residual grew twice in a row to {new_state.eps_n:.3e} at iteration {n}", new_state
                    )
            else:
                increases = 0
            non_decreases = non_decreases + 1 if new_state.eps_n >= state.eps_n else 0
            state = new_state
            converged = state.eps_n <= options.tol
            if not converged and non_decreases >= 2:
                logger.warning("%s solve stagnated at eps=%.3e after %d iterations", self.kind, state.eps_n, n)
                break

        if not converged:
            raise FKHullNotConvergedError(
                f"{self.kind} solve stopped at eps={state.eps_n:.3e} > tol={options.tol:.1e} "
                f"after {state.iteration} iterations",
                state,
            )
        logger.info("%s solve converged: eps=%.3e after %d iterations", self.kind, state.eps_n, state.iteration)
        return state, self.report(initial, state, eps0, history, rho0)

    def report(
        self,
        initial: SolverState,
        final: SolverState,
        eps0: float,
        history: List[IterationRecord],
        rho0: float,
        converged: bool = True,
    ) -> VerificationReport:
        """Return the a-posteriori report of a final state."""
        final = self.evaluate(final)
        index_set = final.h.index_set
        options = self.options
        condition = l_factors(final.h, self.basis, options.reciprocal_tol, final.rho_n).condition(final.rho_n)
        h_shift = weighted_norm(final.h - initial.h, rho0 / 2)
        lam_shift = abs(final.lam - initial.lam)
        values = divisors(self.basis.omega, self.basis.alpha_array(index_set.active_count), index_set)
        values[index_set.zero_position] = np.inf
        diophantine = None
        if options.diophantine is not None:
            diophantine = check(
                options.diophantine, self.basis.omega, self.basis.alpha_array(index_set.active_count), index_set
            )
        hull_norm = weighted_norm(final.h, final.rho_n)
        assert final.residual is not None
        return VerificationReport(
            kind=self.kind,
            converged=converged,
            iterations=final.iteration,
            tol=options.tol,
            residual=final.eps_n,
            rho_final=final.rho_n,
            residual_half=weighted_norm(final.residual, rho0 / 2),
            eps0=eps0,
            lam=final.lam,
            lam_shift=lam_shift,
            h_shift=h_shift,
            c1_ratio=h_shift / eps0 if eps0 > 0 else None,
            c2_ratio=lam_shift / eps0 if eps0 > 0 else None,
            condition=condition,
            n_plus_cap=options.n_plus_cap,
            n_minus_cap=options.n_minus_cap,
            c_floor=options.c_floor,
            diophantine=diophantine,
            min_divisor=float(values.min()) if len(index_set) > 1 else 0.0,
            divisor_floor_hits=floor_hits(self.basis, index_set, options.floor),
            truncation_loss=sum(record.truncation_loss for record in history),
            hull_norm=hull_norm,
            margin=self.basis.iota - hull_norm,
            linearized=self.bounds(final),
            history=history,
        )

    def verify(self, state: SolverState) -> VerificationReport:
        """Return the report of a given hull without iterating."""
        state = self.evaluate(state)
        return self.report(
            initial=state,
            final=state,
            eps0=state.eps_n,
            history=[],
            rho0=state.rho_n,
            converged=state.eps_n <= self.options.tol,
        )
