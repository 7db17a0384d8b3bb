"""Chains with interactions of range 0..L_max.

The energy is sum_i sum_L H_L(u_i, ..., u_{i+L}) where each H_L is a finite
trigonometric sum in the torus points alpha u_{i+j}, plus an optional
harmonic coupling kappa/2 (u_{i+L} - u_i)^2. For u_n = n omega + h(n omega alpha)
the equilibrium residual on the torus is

    E[h](sigma) = sum_L sum_{m=0..L} (d_m H_L)(slots at shift m)

where slot j at shift m sits at sigma + (j - m) omega alpha + alpha h(sigma + (j - m) omega alpha).

Setting Delta = l eta turns the Newton equation into
S_1 W = l E and (C_011 + G) S_{-1} eta = W + W_bar, with G the sum over
L >= 2 of L^+_{k-j} C_{j,k,L} R^-_{j-k}. The second equation is inverted by a
fixed-point iteration.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..cohomology import DEFAULT_FLOOR, DivisorFloor, apply_L, apply_R, solve_S
from ..entities.report import LinearizedBounds, VerificationReport
from ..entities.state import SolverState, StepDiagnostics
from ..exceptions import (
    FKHullCompositionError,
    FKHullLinearizedSolveError,
    FKHullSeriesError,
    FKHullSingularSeriesError,
)
from ..fourier import (
    FourierSeries,
    FrequencyBasis,
    derive_alpha,
    exp_i_series,
    multiply,
    real_projection,
    reciprocal,
    shift_orbit,
    translate,
    weighted_norm,
)
from ..index_space import IndexSet, IntArray, MultiIndex, norm_1, norm_s
from .abc import QuasiNewtonSolver, SolveOptions, l_factors
from .short_range import ShortRangeModel

logger = logging.getLogger(__name__)

ModeTuple = Tuple[MultiIndex, ...]


@dataclass(frozen=True, eq=False)
class InteractionTerm:
    """Interaction of range L: trigonometric coefficients over (L+1) slots and a harmonic stiffness.

    ``coeffs`` maps a tuple (k_0, ..., k_L) of multi-indices to the coefficient
    of exp(i sum_j k_j . sigma_j). ``stiffness`` kappa adds kappa/2 (u_L - u_0)^2.
    """

    L: int
    coeffs: Mapping[ModeTuple, complex] = field(default_factory=dict)
    stiffness: float = 0.0

    def __post_init__(self) -> None:
        if self.L < 0:
            raise FKHullSeriesError(f"Interaction range must be >= 0, got {self.L}")
        if self.stiffness != 0.0 and self.L == 0:
            raise FKHullSeriesError("A harmonic coupling needs range L >= 1")
        cleaned: Dict[ModeTuple, complex] = {}
        for modes, value in self.coeffs.items():
            if len(modes) != self.L + 1:
                raise FKHullSeriesError(f"Range {self.L} term needs {self.L + 1} slots, got {len(modes)}")
            if value != 0:
                cleaned[tuple(modes)] = cleaned.get(tuple(modes), 0j) + complex(value)
        for modes, value in cleaned.items():
            mirror = cleaned.get(tuple(-k for k in modes), 0j)
            if abs(mirror - np.conj(value)) > 1e-12 * max(1.0, abs(value)):
                raise FKHullSeriesError(f"Range {self.L} term is not real at modes {[str(k) for k in modes]}")
        object.__setattr__(self, "coeffs", cleaned)

    @classmethod
    def cosine(cls, modes: Sequence[MultiIndex], amplitude: float) -> "InteractionTerm":
        """Return amplitude * cos(sum_j k_j . sigma_j) with len(modes) = L + 1 slots."""
        modes = tuple(modes)
        if not any(modes):
            return cls(len(modes) - 1, {modes: amplitude})
        return cls(len(modes) - 1, {modes: amplitude / 2, tuple(-k for k in modes): amplitude / 2})

    @classmethod
    def elastic(cls, L: int, kappa: float) -> "InteractionTerm":
        return cls(L, {}, stiffness=kappa)

    @classmethod
    def from_shell(cls, shell: FourierSeries) -> "InteractionTerm":
        """Return the on-site term H_0 = shell."""
        return cls(0, {(k,): value for k, value in shell.modes().items()})

    def scaled(self, factor: float) -> "InteractionTerm":
        return InteractionTerm(
            self.L, {modes: value * factor for modes, value in self.coeffs.items()}, self.stiffness * factor
        )

    def merged(self, other: "InteractionTerm") -> "InteractionTerm":
        if other.L != self.L:
            raise FKHullSeriesError(f"Cannot merge ranges {self.L} and {other.L}")
        coeffs = dict(self.coeffs)
        for modes, value in other.coeffs.items():
            coeffs[modes] = coeffs.get(modes, 0j) + value
        return InteractionTerm(self.L, coeffs, self.stiffness + other.stiffness)

    def decay(self, rho: float, s: float) -> float:
        """Return M_L = max_{i <= 3} of the rho-weighted i-th derivative norm proxy."""
        levels = [0.0, 0.0, 2.0 * abs(self.stiffness), 0.0]
        for modes, value in self.coeffs.items():
            order = sum(norm_1(k) for k in modes)
            weight = abs(value) * math.exp(rho * sum(norm_s(k, s) for k in modes))
            for i in range(4):
                levels[i] += weight * order**i
        return max(levels)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs and self.stiffness == 0.0


@dataclass(frozen=True)
class _Mode:
    vectors: Tuple[IntArray, ...]
    total: IntArray
    t: Tuple[float, ...]
    value: complex


@dataclass(eq=False)
class LongRangeModel:
    """Interaction terms over a shared index set and frequency basis."""

    interactions: List[InteractionTerm]
    basis: FrequencyBasis
    index_set: IndexSet
    _compiled: Dict[int, List[_Mode]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        by_range: Dict[int, InteractionTerm] = {}
        for term in self.interactions:
            by_range[term.L] = by_range[term.L].merged(term) if term.L in by_range else term
        self.interactions = [by_range[L] for L in sorted(by_range)]
        n = self.index_set.active_count
        alpha = self.basis.alpha_array(n)
        self._compiled = {}
        for term in self.interactions:
            modes = []
            for key, value in term.coeffs.items():
                vectors = tuple(k.dense(n) for k in key)
                modes.append(
                    _Mode(
                        vectors=vectors,
                        total=np.sum(vectors, axis=0),
                        t=tuple(float(v @ alpha) for v in vectors),
                        value=value,
                    )
                )
            self._compiled[term.L] = modes

    @classmethod
    def from_short_range(cls, model: ShortRangeModel) -> "LongRangeModel":
        """Return H_0 = V, H_1 = -(u_1 - u_0)^2 / 2, whose residual equals the short-range one at lambda = 0."""
        shell_V = model.shell_V if model.shell_V is not None else potential_of(model.shell_U, model.basis)
        return cls(
            interactions=[InteractionTerm.from_shell(shell_V), InteractionTerm.elastic(1, -1.0)],
            basis=model.basis,
            index_set=model.index_set,
        )

    @property
    def L_max(self) -> int:
        return max((term.L for term in self.interactions), default=0)

    def term(self, L: int) -> Optional[InteractionTerm]:
        for term in self.interactions:
            if term.L == L:
                return term
        return None

    def modes(self, L: int) -> List[_Mode]:
        return self._compiled.get(L, [])

    def decay(self, rho: float) -> Dict[int, float]:
        """Return M_L per range."""
        return {term.L: term.decay(rho, self.basis.s) for term in self.interactions}

    def beta(self, rho: float) -> float:
        """Return sum_{L >= 2} M_L L^4, the combinatorial constant taken as 1."""
        return sum(M * L**4 for L, M in self.decay(rho).items() if L >= 2)


def potential_of(shell_U: FourierSeries, basis: FrequencyBasis) -> FourierSeries:
    """Return the zero-average V with d_alpha V = U; U must have zero average."""
    if abs(shell_U.mean) > 1e-14 * max(1.0, weighted_norm(shell_U, 0.0)):
        raise FKHullSeriesError(f"Force shell with average {shell_U.mean:.3e} has no potential")
    alpha_dot = basis.alpha_dot(shell_U.index_set)
    nonzero = alpha_dot != 0
    coeffs = np.zeros(len(shell_U), dtype=np.complex128)
    coeffs[nonzero] = shell_U.coeffs[nonzero] / (1j * alpha_dot[nonzero])
    return FourierSeries(shell_U.index_set, coeffs)


class _Evaluation:
    """Caches exp(i t h) and its orbit shifts for one hull h."""

    def __init__(self, model: LongRangeModel, h: FourierSeries, rho: float) -> None:
        size = weighted_norm(h, rho)
        if size >= model.basis.iota:
            raise FKHullCompositionError(
                f"|h|_rho = {size:.3e} is not below the composition margin {model.basis.iota}"
            )
        self.model = model
        self.h = h
        self.rho = rho
        self._exp: Dict[float, FourierSeries] = {}
        self._shifted: Dict[Tuple[float, int], FourierSeries] = {}
        self._h_shifted: Dict[int, FourierSeries] = {}

    def exp(self, t: float, shift: int) -> FourierSeries:
        key = (t, shift)
        if key not in self._shifted:
            if t not in self._exp:
                self._exp[t] = exp_i_series(t, self.h, self.rho)
            self._shifted[key] = shift_orbit(self._exp[t], self.model.basis, shift) if shift else self._exp[t]
        return self._shifted[key]

    def h_at(self, shift: int) -> FourierSeries:
        if shift not in self._h_shifted:
            self._h_shifted[shift] = shift_orbit(self.h, self.model.basis, shift) if shift else self.h
        return self._h_shifted[shift]

    def gap(self, L: int, m: int) -> FourierSeries:
        """Return u_{L} - u_{0} of the slots at shift m."""
        return self.h_at(L - m) - self.h_at(-m) + L * self.model.basis.omega

    def term(self, term: InteractionTerm, m: int, slots: Tuple[int, ...] = ()) -> FourierSeries:
        """Return the slot derivative of H_L along alpha in the given slots, with slots at shift m."""
        index_set = self.model.index_set
        omega = self.model.basis.omega
        result = FourierSeries.zero(index_set)
        for mode in self.model.modes(term.L):
            factor = mode.value
            for slot in slots:
                factor *= 1j * mode.t[slot]
            if factor == 0:
                continue
            factor *= np.exp(1j * omega * sum((j - m) * t for j, t in enumerate(mode.t)))
            product: Optional[FourierSeries] = None
            for j, t in enumerate(mode.t):
                if t == 0.0:
                    continue
                factor_series = self.exp(t, j - m)
                product = factor_series if product is None else multiply(product, factor_series)
            if product is None:
                product = FourierSeries.constant(index_set, 1.0)
            result = result + translate(product, mode.total, factor)
        if term.stiffness != 0.0:
            result = result + self._elastic(term, m, slots)
        return result

    def _elastic(self, term: InteractionTerm, m: int, slots: Tuple[int, ...]) -> FourierSeries:
        kappa, L = term.stiffness, term.L
        index_set = self.model.index_set
        if not slots:
            gap = self.gap(L, m)
            return 0.5 * kappa * multiply(gap, gap)
        if any(slot not in (0, L) for slot in slots) or len(slots) > 2:
            return FourierSeries.zero(index_set)
        if len(slots) == 1:
            return (kappa if slots[0] == L else -kappa) * self.gap(L, m)
        return FourierSeries.constant(index_set, kappa if slots[0] == slots[1] else -kappa)


def eval_interaction(
    term: InteractionTerm,
    h: FourierSeries,
    shift: int,
    model: LongRangeModel,
    rho: Optional[float] = None,
    slots: Tuple[int, ...] = (),
) -> FourierSeries:
    """Return H_L (or its slot derivatives) evaluated with slot j at sigma + (j - shift) omega alpha + alpha h."""
    rho = model.basis.rho if rho is None else rho
    return _Evaluation(model, h, rho).term(term, shift, slots)


def _residual(evaluation: _Evaluation) -> FourierSeries:
    model = evaluation.model
    result = FourierSeries.zero(model.index_set)
    for term in model.interactions:
        for m in range(term.L + 1):
            result = result + evaluation.term(term, m, (m,))
    return result


def residual_long(h: FourierSeries, model: LongRangeModel, rho: Optional[float] = None) -> FourierSeries:
    """Return E[h] = sum_L sum_{m=0..L} (d_m H_L)(slots at shift m)."""
    rho = model.basis.rho if rho is None else rho
    return _residual(_Evaluation(model, h, rho))


def _c_series(evaluation: _Evaluation, l: FourierSeries, j: int, k: int, L: int) -> FourierSeries:
    term = evaluation.model.term(L)
    if term is None:
        return FourierSeries.zero(evaluation.model.index_set)
    hessian = evaluation.term(term, k, (k, j))
    return multiply(multiply(hessian, l), shift_orbit(l, evaluation.model.basis, j - k))


def c_series(
    j: int, k: int, L: int, h: FourierSeries, model: LongRangeModel, rho: Optional[float] = None
) -> FourierSeries:
    """Return C_{j,k,L} = (d_k d_j H_L)(slots at shift k) l l o T_{(j-k) omega alpha}."""
    if not (0 <= j <= L and 0 <= k <= L):
        raise ValueError(f"Slots j={j}, k={k} outside 0..{L}")
    rho = model.basis.rho if rho is None else rho
    l = 1.0 + derive_alpha(h, model.basis)
    return _c_series(_Evaluation(model, h, rho), l, j, k, L)


@dataclass
class LinearizedOperator:
    """C_011 + G on zero-average series, assembled at one hull."""

    c011: FourierSeries
    c011_inverse: Optional[FourierSeries]
    pairs: List[Tuple[int, int, int, FourierSeries]]
    basis: FrequencyBasis
    floor: DivisorFloor = DEFAULT_FLOOR

    @classmethod
    def assemble(
        cls,
        evaluation: _Evaluation,
        l: FourierSeries,
        floor: DivisorFloor = DEFAULT_FLOOR,
        reciprocal_tol: float = 1e-12,
    ) -> "LinearizedOperator":
        model = evaluation.model
        c011 = _c_series(evaluation, l, 0, 1, 1)
        try:
            c011_inverse: Optional[FourierSeries] = reciprocal(c011, reciprocal_tol, evaluation.rho)
        except FKHullSingularSeriesError:
            c011_inverse = None
        pairs = []
        for term in model.interactions:
            if term.L < 2:
                continue
            for k in range(term.L + 1):
                for j in range(k):
                    series = _c_series(evaluation, l, j, k, term.L)
                    if np.any(series.coeffs):
                        pairs.append((term.L, j, k, series.without_loss()))
        return cls(c011, c011_inverse, pairs, model.basis, floor)

    def apply_G(self, x: FourierSeries) -> FourierSeries:
        """Return sum over L >= 2, j < k of L^+_{k-j} (C_{j,k,L} R^-_{j-k} x)."""
        x = x.without_mean()
        result = FourierSeries.zero(x.index_set)
        for _, j, k, series in self.pairs:
            inner = apply_R(j - k, x, self.basis, sign=-1, floor=self.floor)
            result = result + apply_L(k - j, multiply(series, inner), self.basis, sign=1, floor=self.floor)
        return result

    def solve(
        self, w: FourierSeries, rho: float, tol: float = 1e-14, max_iter: int = 200
    ) -> Tuple[FourierSeries, int, Optional[float]]:
        """Return x with C_011 x + G x = w by x <- C_011^{-1} (w - G x), the iteration count and contraction."""
        if self.c011_inverse is None:
            raise FKHullLinearizedSolveError("C_011 has no reciprocal")
        x = multiply(self.c011_inverse, w).without_loss()
        if not self.pairs:
            return x, 1, None
        previous: Optional[float] = None
        ratios: List[float] = []
        for iteration in range(1, max_iter + 1):
            x_next = multiply(self.c011_inverse, w - self.apply_G(x)).without_loss()
            diff = weighted_norm(x_next - x, rho)
            scale = max(weighted_norm(x_next, rho), np.finfo(float).tiny)
            x = x_next
            if previous is not None and previous > 1e-13 * scale:
                ratios.append(diff / previous)
            logger.debug("fixed point iteration %d: |x_m+1 - x_m| = %.3e", iteration, diff)
            contraction = max(ratios) if ratios else None
            if diff <= tol * scale:
                return x, iteration, contraction
            if previous is not None and diff >= previous:
                if diff <= 1e-10 * scale:
                    return x, iteration, contraction
                raise FKHullLinearizedSolveError(
                    f"Fixed point is not contracting: {diff:.3e} after {previous:.3e} at iteration {iteration}"
                )
            previous = diff
        raise FKHullLinearizedSolveError(f"Fixed point did not converge in {max_iter} iterations")


def apply_G(h: FourierSeries, x: FourierSeries, model: LongRangeModel, rho: Optional[float] = None) -> FourierSeries:
    """Apply G assembled at h to a zero-average x."""
    rho = model.basis.rho if rho is None else rho
    l = 1.0 + derive_alpha(h, model.basis)
    return LinearizedOperator.assemble(_Evaluation(model, h, rho), l).apply_G(x)


@dataclass
class LinearizedSolution:
    eta: FourierSeries
    w_bar: complex
    iterations: int
    contraction: Optional[float]


def _solve_linearized(
    operator: LinearizedOperator, l: FourierSeries, rhs: FourierSeries, rho: float, options: SolveOptions
) -> LinearizedSolution:
    scale = weighted_norm(rhs, 0.0)
    if abs(rhs.mean) > 1e-10 * max(scale, 1e-300):
        raise FKHullLinearizedSolveError(f"l E has average {rhs.mean:.3e}, expected 0")
    if scale == 0.0:
        return LinearizedSolution(FourierSeries.zero(rhs.index_set), 0j, 0, None)
    w0 = solve_S(1, rhs.without_mean(), operator.basis, options.floor)
    x0, iterations, contraction = operator.solve(w0, rho, options.fixed_point_tol, options.fixed_point_max_iter)
    one = FourierSeries.constant(rhs.index_set, 1.0)
    y, more, contraction_y = operator.solve(one, rho, options.fixed_point_tol, options.fixed_point_max_iter)
    # the mean of x(W_bar) = x0 + W_bar y is affine in W_bar, so one secant step is exact
    if abs(y.mean) <= 1e-14:
        raise FKHullLinearizedSolveError("Average of (C_011 + G)^{-1} 1 vanishes, W_bar is undetermined")
    w_bar = -x0.mean / y.mean
    x = (x0 + w_bar * y).without_mean()
    eta = solve_S(-1, x, operator.basis, options.floor)
    ratios = [r for r in (contraction, contraction_y) if r is not None]
    return LinearizedSolution(eta, complex(w_bar), iterations + more, max(ratios) if ratios else None)


def solve_linearized(
    h: FourierSeries,
    rhs: FourierSeries,
    model: LongRangeModel,
    floor: DivisorFloor = DEFAULT_FLOOR,
    rho: Optional[float] = None,
    options: Optional[SolveOptions] = None,
) -> FourierSeries:
    """Return the zero-average eta with S_1 W = rhs, (C_011 + G) S_{-1} eta = W + W_bar."""
    rho = model.basis.rho if rho is None else rho
    options = SolveOptions(floor=floor) if options is None else options
    l = 1.0 + derive_alpha(h, model.basis)
    operator = LinearizedOperator.assemble(_Evaluation(model, h, rho), l, floor, options.reciprocal_tol)
    return _solve_linearized(operator, l, rhs, rho, options).eta


def _bounds(
    evaluation: _Evaluation, operator: LinearizedOperator, n_minus: float, contraction: Optional[float] = None
) -> LinearizedBounds:
    model = evaluation.model
    radius = evaluation.rho + weighted_norm(evaluation.h, evaluation.rho) + model.basis.iota
    decay = model.decay(radius)
    term = model.term(1)
    t_bound = math.inf
    if term is not None:
        try:
            mixed = evaluation.term(term, 1, (1, 0))
            t_bound = weighted_norm(reciprocal(mixed, rho=evaluation.rho), evaluation.rho)
        except FKHullSingularSeriesError:
            pass
    u_bound = math.inf
    if operator.c011_inverse is not None and operator.c011_inverse.mean != 0:
        u_bound = abs(1.0 / operator.c011_inverse.mean)
    return LinearizedBounds(
        beta=sum(M * L**4 for L, M in decay.items() if L >= 2),
        t_bound=t_bound,
        u_bound=u_bound,
        n_minus=n_minus,
        decay=decay,
        contraction=contraction,
    )


def linearized_bounds(h: FourierSeries, model: LongRangeModel, rho: Optional[float] = None) -> LinearizedBounds:
    """Return the beta, T and U proxies of the linearized operator at h."""
    rho = model.basis.rho if rho is None else rho
    evaluation = _Evaluation(model, h, rho)
    factors = l_factors(h, model.basis, rho=rho)
    operator = LinearizedOperator.assemble(evaluation, factors.l)
    return _bounds(evaluation, operator, weighted_norm(factors.l_inverse, rho))


def newton_step_long(
    state: SolverState, model: LongRangeModel, rho_next: float, options: Optional[SolveOptions] = None
) -> Tuple[SolverState, StepDiagnostics]:
    """Return the state after one long-range quasi-Newton step, Delta = l eta."""
    options = SolveOptions() if options is None else options
    basis = model.basis
    evaluation = _Evaluation(model, state.h, state.rho_n)
    e = state.residual if state.residual is not None else _residual(evaluation)
    factors = l_factors(state.h, basis, options.reciprocal_tol, state.rho_n)
    l = factors.l
    operator = LinearizedOperator.assemble(evaluation, l, options.floor, options.reciprocal_tol)
    if options.enforce_h5 and operator.pairs:
        bounds = _bounds(evaluation, operator, weighted_norm(factors.l_inverse, state.rho_n))
        if not bounds.h5_beta_ok:
            raise FKHullLinearizedSolveError(
                f"(N-)^2 T beta = {bounds.beta_product:.3e} is not below 1/2", state
            )
    solution = _solve_linearized(operator, l, multiply(l, e), state.rho_n, options)
    eta = solution.eta
    c = -multiply(l, eta).mean
    correction = real_projection(multiply(eta + c, l)).without_mean()

    h_next = (state.h + correction.without_loss()).without_mean().without_loss()
    size = weighted_norm(h_next, rho_next)
    if size >= basis.iota:
        raise FKHullCompositionError(f"|h + Delta|_rho = {size:.3e} leaves the composition margin {basis.iota}")
    diagnostics = StepDiagnostics(
        eps=weighted_norm(e, state.rho_n),
        delta_norm=weighted_norm(correction, rho_next),
        delta_lambda=0.0,
        rho=state.rho_n,
        rho_next=rho_next,
        truncation_loss=correction.loss.at(rho_next) + e.loss.at(state.rho_n),
        condition=factors.condition(state.rho_n),
        w_bar=solution.w_bar,
        fixed_point_iterations=solution.iterations,
        contraction=solution.contraction,
    )
    return SolverState(h=h_next, rho_n=rho_next, lam=state.lam, iteration=state.iteration + 1), diagnostics


def identity_check_y8(h: FourierSeries, model: LongRangeModel, rho: Optional[float] = None) -> float:
    """Return |d_alpha E[h] - DE[h] l|_rho; both sides vanish together for exact truncation."""
    rho = model.basis.rho if rho is None else rho
    evaluation = _Evaluation(model, h, rho)
    l = 1.0 + derive_alpha(h, model.basis)
    lhs = derive_alpha(_residual(evaluation), model.basis)
    rhs = FourierSeries.zero(model.index_set)
    for term in model.interactions:
        for m in range(term.L + 1):
            for j in range(term.L + 1):
                hessian = evaluation.term(term, m, (m, j))
                if np.any(hessian.coeffs):
                    rhs = rhs + multiply(hessian, shift_orbit(l, model.basis, j - m))
    return weighted_norm(lhs - rhs, rho)


class LongRangeSolver(QuasiNewtonSolver):
    kind = "long"

    def __init__(self, model: LongRangeModel, options: Optional[SolveOptions] = None) -> None:
        super().__init__(model.basis, options)
        self.model = model

    def residual_series(self, state: SolverState) -> FourierSeries:
        return residual_long(state.h, self.model, state.rho_n)

    def step(self, state: SolverState, rho_next: float) -> Tuple[SolverState, StepDiagnostics]:
        return newton_step_long(state, self.model, rho_next, self.options)

    def bounds(self, state: SolverState) -> Optional[LinearizedBounds]:
        return linearized_bounds(state.h, self.model, state.rho_n)


def solve_long(
    model: LongRangeModel, initial: Optional[SolverState] = None, options: Optional[SolveOptions] = None
) -> Tuple[SolverState, VerificationReport]:
    """Run the long-range quasi-Newton iteration from h = 0 or the given state."""
    if initial is None:
        initial = SolverState.initial(model.index_set, model.basis.rho)
    return LongRangeSolver(model, options).solve(initial)


def verify_long(
    state: SolverState, model: LongRangeModel, options: Optional[SolveOptions] = None
) -> VerificationReport:
    """Return the hypothesis proxies and residual of a hull without iterating."""
    return LongRangeSolver(model, options).verify(state)
