"""Adding one frequency at a time.

A ladder lists force shells W_1, W_2, ... where W_n depends on the first n
torus angles. Level n solves the short-range equation with U = W_1 + ... + W_n
on n frequencies, starting from the level n-1 hull embedded into the wider
index set. The radii shrink as rho_n = rho_inf + 2^{-n-1} (rho - rho_inf).
"""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Mapping, Optional, Tuple, Union

import numpy as np

from .diophantine import DiophantineStyle, divisors, empirical_nu
from .entities.report import LadderLevelRecord, LadderReport
from .entities.state import SolverState
from .exceptions import FKHullConfigError, FKHullSolverError
from .fourier import FourierSeries, FrequencyBasis, weighted_norm
from .index_space import DEFAULT_CAP, IndexSet, MultiIndex, enumerate_indices
from .solvers.abc import SolveOptions, condition_numbers
from .solvers.short_range import ShortRangeModel, orbit_residual, solve

logger = logging.getLogger(__name__)

ModeKey = Union[MultiIndex, str]


@dataclass(frozen=True)
class LadderLevel:
    """Frequency alpha_n with the force shell W_n added at this level."""

    alpha: float
    shell: Mapping[ModeKey, complex] = field(default_factory=dict)
    nu: Optional[float] = None
    tau: float = 1.0

    def shell_series(self, index_set: IndexSet) -> FourierSeries:
        return FourierSeries.from_modes(index_set, self.shell)


@dataclass(frozen=True)
class FrequencyLadder:
    levels: Tuple[LadderLevel, ...]
    omega: float
    rho: float
    rho_inf: float
    K: float
    s: float = 1.0
    iota: float = 1.0
    cap: int = DEFAULT_CAP

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise FKHullConfigError("A frequency ladder needs at least one level")
        if not 0 < self.rho_inf < self.rho:
            raise FKHullConfigError(f"Need 0 < rho_inf < rho, got rho_inf={self.rho_inf}, rho={self.rho}")
        for n, level in enumerate(self.levels, start=1):
            for key in level.shell:
                k = MultiIndex.parse(key) if isinstance(key, str) else key
                if k.max_position > n:
                    raise FKHullConfigError(f"Level {n} shell mode {str(k)!r} uses frequency {k.max_position}")

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def alpha(self) -> Tuple[float, ...]:
        return tuple(level.alpha for level in self.levels)

    def level_radius(self, n: int) -> float:
        return level_radius(n, self.rho, self.rho_inf)

    def index_set(self, n: int) -> IndexSet:
        return enumerate_indices(n, self.K, self.s, self.cap)

    def basis(self, n: int, rho: Optional[float] = None) -> FrequencyBasis:
        rho = self.level_radius(n - 1) if rho is None else rho
        return FrequencyBasis(self.alpha[:n], self.omega, rho, self.s, self.iota)

    def force(self, n: int) -> FourierSeries:
        """Return U = W_1 + ... + W_n over the level n index set."""
        index_set = self.index_set(n)
        total = FourierSeries.zero(index_set)
        for level in self.levels[:n]:
            total = total + level.shell_series(index_set)
        return total

    def model(self, n: int) -> ShortRangeModel:
        return ShortRangeModel(shell_U=self.force(n), basis=self.basis(n))

    def shell_norms(self) -> List[float]:
        """Return |W_n|_rho of every level."""
        return [
            weighted_norm(level.shell_series(self.index_set(n)), self.rho)
            for n, level in enumerate(self.levels, start=1)
        ]


@dataclass(frozen=True)
class LadderState:
    """Hull reached at ``level`` with the per-level history."""

    level: int
    h: FourierSeries
    rho_n: float
    lam: float = 0.0
    deltas: Tuple[float, ...] = ()
    hulls: Tuple[FourierSeries, ...] = ()
    records: Tuple[LadderLevelRecord, ...] = ()

    @classmethod
    def start(cls, ladder: FrequencyLadder) -> "LadderState":
        return cls(level=0, h=FourierSeries.zero(ladder.index_set(1)), rho_n=ladder.level_radius(0))


def level_radius(n: int, rho: float, rho_inf: float) -> float:
    """Return rho_n = rho_inf + 2^{-n-1} (rho - rho_inf)."""
    return rho_inf + 2.0 ** (-n - 1) * (rho - rho_inf)


def drift_bound(n: int, rho: float, rho_inf: float) -> float:
    """Return (rho - rho_inf) 2^{-n-2}, the allowed size of h^{n+1} - h^n."""
    return (rho - rho_inf) * 2.0 ** (-n - 2)


def embed(h: FourierSeries, target_level: int) -> FourierSeries:
    """Return h over the index set with ``target_level`` frequencies; coefficients are unchanged."""
    return h.embed(h.index_set.widen(target_level))


def extend(
    state: LadderState, ladder: FrequencyLadder, options: Optional[SolveOptions] = None
) -> Tuple[LadderState, LadderLevelRecord]:
    """Solve the next level from the embedded hull of the current one.

    Raises the level's :class:`FKHullSolverError` when its solve fails.
    """
    options = SolveOptions() if options is None else options
    n = state.level + 1
    if n > ladder.depth:
        raise FKHullConfigError(f"Ladder has {ladder.depth} levels, cannot extend to {n}")
    rho_start, rho_end = ladder.level_radius(n - 1), ladder.level_radius(n)
    model = ladder.model(n)
    previous = embed(state.h, n)
    initial = SolverState(h=previous, rho_n=rho_start, lam=state.lam)
    level_options = replace(options, rho_loss=rho_start - rho_end)
    logger.debug("Ladder level %d: %d modes, rho %.4g -> %.4g", n, len(model.index_set), rho_start, rho_end)

    final, report = solve(model, initial, level_options)

    delta = weighted_norm(final.h - previous, rho_end)
    index_set = model.index_set
    alpha = model.basis.alpha_array(n)
    level = ladder.levels[n - 1]
    values = divisors(ladder.omega, alpha, index_set)
    values[index_set.zero_position] = np.inf
    nu_power = empirical_nu(ladder.omega, alpha, index_set, level.tau, DiophantineStyle.POWER)
    if level.nu is not None and nu_power < level.nu:
        logger.warning("Ladder level %d: empirical nu %.3e below the declared %.3e", n, nu_power, level.nu)
    condition = condition_numbers(final, model.basis, rho_end)
    record = LadderLevelRecord(
        level=n,
        rho=rho_end,
        residual=report.residual,
        iterations=report.iterations,
        delta=delta,
        delta_bound=drift_bound(n - 1, ladder.rho, ladder.rho_inf),
        n_plus=condition.n_plus,
        n_minus=condition.n_minus,
        c=condition.c,
        min_divisor=float(values.min()),
        nu_power=nu_power,
        margin=ladder.iota - weighted_norm(final.h, rho_end),
    )
    if not record.delta_ok:
        logger.warning("Ladder level %d: drift %.3e exceeds %.3e", n, delta, record.delta_bound)
    logger.info("Ladder level %d done: eps=%.3e drift=%.3e", n, record.residual, delta)
    new_state = LadderState(
        level=n,
        h=final.h,
        rho_n=final.rho_n,
        lam=final.lam,
        deltas=state.deltas + (delta,),
        hulls=state.hulls + (final.h,),
        records=state.records + (record,),
    )
    return new_state, record


def run_ladder(
    ladder: FrequencyLadder, options: Optional[SolveOptions] = None
) -> Tuple[LadderState, LadderReport]:
    """Extend level by level; a failing level halts the ladder and is flagged in the report."""
    state = LadderState.start(ladder)
    halted_at: Optional[int] = None
    halt_reason: Optional[str] = None
    while state.level < ladder.depth:
        try:
            state, _ = extend(state, ladder, options)
        except FKHullSolverError as err:
            halted_at, halt_reason = state.level + 1, err.detail
            logger.error("Ladder halted at level %d: %s", halted_at, err.detail)
            break
    report = LadderReport(
        rho=ladder.rho,
        rho_inf=ladder.rho_inf,
        completed=halted_at is None,
        halted_at=halted_at,
        halt_reason=halt_reason,
        levels=list(state.records),
    )
    return state, report


def orbit_check(state: LadderState, ladder: FrequencyLadder, m_max: int = 500) -> float:
    """Return max_m |u_{m+1} + u_{m-1} - 2 u_m + W(u_m) + lambda| along the orbit of the reached level."""
    if state.level == 0:
        raise FKHullConfigError("No level solved yet")
    solver_state = SolverState(h=state.h, rho_n=state.rho_n, lam=state.lam)
    return float(np.max(np.abs(orbit_residual(ladder.model(state.level), solver_state, m_max))))
