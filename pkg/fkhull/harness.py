import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel

from .cohomology import DivisorFloor
from .continuation import FrequencyLadder, LadderLevel, LadderState, orbit_check, run_ladder
from .diophantine import DiophantineParams
from .entities.config import RunConfig, RunMode, load_config
from .entities.report import OracleReport, VerificationReport
from .entities.state import SolverState
from .exceptions import FKHullConfigError, FKHullException
from .fourier import FourierSeries, FrequencyBasis, derive_alpha
from .index_space import IndexSet, enumerate_indices
from .oracles import CosinePotential, compare_chain, oracle_dense_newton, oracle_finite_chain
from .serialization import (
    read_hull,
    read_model,
    write_history,
    write_hull,
    write_ladder,
    write_oracle,
    write_report,
)
from .solvers.abc import SolveOptions
from .solvers.long_range import LongRangeModel, LongRangeSolver, identity_check_y8
from .solvers.short_range import ShortRangeModel, ShortRangeSolver, uniqueness_probe, vanishing_check

logger = logging.getLogger(__name__)

T = TypeVar("T", bound="Harness")
ConfigLike = Union[RunConfig, str, Path]


@dataclass
class RunResult:
    mode: RunMode
    out: Path
    report: BaseModel
    files: List[Path] = field(default_factory=list)
    state: Optional[SolverState] = None
    ladder: Optional[LadderState] = None


@dataclass
class BatchResult:
    source: str
    result: Optional[RunResult] = None
    error: Optional[FKHullException] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _with(report: VerificationReport, **updates: Any) -> VerificationReport:
    """Return the report with extra sections, flags recomputed."""
    data = report.dict()
    data.update({key: value.dict() if isinstance(value, BaseModel) else value for key, value in updates.items()})
    return VerificationReport.parse_obj(data)


class Harness:
    """Runs one configured job and writes its files.

    Example:
    >>> harness = Harness.from_file("golden.ini", out="results")
    >>> result = harness.run()
    >>> result.report.flags
    {'residual_ok': True, ...}
    """

    config: RunConfig
    out: Path

    def __init__(self, config: RunConfig, out: Optional[Union[str, Path]] = None) -> None:
        self.config = config
        self.out = Path(out) if out is not None else config.run.out
        self._runners: Dict[RunMode, Callable[[], RunResult]] = {
            RunMode.SHORT: self._run_short,
            RunMode.LONG: self._run_long,
            RunMode.LADDER: self._run_ladder,
            RunMode.VERIFY: self._run_verify,
            RunMode.ORACLE: self._run_oracle,
        }

    @classmethod
    def from_file(cls: Type[T], path: Union[str, Path], out: Optional[Union[str, Path]] = None) -> T:
        return cls(load_config(path), out)

    @property
    def mode(self) -> RunMode:
        return self.config.run.mode

    def basis(self) -> FrequencyBasis:
        basis = self.config.basis
        return FrequencyBasis(tuple(basis.alpha), basis.rotation, basis.rho, self.config.index.s, basis.iota)

    def index_set(self) -> IndexSet:
        index = self.config.index
        return enumerate_indices(index.N, index.K, index.s, index.cap)

    def options(self) -> SolveOptions:
        solver, long = self.config.solver, self.config.long
        diophantine = self.config.diophantine
        extra: Dict[str, Any] = {}
        if long is not None:
            extra = dict(
                fixed_point_tol=long.fixed_point_tol,
                fixed_point_max_iter=long.fixed_point_max_iter,
                enforce_h5=long.enforce_h5,
            )
        return SolveOptions(
            tol=solver.tol,
            max_iter=solver.max_iter,
            rho_loss=solver.rho_loss,
            divergence_floor=solver.divergence_floor,
            n_plus_cap=solver.n_plus_cap,
            n_minus_cap=solver.n_minus_cap,
            c_floor=solver.c_floor,
            freeze_lambda=solver.freeze_lambda,
            floor=DivisorFloor(solver.divisor_floor, solver.divisor_policy),
            reciprocal_tol=solver.reciprocal_tol,
            diophantine=(
                None
                if diophantine is None
                else DiophantineParams(nu=diophantine.nu, tau=diophantine.tau, style=diophantine.style)
            ),
            **extra,
        )

    def short_model(self) -> ShortRangeModel:
        index_set, basis = self.index_set(), self.basis()
        shell_U = FourierSeries.from_modes(index_set, {k: complex(*v) for k, v in self.config.shell_U.items()})
        if self.config.shell_V is None:
            return ShortRangeModel(shell_U, basis)
        shell_V = FourierSeries.from_modes(index_set, {k: complex(*v) for k, v in self.config.shell_V.items()})
        if not self.config.shell_U:
            shell_U = derive_alpha(shell_V, basis)
        return ShortRangeModel(shell_U, basis, shell_V)

    def long_model(self) -> LongRangeModel:
        long = self.config.long
        if long is None:
            raise FKHullConfigError("Long-range runs need a [long] section")
        terms = read_model(long.model) if long.model is not None else []
        if long.include_short:
            terms = terms + LongRangeModel.from_short_range(self.short_model()).interactions
        if long.L_max is not None and any(term.L > long.L_max for term in terms):
            raise FKHullConfigError(f"Model has ranges beyond L_max = {long.L_max}")
        return LongRangeModel(terms, self.basis(), self.index_set())

    def ladder(self) -> FrequencyLadder:
        ladder, basis, index = self.config.ladder, self.config.basis, self.config.index
        if ladder is None:
            raise FKHullConfigError("Ladder runs need a [ladder] section")
        levels = tuple(
            LadderLevel(
                alpha=level.alpha,
                shell={k: complex(*v) for k, v in level.modes.items()},
                nu=level.nu,
                tau=ladder.tau if level.tau is None else level.tau,
            )
            for level in self.config.levels
        )
        return FrequencyLadder(
            levels=levels,
            omega=basis.rotation,
            rho=ladder.rho,
            rho_inf=ladder.rho_inf,
            K=index.K,
            s=index.s,
            iota=basis.iota,
            cap=index.cap,
        )

    def _initial(self, index_set: IndexSet, rho: float) -> SolverState:
        hull = self.config.run.hull
        if hull is None:
            return SolverState.initial(index_set, rho)
        dump = read_hull(hull, self.config.index.cap)
        if dump.h.index_set != index_set:
            raise FKHullConfigError(f"Hull dump {str(hull)!r} is over {dump.h.index_set!r}, expected {index_set!r}")
        return SolverState(h=dump.h, rho_n=rho, lam=dump.lam)

    def _prepare(self) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out

    def _write_solve(self, state: SolverState, report: VerificationReport) -> List[Path]:
        out = self._prepare()
        files = [
            write_history(out / "residual_history.csv", report),
            write_hull(out / "hull.coeffs", state.h, state.rho_n, state.lam),
        ]
        files.extend(write_report(out, report))
        logger.info("Wrote %d files to %s", len(files), out)
        return files

    def _run_short(self) -> RunResult:
        model = self.short_model()
        options = self.options()
        solver = ShortRangeSolver(model, options)
        final, report = solver.solve(self._initial(model.index_set, model.basis.rho))
        updates: Dict[str, Any] = {"vanishing": vanishing_check(model, final, self.config.solver.vanish_tol)}
        scale = self.config.solver.uniqueness_scale
        if scale is not None:
            updates["uniqueness"] = uniqueness_probe(model, final, scale, options, self.config.run.seed)
        report = _with(report, **updates)
        return RunResult(self.mode, self.out, report, self._write_solve(final, report), state=final)

    def _run_long(self) -> RunResult:
        model = self.long_model()
        solver = LongRangeSolver(model, self.options())
        final, report = solver.solve(self._initial(model.index_set, model.basis.rho))
        logger.info("Derivative identity defect %.3e", identity_check_y8(final.h, model, final.rho_n))
        return RunResult(self.mode, self.out, report, self._write_solve(final, report), state=final)

    def _run_ladder(self) -> RunResult:
        ladder = self.ladder()
        state, report = run_ladder(ladder, self.options())
        out = self._prepare()
        files: List[Path] = []
        for n, h in enumerate(state.hulls, start=1):
            level_dir = out / f"level_{n}"
            level_dir.mkdir(exist_ok=True)
            files.append(write_hull(level_dir / "hull.coeffs", h, ladder.level_radius(n), state.lam))
        files.append(write_ladder(out / "ladder.csv", report))
        files.extend(write_report(out, report))
        if state.level:
            logger.info("Orbit residual at level %d: %.3e", state.level, orbit_check(state, ladder))
        return RunResult(self.mode, self.out, report, files, ladder=state)

    def _run_verify(self) -> RunResult:
        hull = self.config.run.hull
        if hull is None:
            raise FKHullConfigError("Verify mode needs run.hull")
        dump = read_hull(hull, self.config.index.cap)
        state = SolverState(h=dump.h, rho_n=dump.rho, lam=dump.lam)
        if self.config.run.long:
            model = self.long_model()
            report = LongRangeSolver(model, self.options()).verify(state)
        else:
            short = self.short_model()
            report = ShortRangeSolver(short, self.options()).verify(state)
            report = _with(report, vanishing=vanishing_check(short, state, self.config.solver.vanish_tol))
        files = list(write_report(self._prepare(), report))
        return RunResult(self.mode, self.out, report, files, state=state)

    def _run_oracle(self) -> RunResult:
        model = self.short_model()
        oracle = self.config.oracle
        final, report = ShortRangeSolver(model, self.options()).solve(
            SolverState.initial(model.index_set, model.basis.rho)
        )
        dense_distance = dense_lambda = None
        if oracle.dense:
            h_dense, lam_dense = oracle_dense_newton(model, tol=oracle.dense_tol)
            dense_distance = final.h.sup_distance(h_dense)
            dense_lambda = lam_dense
        potential = CosinePotential.from_shell(model.shell_U, model.basis)
        chain = oracle_finite_chain(potential, oracle.p, oracle.q, oracle.tol)
        table = compare_chain(final.h, chain, oracle.p)
        report = _with(
            report,
            vanishing=vanishing_check(model, final, self.config.solver.vanish_tol),
            oracle=OracleReport(
                p=oracle.p,
                q=oracle.q,
                dense_distance=dense_distance,
                dense_lambda=dense_lambda,
                chain_max_diff=float(np.abs(table[:, 3]).max()),
            ),
        )
        files = self._write_solve(final, report)
        files.append(write_oracle(self.out / "oracle.csv", table))
        return RunResult(self.mode, self.out, report, files, state=final)

    def run(self) -> RunResult:
        """Run the configured mode and write its outputs."""
        logger.info("Running %s job into %s", self.mode.value, self.out)
        return self._runners[self.mode]()


def run(config: ConfigLike, out: Optional[Union[str, Path]] = None) -> RunResult:
    config = config if isinstance(config, RunConfig) else load_config(config)
    return Harness(config, out).run()


class BatchRunner:
    """Runs independent jobs in a thread pool.

    Example:
    >>> async with BatchRunner(max_workers=4) as runner:
    ...     results = await runner.run(["a.ini", "b.ini"])
    """

    def __init__(self, max_workers: Optional[int] = None) -> None:
        self.max_workers = max_workers
        self._executor: Optional[ThreadPoolExecutor] = None

    @staticmethod
    def _job(config: ConfigLike, out: Optional[Path]) -> BatchResult:
        source = str(config.source) if isinstance(config, RunConfig) else str(config)
        try:
            return BatchResult(source, result=run(config, out))
        except FKHullException as err:
            logger.error("Batch job %s failed: %s", source, err.detail)
            return BatchResult(source, error=err)

    async def submit(self, config: ConfigLike, out: Optional[Path] = None) -> BatchResult:
        if self._executor is None:
            raise RuntimeError("Use BatchRunner as an async context manager")
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(self._executor, self._job, config, out)

    async def run(
        self, configs: Sequence[ConfigLike], outs: Optional[Sequence[Optional[Path]]] = None
    ) -> List[BatchResult]:
        outs = [None] * len(configs) if outs is None else list(outs)
        return list(await asyncio.gather(*(self.submit(c, o) for c, o in zip(configs, outs))))

    async def __aenter__(self) -> "BatchRunner":
        self._executor = ThreadPoolExecutor(max_workers=self.max_workers)
        return self

    async def __aexit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None


async def run_batch(
    configs: Sequence[ConfigLike], max_workers: Optional[int] = None, outs: Optional[Sequence[Optional[Path]]] = None
) -> List[BatchResult]:
    """Run independent configs concurrently; a failing job never cancels the others."""
    async with BatchRunner(max_workers) as runner:
        return await runner.run(configs, outs)
