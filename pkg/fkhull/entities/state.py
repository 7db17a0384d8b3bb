from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Any, Optional

from ..fourier import FourierSeries
from ..index_space import IndexSet

if TYPE_CHECKING:
    from .report import ConditionNumbers


@dataclass(frozen=True)
class SolverState:
    """Hull coefficients, counterterm and radius at one iteration."""

    h: FourierSeries
    rho_n: float
    lam: float = 0.0
    eps_n: float = float("inf")
    iteration: int = 0
    # residual series at (h, lam), filled once computed
    residual: Optional[FourierSeries] = None

    @classmethod
    def initial(cls, index_set: IndexSet, rho: float, lam: float = 0.0) -> "SolverState":
        """Return the state h = 0 at radius rho."""
        return cls(h=FourierSeries.zero(index_set), rho_n=rho, lam=lam)

    def replace(self, **changes: Any) -> "SolverState":
        return replace(self, **changes)


@dataclass
class StepDiagnostics:
    """Quantities computed along one quasi-Newton step."""

    eps: float
    delta_norm: float
    delta_lambda: float
    rho: float
    rho_next: float
    truncation_loss: float
    condition: "ConditionNumbers"
    w_bar: complex = 0j
    floor_hits: int = 0
    fixed_point_iterations: int = 0
    contraction: Optional[float] = None
