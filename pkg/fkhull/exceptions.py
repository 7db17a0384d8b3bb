from typing import TYPE_CHECKING, Any, Optional, Tuple

from pydantic import ValidationError

if TYPE_CHECKING:
    from .entities.state import SolverState


class FKHullException(Exception):
    """Base exception for all fkhull exceptions."""

    def __init__(self, detail: Optional[str] = None) -> None:
        """Initialize exception."""
        self.detail = "fkhull error" if detail is None else detail
        super().__init__(self.detail)

    def __str__(self) -> str:
        """Return a string representation of the exception."""
        return self.detail

    def __repr__(self) -> str:
        """Return a representation of the exception."""
        return f"{self.__class__.__name__}({self.detail!r})"


class FKHullIndexSpaceError(FKHullException):
    """Exception for index sets that cannot be built."""

    def __init__(self, detail: Optional[str] = None, cardinality: Optional[int] = None) -> None:
        """Initialize exception."""
        self.cardinality = cardinality
        if detail is None:
            detail = "Invalid index set" if cardinality is None else f"Index set too large: {cardinality} members"
        super().__init__(detail)


class FKHullSeriesError(FKHullException):
    """Exception for invalid Fourier series operations."""

    def __init__(self, detail: Optional[str] = None) -> None:
        """Initialize exception."""
        super().__init__("Invalid series operation" if detail is None else detail)


class FKHullSingularSeriesError(FKHullSeriesError):
    """Exception for series without a usable reciprocal."""

    def __init__(self, detail: Optional[str] = None) -> None:
        """Initialize exception."""
        super().__init__("Series is singular" if detail is None else detail)


class FKHullCompositionError(FKHullSeriesError):
    """Exception for compositions outside the analyticity margin."""

    def __init__(self, detail: Optional[str] = None) -> None:
        """Initialize exception."""
        super().__init__("Composition failed" if detail is None else detail)


class FKHullCohomologyError(FKHullException):
    """Exception for difference equations that cannot be solved."""

    def __init__(self, detail: Optional[str] = None) -> None:
        """Initialize exception."""
        super().__init__("Cohomological equation has no zero-average solution" if detail is None else detail)


class FKHullSmallDivisorError(FKHullCohomologyError):
    """Exception for divisors below the configured floor."""

    def __init__(
        self,
        index: Optional[Tuple[Tuple[int, int], ...]] = None,
        divisor: Optional[float] = None,
        detail: Optional[str] = None,
    ) -> None:
        """Initialize exception."""
        self.index = index
        self.divisor = divisor
        if detail is None:
            detail = f"Small divisor {divisor!r} at index {index!r}"
        super().__init__(detail)


class FKHullValidationError(FKHullException):
    """Exception for configuration validation errors."""

    def __init__(self, error: ValidationError, detail: Optional[str] = None) -> None:
        """Initialize exception."""
        self.error = error
        if detail is None:
            fields = "; ".join(
                f"{'.'.join(str(part) for part in item['loc'])}: {item['msg']}" for item in error.errors()
            )
            detail = f"Validation error: {fields}"
        super().__init__(detail)

    @property
    def fields(self) -> Tuple[str, ...]:
        """Return dotted paths of the invalid fields."""
        return tuple(".".join(str(part) for part in item["loc"]) for item in self.error.errors())


class FKHullConfigError(FKHullException):
    """Exception for unreadable or inconsistent configuration files."""

    def __init__(self, detail: Optional[str] = None) -> None:
        """Initialize exception."""
        super().__init__("Invalid configuration" if detail is None else detail)


class FKHullSerializationError(FKHullException):
    """Exception for malformed hull dumps and model files."""

    def __init__(self, detail: Optional[str] = None, line: Optional[int] = None) -> None:
        """Initialize exception."""
        self.line = line
        if detail is None:
            detail = "Malformed file"
        if line is not None:
            detail = f"{detail} (line {line})"
        super().__init__(detail)


class FKHullSolverError(FKHullException):
    """Base exception for iteration failures.

    The last state reached before the failure is kept in ``state``.
    """

    def __init__(self, detail: Optional[str] = None, state: Optional["SolverState"] = None, **extra: Any) -> None:
        """Initialize exception."""
        self.state = state
        self.extra = extra
        super().__init__("Solver failed" if detail is None else detail)


class FKHullDivergenceError(FKHullSolverError):
    """Exception for residuals growing past the divergence floor."""

    def __init__(self, detail: Optional[str] = None, state: Optional["SolverState"] = None, **extra: Any) -> None:
        """Initialize exception."""
        super().__init__("Iteration diverged" if detail is None else detail, state, **extra)


class FKHullNotConvergedError(FKHullSolverError):
    """Exception for iterations that stop above tolerance."""

    def __init__(self, detail: Optional[str] = None, state: Optional["SolverState"] = None, **extra: Any) -> None:
        """Initialize exception."""
        super().__init__("Iteration did not converge" if detail is None else detail, state, **extra)


class FKHullConditionError(FKHullSolverError):
    """Exception for condition numbers past their caps."""

    def __init__(self, detail: Optional[str] = None, state: Optional["SolverState"] = None, **extra: Any) -> None:
        """Initialize exception."""
        super().__init__("Condition numbers out of range" if detail is None else detail, state, **extra)


class FKHullLinearizedSolveError(FKHullSolverError):
    """Exception for the long-range linearized inversion."""

    def __init__(self, detail: Optional[str] = None, state: Optional["SolverState"] = None, **extra: Any) -> None:
        """Initialize exception."""
        super().__init__("Linearized equation could not be inverted" if detail is None else detail, state, **extra)


class FKHullOracleError(FKHullException):
    """Exception for brute-force oracle failures."""

    def __init__(self, detail: Optional[str] = None) -> None:
        """Initialize exception."""
        super().__init__("Oracle failed" if detail is None else detail)
