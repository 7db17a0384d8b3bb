"""Quasi-Newton hull solvers."""

from .abc import QuasiNewtonSolver, SolveOptions
from .long_range import InteractionTerm, LongRangeModel, LongRangeSolver, solve_long, verify_long
from .short_range import ShortRangeModel, ShortRangeSolver, solve

__all__ = [
    "QuasiNewtonSolver",
    "SolveOptions",
    "InteractionTerm",
    "LongRangeModel",
    "LongRangeSolver",
    "ShortRangeModel",
    "ShortRangeSolver",
    "solve",
    "solve_long",
    "verify_long",
]
