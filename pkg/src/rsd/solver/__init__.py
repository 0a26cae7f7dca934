"""Embedded solvers for the scenario programs."""
from .minimax import MinimaxTolerances, QuadraticFamily, minimax_quadratic_solve
from .simplex import LinearProgram, LPTolerances, SolveOutcome, lp_solve

__all__ = [
    "LinearProgram",
    "LPTolerances",
    "SolveOutcome",
    "lp_solve",
    "MinimaxTolerances",
    "QuadraticFamily",
    "minimax_quadratic_solve",
]
