"""
Linear programming: program container, modelling helper, embedded simplex.
"""

from .base import LinearProgram, LpSolution, LpStatus
from .builder import LpBuilder, add_abs_penalty
from .formats import to_lp_text, write_lp
from .simplex import BaseSolver, TwoPhaseSimplex, solve

__all__ = [
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "LpBuilder",
    "add_abs_penalty",
    "BaseSolver",
    "TwoPhaseSimplex",
    "solve",
    "to_lp_text",
    "write_lp",
]
