"""
Linear control problems mapping a desired next state to a feasible action.
"""

from .base import DesiredState, LcpModel, LcpResult, floor_allocation, solve_lcp
from .dvr import build_dvr_lcp
from .mcf import build_mcf_lcp
from .rounding import round_to_integer
from .scim import build_scim_lcp

__all__ = [
    "DesiredState",
    "LcpModel",
    "LcpResult",
    "floor_allocation",
    "solve_lcp",
    "build_mcf_lcp",
    "build_scim_lcp",
    "build_dvr_lcp",
    "round_to_integer",
]
