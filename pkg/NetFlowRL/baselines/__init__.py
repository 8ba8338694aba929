"""
Comparison policies: random, order-up-to, equal balancing, greedy and the
perfect-information oracle.
"""

from .base import Controller, EpisodeRecord, play_episode
from .heuristics import (
    BALANCE_WEIGHT,
    EquallyBalancedController,
    GreedyController,
    RandomController,
    equally_balanced,
    greedy_policy,
    random_policy,
)
from .oracle import OracleController, OraclePlan, fit_to_stock, mpc_oracle
from .s_type import (
    SURFACE_COLUMNS,
    STypeController,
    STypeLevels,
    SweepResult,
    inventory_position,
    proportional_allocation,
    s_type_policy,
    s_type_sweep,
)

__all__ = [
    "Controller",
    "EpisodeRecord",
    "play_episode",
    "random_policy",
    "greedy_policy",
    "equally_balanced",
    "RandomController",
    "GreedyController",
    "EquallyBalancedController",
    "BALANCE_WEIGHT",
    "STypeLevels",
    "STypeController",
    "SweepResult",
    "SURFACE_COLUMNS",
    "proportional_allocation",
    "inventory_position",
    "s_type_policy",
    "s_type_sweep",
    "OraclePlan",
    "OracleController",
    "mpc_oracle",
    "fit_to_stock",
]
