"""
Advantage actor-critic training of the bi-level policy.
"""

from .a2c import a2c_update, bootstrap_value, normalize, returns_and_advantages
from .config import PenaltySchedule, TrainConfig, penalty_weight
from .controller import PolicyController
from .rollout import Trajectory, Transition, apply_control, rollout
from .trainer import LOG_COLUMNS, Trainer, load_policy, policy_for_env, policy_metadata

__all__ = [
    "TrainConfig",
    "PenaltySchedule",
    "penalty_weight",
    "Transition",
    "Trajectory",
    "apply_control",
    "rollout",
    "returns_and_advantages",
    "normalize",
    "a2c_update",
    "bootstrap_value",
    "Trainer",
    "LOG_COLUMNS",
    "policy_for_env",
    "policy_metadata",
    "load_policy",
    "PolicyController",
]
