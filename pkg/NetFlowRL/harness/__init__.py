"""
Experiment harness: configuration, orchestration, metrics, timing and CLI.
"""

from .config import POLICIES, ExperimentConfig, default_policy_fields, load_config, save_config
from .metrics import EPISODE_COLUMNS, EvalSummary, episode_frame, pct_of_oracle, summarize
from .runner import (
    build_controller,
    build_env,
    default_level_grid,
    evaluate_policy,
    run_episode,
    run_eval,
    run_sweep,
    run_train,
)
from .timing import TIMING_COLUMNS, timing_benchmark

__all__ = [
    "POLICIES",
    "ExperimentConfig",
    "default_policy_fields",
    "load_config",
    "save_config",
    "pct_of_oracle",
    "EvalSummary",
    "summarize",
    "episode_frame",
    "EPISODE_COLUMNS",
    "build_env",
    "build_controller",
    "run_episode",
    "evaluate_policy",
    "run_eval",
    "run_train",
    "run_sweep",
    "default_level_grid",
    "timing_benchmark",
    "TIMING_COLUMNS",
]
