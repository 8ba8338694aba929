"""
Experiment orchestration: training runs, evaluation with reference policies
and the order-up-to sweep.
"""

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np
import pandas as pd

from ..baselines import (
    EquallyBalancedController,
    GreedyController,
    OracleController,
    RandomController,
    STypeController,
    STypeLevels,
    play_episode,
    s_type_sweep,
)
from ..envs import make_env
from ..nn import GraphPolicy
from ..exceptions import ConfigError
from ..rl import PolicyController, Trainer, load_policy, policy_for_env
from .config import ExperimentConfig, save_config
from .metrics import EvalSummary, episode_frame, summarize

logger = logging.getLogger(__name__)

REFERENCE_POLICIES = ("random", "oracle")


def build_env(config):
    return make_env(config.env, config.env_config)


def build_controller(config, name=None, policy=None):
    """
    Controller for ``name`` (default: the configured policy).

    ``graph_rl`` needs a trained GraphPolicy passed as ``policy``.
    """
    name = name or config.policy
    if name == "graph_rl":
        if policy is None:
            raise ConfigError("checkpoint", "the graph_rl policy needs a checkpoint")
        return PolicyController(policy, config.eval_penalty_weight, config.backend)
    if name == "random":
        return RandomController(config.eval_penalty_weight, config.backend)
    if name == "greedy":
        return GreedyController(config.backend)
    if name == "equally_balanced":
        return EquallyBalancedController(config.backend)
    if name == "s_type":
        levels = config.s_type or {}
        return STypeController(STypeLevels(int(levels["warehouse"]), int(levels["store"])), config.backend)
    if name == "oracle":
        return OracleController(config.oracle_backend, config.oracle_horizon)
    raise ConfigError("policy", f"unknown policy {name!r}")


def run_episode(env, controller, seed):
    """One evaluation episode; the controller's samples are seeded with ``seed``."""
    return play_episode(env, controller, seed, np.random.default_rng(seed))


def _episode_job(args):
    config_dict, name, seed, checkpoint = args
    config = ExperimentConfig.from_dict(config_dict)
    policy = load_policy(checkpoint)[0] if checkpoint else None
    return seed, run_episode(build_env(config), build_controller(config, name, policy), seed)


def evaluate_policy(config, name, policy=None, checkpoint=None):
    """
    EpisodeRecords of ``name`` on the configured evaluation seeds.

    With ``workers > 1`` episodes fan out over worker processes (the policy is
    then reloaded from ``checkpoint`` in every worker); records always come
    back in seed order.
    """
    seeds = config.seeds
    if config.workers > 1 and (name != "graph_rl" or checkpoint):
        jobs = [(config.to_dict(), name, seed, checkpoint) for seed in seeds]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = dict(pool.map(_episode_job, jobs))
        return [results[seed] for seed in seeds]
    if name == "graph_rl" and policy is None and checkpoint:
        policy = load_policy(checkpoint)[0]
    env = build_env(config)
    controller = build_controller(config, name, policy)
    records = []
    for seed in seeds:
        records.append(run_episode(env, controller, seed))
        logger.debug("%s episode seed %d: reward %.3f", name, seed, records[-1].total_reward)
    return records


def _prepare_out_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def run_eval(
    config: ExperimentConfig,
    checkpoint: Optional[str] = None,
    policy: Optional[GraphPolicy] = None,
    references: bool = True,
) -> EvalSummary:
    """
    Evaluate the configured policy next to the random and oracle references.

    Writes ``summary.json`` and ``episodes.csv`` to the output directory.

    Returns:
        EvalSummary
    """
    out_dir = _prepare_out_dir(config.out_dir)
    records = {config.policy: evaluate_policy(config, config.policy, policy, checkpoint)}
    if references:
        for name in REFERENCE_POLICIES:
            if name not in records:
                records[name] = evaluate_policy(config, name)
    summary = summarize(config.env, config.policy, records[config.policy],
                        records.get("random"), records.get("oracle"))

    frames = [episode_frame(name, recs) for name, recs in records.items()]
    pd.concat(frames, ignore_index=True).to_csv(os.path.join(out_dir, "episodes.csv"), index=False)
    doc = summary.to_dict()
    doc["pct_conventions"] = {
        "normalized": "100 * (r - r_random) / (r_oracle - r_random)",
        "raw": "100 * r / r_oracle",
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
    logger.info("%s on %s: mean reward %.3f +/- %.3f over %d episodes", config.policy, config.env,
                summary.mean_reward, summary.std_reward, summary.episodes)
    return summary


def run_train(config: ExperimentConfig, resume: Optional[str] = None) -> Trainer:
    """
    Train the graph policy; artifacts go to the output directory.

    Returns:
        Trainer (its ``log_frame()`` holds the training log)
    """
    out_dir = _prepare_out_dir(config.out_dir)
    save_config(config, os.path.join(out_dir, "config.json"))
    env = build_env(config)
    policy = policy_for_env(env, config.policy_config, config.train.seed)
    trainer = Trainer(env, policy, config.train, out_dir=out_dir, eval_env=build_env(config))
    trainer.set_verbose(True)
    if resume:
        trainer.resume(resume)
    trainer.train()
    logger.info("training finished after %d updates; checkpoint in %s", trainer.update, out_dir)
    return trainer


def default_level_grid(env, points=6):
    """Evenly spaced integer levels from 0 to the warehouse and the largest store capacity."""
    cap_w = int(env.capacity[0])
    cap_s = int(env.capacity[1:].max())
    warehouse = sorted({int(round(v)) for v in np.linspace(0, cap_w, points)})
    store = sorted({int(round(v)) for v in np.linspace(0, cap_s, points)})
    return warehouse, store


def run_sweep(config):
    """Order-up-to sweep on the configured supply chain; writes ``s_type_surface.csv``."""
    if config.env != "scim":
        raise ConfigError("env", "the order-up-to sweep needs the scim environment")
    out_dir = _prepare_out_dir(config.out_dir)
    env = build_env(config)
    warehouse, store = default_level_grid(env)
    grid = config.sweep or {}
    warehouse = grid.get("warehouse_levels", warehouse)
    store = grid.get("store_levels", store)
    return s_type_sweep(env, warehouse, store, config.seeds, config.backend,
                        path=os.path.join(out_dir, "s_type_surface.csv"))
