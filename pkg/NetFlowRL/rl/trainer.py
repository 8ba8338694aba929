"""
Training loop with logging, checkpoints and resumption.
"""

import logging
import os

import numpy as np
import pandas as pd

from ..exceptions import CheckpointError
from ..nn import GraphPolicy, PolicyConfig, load_checkpoint, save_checkpoint
from .a2c import a2c_update
from .config import penalty_weight
from .rollout import rollout

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["step", "mean_return", "policy_loss", "value_loss", "penalty_weight"]
TRAIN_SEED_OFFSET = 1_000_000


def policy_for_env(env, config, seed=0):
    """
    Build a policy sized for ``env``.

    The environment is reset with ``seed`` to read the feature widths.
    """
    obs = env.reset(seed)
    graph = obs.graph
    input_shape = (
        len(graph.active_node_positions()), int(graph.active_edge_mask().sum()),
        len(obs.action_nodes), len(obs.production_nodes),
    )
    return GraphPolicy(config, obs.node_dim, obs.edge_dim, heads=env.n_commodities,
                       production=env.has_production, seed=seed, input_shape=input_shape)


def policy_metadata(policy):
    return {
        "policy": policy.config.to_dict(),
        "node_dim": policy.node_dim,
        "edge_dim": policy.edge_dim,
        "heads": policy.heads,
        "production": policy.production,
        "input_shape": list(policy.input_shape) if policy.input_shape is not None else None,
    }


def load_policy(path):
    """Rebuild a policy from a checkpoint written by the trainer."""
    state, meta = load_checkpoint(path)
    if "policy" not in meta:
        raise CheckpointError(f"{path} carries no policy description")
    policy = GraphPolicy(PolicyConfig.from_dict(meta["policy"]), meta["node_dim"], meta["edge_dim"],
                         heads=meta.get("heads", 1), production=meta.get("production", False),
                         input_shape=meta.get("input_shape"))
    policy.params.load_state(state)
    return policy, meta


class Trainer:
    """
    A2C trainer for one environment.

    Args:
        env: NetworkEnv used for training rollouts
        policy: GraphPolicy
        config: TrainConfig
        out_dir: directory for the training log and checkpoints (optional)
        eval_env: environment for evaluation snapshots (defaults to ``env``)
    """

    def __init__(self, env, policy, config, out_dir=None, eval_env=None):
        self.env = env
        self.eval_env = eval_env if eval_env is not None else env
        self.policy = policy
        self.config = config.validate()
        self.schedule = config.schedule()
        self.out_dir = out_dir
        self.update = 0
        self.log = []
        self.eval_log = []
        self.verbose = False

    def set_verbose(self, flag):
        """Log every update at INFO instead of DEBUG"""
        self.verbose = flag

    def episode_seed(self, update, index):
        cfg = self.config
        return TRAIN_SEED_OFFSET + cfg.seed * 7919 + update * cfg.episodes_per_update + index

    def collect(self, update):
        """Training trajectories of ``update``."""
        cfg = self.config
        rng = np.random.default_rng([cfg.seed, update])
        weight = penalty_weight(self.schedule, update)
        trajectories = []
        for i in range(cfg.episodes_per_update):
            self.env.reset(self.episode_seed(update, i))
            trajectories.append(rollout(self.env, self.policy, cfg.rollout_length, rng, weight, cfg.backend))
        return trajectories, weight

    def evaluate(self, episodes=None, seeds=None):
        """Mean return of deterministic rollouts at the final penalty weight."""
        cfg = self.config
        seeds = seeds if seeds is not None else list(range(cfg.seed, cfg.seed + (episodes or cfg.eval_episodes)))
        returns = []
        for seed in seeds:
            self.eval_env.reset(seed)
            traj = rollout(self.eval_env, self.policy, rng=np.random.default_rng(seed),
                           penalty_weight=self.schedule.final, backend=cfg.backend, deterministic=True)
            returns.append(traj.total_reward)
        return float(np.mean(returns))

    def train(self, updates=None):
        """
        Run updates until ``updates`` (default: the configured total) are done.

        Returns:
            pandas.DataFrame of the training log
        """
        cfg = self.config
        total = cfg.updates if updates is None else updates
        while self.update < total:
            trajectories, weight = self.collect(self.update)
            diag = a2c_update(self.policy, trajectories, cfg)
            row = {
                "step": self.update,
                "mean_return": diag["mean_return"],
                "policy_loss": diag["policy_loss"],
                "value_loss": diag["value_loss"],
                "penalty_weight": weight,
                "grad_norm": diag["grad_norm"],
                "fallbacks": sum(t.fallbacks for t in trajectories),
                "skipped": diag["skipped"],
            }
            self.log.append(row)
            level = logging.INFO if self.verbose else logging.DEBUG
            logger.log(level, "update %d: return %.3f, policy loss %.4g, value loss %.4g, penalty %.3g",
                       self.update, row["mean_return"], row["policy_loss"], row["value_loss"], weight)
            self.update += 1

            if cfg.eval_every and self.update % cfg.eval_every == 0:
                score = self.evaluate()
                self.eval_log.append({"step": self.update, "eval_return": score})
                logger.info("evaluation after %d updates: mean return %.3f", self.update, score)
            if cfg.checkpoint_every and self.update % cfg.checkpoint_every == 0 and self.out_dir:
                self.save(os.path.join(self.out_dir, "checkpoints", f"update_{self.update:06d}.json"))
                self.write_logs()

        if self.out_dir:
            self.save(os.path.join(self.out_dir, "checkpoint.json"))
            self.write_logs()
        return self.log_frame()

    def log_frame(self):
        frame = pd.DataFrame(self.log)
        if frame.empty:
            return pd.DataFrame(columns=LOG_COLUMNS)
        extra = [c for c in frame.columns if c not in LOG_COLUMNS]
        return frame[LOG_COLUMNS + extra]

    def write_logs(self):
        os.makedirs(self.out_dir, exist_ok=True)
        self.log_frame().to_csv(os.path.join(self.out_dir, "train_log.csv"), index=False)
        if self.eval_log:
            pd.DataFrame(self.eval_log).to_csv(os.path.join(self.out_dir, "eval_log.csv"), index=False)

    def save(self, path):
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        meta = policy_metadata(self.policy)
        meta.update({"update": self.update, "env": self.env.kind, "train": self.config.to_dict()})
        return save_checkpoint(self.policy.params, path, meta)

    def resume(self, path):
        """
        Continue from a checkpoint.

        Parameters and the update counter come from the checkpoint; an existing
        training log in ``out_dir`` is truncated to the restored update.
        """
        state, meta = load_checkpoint(path)
        self.policy.params.load_state(state)
        self.update = int(meta.get("update", 0))
        log_path = os.path.join(self.out_dir, "train_log.csv") if self.out_dir else None
        if log_path and os.path.exists(log_path):
            frame = pd.read_csv(log_path)
            self.log = frame[frame["step"] < self.update].to_dict("records")
        logger.info("resumed from %s at update %d", path, self.update)
        return self.update
