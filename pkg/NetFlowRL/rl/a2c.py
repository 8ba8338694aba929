"""
Advantage actor-critic update.

The policy gradient uses the likelihood-ratio estimator on stored samples:
``-sum A * log pi(sample)`` with the advantage held constant, plus a squared
value error. One plain gradient step with norm clipping is taken per batch.
"""

import logging
from typing import Dict, List, Tuple

import numpy as np

from ..exceptions import DomainError
from ..nn import GraphPolicy, Tensor, backward
from .config import TrainConfig
from .rollout import Trajectory

logger = logging.getLogger(__name__)

_STD_FLOOR = 1e-8


def returns_and_advantages(traj: Trajectory, gamma: float, bootstrap: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Discounted returns by backward recursion and ``return - value``.

    Args:
        traj: Trajectory (or anything with ``rewards`` and ``values`` arrays)
        gamma: discount factor in (0, 1]
        bootstrap: value of the state after the last transition

    Returns:
        tuple: (returns, advantages) arrays
    """
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    rewards = np.asarray(traj.rewards, dtype=float)
    values = np.asarray(traj.values, dtype=float)
    returns = np.zeros_like(rewards)
    running = float(bootstrap)
    for t in range(rewards.size - 1, -1, -1):
        running = rewards[t] + gamma * running
        returns[t] = running
    return returns, returns - values


def normalize(advantages):
    """Zero mean, and unit variance when the spread is not degenerate."""
    adv = np.asarray(advantages, dtype=float)
    if adv.size < 2:
        return adv.copy()
    adv = adv - adv.mean()
    std = adv.std()
    return adv / std if std > _STD_FLOOR else adv


def bootstrap_value(policy: GraphPolicy, traj: Trajectory) -> float:
    """Value of the state after a truncated trajectory; 0 after a terminal step."""
    if traj.terminal or traj.final_observation is None:
        return 0.0
    return policy.value(traj.final_observation)


def a2c_update(policy: GraphPolicy, trajectories: List[Trajectory], cfg: TrainConfig) -> Dict[str, float]:
    """
    One synchronous A2C step on a batch of trajectories.

    Args:
        policy: GraphPolicy; its parameters are updated in place
        trajectories: non-empty list of Trajectory
        cfg: TrainConfig

    Returns:
        dict of diagnostics: mean_return, policy_loss, value_loss, entropy,
        grad_norm, steps and skipped (True when the loss was not finite)
    """
    trajectories = [t for t in trajectories if len(t)]
    if not trajectories:
        raise DomainError("a2c_update needs at least one non-empty trajectory")

    returns, advantages = [], []
    for traj in trajectories:
        r, a = returns_and_advantages(traj, cfg.gamma, bootstrap_value(policy, traj))
        returns.append(r)
        advantages.append(a)
    returns = np.concatenate(returns)
    advantages = np.concatenate(advantages)
    if cfg.normalize_advantages:
        advantages = normalize(advantages)

    policy.params.zero_grad()
    policy_loss = Tensor(0.0)
    value_loss = Tensor(0.0)
    entropy = Tensor(0.0)
    i = 0
    for traj in trajectories:
        for tr in traj.transitions:
            log_prob, value, ent = policy.evaluate(tr.observation, tr.sample)
            policy_loss = policy_loss - log_prob * float(advantages[i])
            value_loss = value_loss + (value - float(returns[i])) ** 2
            entropy = entropy + ent
            i += 1

    loss = policy_loss + value_loss * cfg.value_weight - entropy * cfg.entropy_weight
    diagnostics = {
        "mean_return": float(np.mean([t.total_reward for t in trajectories])),
        "policy_loss": float(policy_loss.item()),
        "value_loss": float(value_loss.item()),
        "entropy": float(entropy.item()),
        "grad_norm": 0.0,
        "steps": int(i),
        "skipped": False,
    }
    if not np.isfinite(loss.item()):
        logger.warning("non-finite A2C loss %s, skipping the update", loss.item())
        diagnostics["skipped"] = True
        return diagnostics

    backward(loss)
    norm = policy.params.grad_norm()
    diagnostics["grad_norm"] = norm
    if not np.isfinite(norm):
        logger.warning("non-finite gradient norm, skipping the update")
        policy.params.zero_grad()
        diagnostics["skipped"] = True
        return diagnostics
    scale = 1.0
    if cfg.grad_clip is not None and norm > cfg.grad_clip:
        scale = cfg.grad_clip / norm
    for param in policy.params:
        param.data -= cfg.learning_rate * scale * param.grad
    policy.params.zero_grad()
    return diagnostics
