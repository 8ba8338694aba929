"""
Controller interface and the episode loop shared by every policy.
"""

import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..envs.base import NetworkEnv
from ..exceptions import RejectedActionError

logger = logging.getLogger(__name__)


class Controller(ABC):
    """
    A policy that acts on an environment step by step.

    ``reset`` is called once per episode after the environment was reset;
    ``act`` returns the action for the current step and a dict of flags
    (``fallback`` when the control problem failed).
    """

    name = "controller"

    def reset(self, env):
        pass

    @abstractmethod
    def act(self, env, rng):
        """Return (EnvAction, info dict) for the current step."""


@dataclass
class EpisodeRecord:
    """
    Outcome of one evaluation episode.

    Attributes:
        seed: environment seed
        total_reward: undiscounted sum of rewards
        rewards: per-step rewards
        steps: number of steps taken
        fallbacks: steps that used the zero action
        served: served passenger trips (vehicle routing) or units sold
            (supply chain); 0 elsewhere
        requests: passenger requests or store demand; 0 elsewhere
        success: no fallback happened and the environment reports success
        decision_seconds: wall-clock time of every ``act`` call
    """

    seed: int
    total_reward: float = 0.0
    rewards: list = field(default_factory=list)
    steps: int = 0
    fallbacks: int = 0
    served: float = 0.0
    requests: float = 0.0
    success: bool = True
    decision_seconds: list = field(default_factory=list)

    @property
    def mean_decision_seconds(self):
        return float(np.mean(self.decision_seconds)) if self.decision_seconds else 0.0


def play_episode(
    env: NetworkEnv,
    controller: Controller,
    seed: int,
    rng: Optional[np.random.Generator] = None,
) -> EpisodeRecord:
    """
    Run ``controller`` for a whole episode of ``env`` seeded with ``seed``.

    A rejected action is replaced by the zero action and counted as a fallback.

    Returns:
        EpisodeRecord
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    env.reset(seed)
    controller.reset(env)
    record = EpisodeRecord(seed)
    while not env.done:
        started = time.perf_counter()
        action, info = controller.act(env, rng)
        record.decision_seconds.append(time.perf_counter() - started)
        fallback = bool(info.get("fallback", False))
        try:
            step = env.step(action)
        except RejectedActionError as exc:
            logger.warning("%s rejected the %s action at step %d: %s", env.kind, controller.name, env.t, exc)
            step = env.step(env.zero_action())
            fallback = True
        record.rewards.append(float(step.reward))
        record.fallbacks += int(fallback)
        record.served += float(step.info.get("served", step.info.get("sales", 0.0)))
        record.requests += float(step.info.get("requests", step.info.get("demand", 0.0)))
    record.steps = len(record.rewards)
    record.total_reward = float(np.sum(record.rewards))
    record.success = record.fallbacks == 0 and bool(getattr(env, "success", True))
    return record
