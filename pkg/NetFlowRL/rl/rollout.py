"""
Episode collection for the bi-level policy.

Each step maps the observation to a sampled desired state, solves the control
problem for it and applies the resulting action. Only the sample and its
log-density are stored for the update; the control problem is never
differentiated.
"""

import logging
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from ..envs.base import NetworkEnv
from ..exceptions import RejectedActionError
from ..nn import GraphPolicy

logger = logging.getLogger(__name__)


@dataclass
class Transition:
    """
    One step of a trajectory.

    Attributes:
        observation: Observation the sample was drawn for
        sample: PolicySample
        action: EnvAction applied to the environment
        reward: realised reward
        value: critic estimate at sampling time
        log_prob: log-density of the sample at sampling time
        done: whether the step ended the episode
        fallback: the control problem failed or the action was rejected, and
            the zero action was applied instead
        info: the environment's step info
    """

    observation: object
    sample: object
    action: object
    reward: float
    value: float
    log_prob: float
    done: bool = False
    fallback: bool = False
    info: dict = field(default_factory=dict)


@dataclass
class Trajectory:
    """
    Transitions of one rollout.

    ``final_observation`` is the observation after the last transition; the
    update bootstraps from its value when the rollout stopped before the
    episode ended.
    """

    transitions: list = field(default_factory=list)
    seed: int = None
    final_observation: object = None

    def __len__(self):
        return len(self.transitions)

    def append(self, transition):
        self.transitions.append(transition)

    @property
    def rewards(self):
        return np.array([t.reward for t in self.transitions], dtype=float)

    @property
    def values(self):
        return np.array([t.value for t in self.transitions], dtype=float)

    @property
    def log_probs(self):
        return np.array([t.log_prob for t in self.transitions], dtype=float)

    @property
    def total_reward(self):
        return float(self.rewards.sum())

    @property
    def terminal(self):
        return bool(self.transitions) and self.transitions[-1].done

    @property
    def fallbacks(self):
        return sum(t.fallback for t in self.transitions)


def apply_control(env, desired, penalty_weight, backend="simplex"):
    """
    Solve the control problem for ``desired`` and step the environment.

    An action the environment rejects is replaced by the zero action.

    Returns:
        tuple: (EnvAction, StepResult, fallback flag)
    """
    action, result = env.control(desired, penalty_weight, backend=backend)
    fallback = not result.feasible
    try:
        step = env.step(action)
    except RejectedActionError as exc:
        logger.warning("%s action rejected at step %d (%s), using the zero action", env.kind, env.t, exc)
        action = env.zero_action()
        step = env.step(action)
        fallback = True
    return action, step, fallback


def rollout(
    env: NetworkEnv,
    policy: GraphPolicy,
    steps: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    penalty_weight: float = 0.0,
    backend: Literal["simplex", "highs"] = "simplex",
    deterministic: bool = False,
) -> "Trajectory":
    """
    Run the policy on a reset environment.

    Args:
        env: NetworkEnv, already reset
        policy: GraphPolicy
        steps: maximum number of steps (default: until the episode ends)
        rng: numpy Generator for the policy samples
        penalty_weight: weight of the distance term in the control problem
        backend: LP backend of the control problem
        deterministic: use distribution means instead of samples

    Returns:
        Trajectory
    """
    rng = rng if rng is not None else np.random.default_rng()
    traj = Trajectory(seed=env.seed)
    obs = env.observe()
    while not env.done and (steps is None or len(traj) < steps):
        sample = policy.sample(obs, rng, deterministic=deterministic)
        desired = env.desired_from_sample(sample)
        action, step, fallback = apply_control(env, desired, penalty_weight, backend)
        traj.append(Transition(obs, sample, action, float(step.reward), sample.value, sample.log_prob,
                               step.done, fallback, step.info))
        obs = step.observation
    traj.final_observation = obs
    if traj.fallbacks:
        logger.info("rollout used the zero action on %d of %d steps", traj.fallbacks, len(traj))
    return traj
