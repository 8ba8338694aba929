"""Trained policy behind the controller interface."""

from ..baselines.base import Controller


class PolicyController(Controller):
    """
    Acts with a GraphPolicy through the control problem.

    Args:
        policy: GraphPolicy
        penalty_weight: distance weight of the control problem
        backend: LP backend
        deterministic: act on distribution means instead of samples
    """

    name = "graph_rl"

    def __init__(self, policy, penalty_weight=10.0, backend="simplex", deterministic=True):
        self.policy = policy
        self.penalty_weight = penalty_weight
        self.backend = backend
        self.deterministic = deterministic

    def act(self, env, rng):
        sample = self.policy.sample(env.observe(), rng, deterministic=self.deterministic)
        desired = env.desired_from_sample(sample)
        action, result = env.control(desired, self.penalty_weight, backend=self.backend)
        return action, {"fallback": not result.feasible}
