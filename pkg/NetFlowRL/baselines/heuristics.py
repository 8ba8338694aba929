"""
Random, greedy and equally-balanced policies.
"""

import logging

import numpy as np

from ..envs.scim import average_production
from ..exceptions import DomainError
from .base import Controller

logger = logging.getLogger(__name__)

# shortfall price of the balancing problem; above any single rebalancing cost
BALANCE_WEIGHT = 1000.0


def random_policy(env, rng, concentration=1.0):
    """
    Desired state drawn from a flat Dirichlet over the action nodes.

    Production (supply chain) is fixed at the episode-mean demand.

    Returns:
        DesiredState
    """
    if concentration <= 0:
        raise DomainError(f"concentration must be > 0, got {concentration}")
    obs = env.observe()
    k = len(obs.action_nodes)
    alpha = np.full(k, float(concentration))
    simplex = np.column_stack([rng.dirichlet(alpha) for _ in range(env.n_commodities)])
    production = None
    if env.has_production:
        production = np.full(len(obs.production_nodes), average_production(env.config))
    return env.desired_state(simplex, production)


def greedy_policy(env, backend="simplex"):
    """Action maximising the immediate reward: the control problem without its distance term."""
    action, _ = env.control(None, 0.0, backend=backend)
    return action


def equally_balanced(env):
    """
    Targets spreading the idle fleet equally over the stations.

    Returns:
        DesiredState
    """
    if env.kind != "dvr":
        raise DomainError("equal balancing applies to the vehicle-routing environment")
    n = env.graph.n_nodes
    return env.desired_state(np.full(n, 1.0 / n))


class RandomController(Controller):
    name = "random"

    def __init__(self, penalty_weight=10.0, backend="simplex", concentration=1.0):
        self.penalty_weight = penalty_weight
        self.backend = backend
        self.concentration = concentration

    def act(self, env, rng):
        desired = random_policy(env, rng, self.concentration)
        action, result = env.control(desired, self.penalty_weight, backend=self.backend)
        return action, {"fallback": not result.feasible}


class GreedyController(Controller):
    name = "greedy"

    def __init__(self, backend="simplex"):
        self.backend = backend

    def act(self, env, rng):
        action, result = env.control(None, 0.0, backend=self.backend)
        return action, {"fallback": not result.feasible}


class EquallyBalancedController(Controller):
    name = "equally_balanced"

    def __init__(self, backend="simplex", penalty_weight=BALANCE_WEIGHT):
        self.backend = backend
        self.penalty_weight = penalty_weight

    def act(self, env, rng):
        action, result = env.control(equally_balanced(env), self.penalty_weight, backend=self.backend)
        return action, {"fallback": not result.feasible}
