"""
Shared environment interface.

Every environment pre-samples all of its exogenous randomness (demand,
travel-time drift, passenger arrival order) at ``reset``. The realised
randomness is independent of the actions taken, so two policies evaluated on
the same seed see exactly the same world, and ``reveal_future`` can hand the
whole realisation to the oracle planner.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Literal, Optional, Tuple

import numpy as np

from ..exceptions import DomainError
from ..graph import FlowAction
from ..lcp import DesiredState, LcpResult, round_to_integer, solve_lcp

logger = logging.getLogger(__name__)


@dataclass
class Observation:
    """
    What a policy sees at one step.

    Attributes:
        graph: Graph snapshot valid for this step
        node_features: (n_nodes, node_dim) indexed by node position
        edge_features: (n_edges, edge_dim) indexed by edge position
        action_nodes: node positions the Dirichlet head distributes over
        production_nodes: node positions with a Gaussian production head
        step: current time step
    """

    graph: object
    node_features: np.ndarray
    edge_features: np.ndarray
    action_nodes: np.ndarray
    production_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    step: int = 0

    @property
    def node_dim(self):
        return self.node_features.shape[1]

    @property
    def edge_dim(self):
        return self.edge_features.shape[1]


@dataclass
class EnvAction:
    """
    Flows on the graph edges plus the environment-specific extras.

    Attributes:
        flows: FlowAction
        production: per production node amounts (supply chain)
        passenger_flows: (n, n) served counts replacing first-in-first-out
            passenger matching (vehicle routing)
    """

    flows: FlowAction
    production: np.ndarray = None
    passenger_flows: np.ndarray = None


@dataclass
class StepResult:
    """
    Outcome of one transition.

    ``info`` always carries ``step``; environments add their own breakdown
    (delivered mass, served demand, cost terms, overflow ...).
    """

    observation: Observation
    reward: float
    done: bool
    info: dict = field(default_factory=dict)

    @property
    def node_features(self):
        return self.observation.node_features

    @property
    def edge_features(self):
        return self.observation.edge_features


class NetworkEnv(ABC):
    """
    Base class of the three environments.

    Subclasses implement the transition, the features and the mapping between
    policy samples, desired states and control problems.
    """

    kind = None
    n_commodities = 1
    has_production = False

    def __init__(self, config):
        self.config = config
        self.rng = np.random.default_rng()
        self.state = None
        self.t = 0
        self.seed = None

    @property
    def episode_length(self):
        return self.config.episode_length

    @property
    def done(self):
        return self.t >= self.episode_length

    @property
    @abstractmethod
    def graph(self):
        """Graph snapshot of the current step."""

    @abstractmethod
    def reset(self, seed: Optional[int] = None) -> Observation:
        """Start a new episode and return its first Observation."""

    @abstractmethod
    def observe(self) -> Observation:
        """Observation of the current step."""

    @abstractmethod
    def step(self, action: EnvAction) -> StepResult:
        """Apply an EnvAction and return a StepResult."""

    @abstractmethod
    def build_lcp(self, desired, penalty_weight):
        """LcpModel for the current state; ``desired=None`` keeps only the reward."""

    @abstractmethod
    def desired_state(self, simplex, production=None):
        """DesiredState from a simplex point over ``observe().action_nodes``."""

    @abstractmethod
    def reveal_future(self):
        """Realised exogenous randomness from the current step to the end of the episode."""

    def zero_action(self):
        flows = FlowAction.zeros(self.graph.n_edges, self.n_commodities)
        production = np.zeros(len(self.observe().production_nodes)) if self.has_production else None
        return EnvAction(flows, production)

    def desired_from_sample(self, sample):
        """DesiredState from a PolicySample."""
        return self.desired_state(sample.simplex, sample.production)

    def control(
        self,
        desired: Optional[DesiredState],
        penalty_weight: float,
        backend: Literal["simplex", "highs"] = "simplex",
        integer: bool = True,
    ) -> Tuple[EnvAction, LcpResult]:
        """
        Solve the control problem and turn it into an action.

        A control problem without an optimal solution falls back to the zero
        action; the returned result then reports ``feasible == False``.

        Returns:
            tuple: (EnvAction, LcpResult)
        """
        model = self.build_lcp(desired, penalty_weight)
        result = solve_lcp(model, backend=backend)
        if not result.feasible:
            logger.warning("%s control problem %s at step %d, using the zero action",
                           self.kind, result.status.value, self.t)
            return self.zero_action(), result
        if integer:
            result = round_to_integer(result)
        production = result.production if self.has_production else None
        return EnvAction(result.flows, production), result

    def _require_running(self):
        if self.state is None:
            raise DomainError(f"{self.kind} environment must be reset before use")
        if self.done:
            raise DomainError(f"{self.kind} episode already finished at step {self.t}")

    @staticmethod
    def _spread(simplex, positions, n_nodes, available):
        """Integer per-position targets from simplex weights over ``positions``."""
        partial = DesiredState.from_simplex(simplex, available).target_quantities
        targets = np.zeros((n_nodes, partial.shape[1]))
        targets[np.asarray(positions, dtype=int)] = partial
        return targets


def extract_features(env: NetworkEnv) -> Tuple[np.ndarray, np.ndarray]:
    """``(node_features, edge_features)`` of the environment's current step."""
    if env.state is None:
        raise DomainError("environment has not been reset")
    obs = env.observe()
    return obs.node_features, obs.edge_features
