"""
Shared types of the linear control problems.

A builder turns (state, graph, desired next state) into an ``LcpModel``: the
LinearProgram plus the bookkeeping needed to read flows and production back
out of a solution. ``solve_lcp`` runs the solver and decodes the result.
"""

import logging
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from ..exceptions import DomainError
from ..graph import Constraints, FlowAction
from ..lp import LpStatus, TwoPhaseSimplex, solve

logger = logging.getLogger(__name__)


def floor_allocation(q_tilde, available):
    """
    Integer targets from a simplex point: ``floor(q_tilde * available)``.

    The result sums to at most ``available`` and leaves less than one unit per
    entry unallocated.
    """
    q_tilde = np.asarray(q_tilde, dtype=float)
    if np.any(q_tilde < 0):
        raise DomainError("simplex weights must be non-negative")
    targets = np.floor(q_tilde * float(available) + 1e-9)
    excess = targets.sum() - np.floor(available + 1e-9)
    if excess > 0:
        # guard against weights summing marginally above one
        for k in np.argsort(-targets, kind="stable")[: int(excess)]:
            targets[k] -= 1.0
    return targets


@dataclass
class DesiredState:
    """
    The policy's requested next state.

    Attributes:
        target_quantities: (n_nodes, n_commodities) targets indexed by node
            position; ``None`` when the problem has no node targets
        production: per-warehouse production requests, or ``None``
    """

    target_quantities: np.ndarray = None
    production: np.ndarray = None

    def __post_init__(self):
        if self.target_quantities is not None:
            q = np.array(self.target_quantities, dtype=float)
            self.target_quantities = q[:, None] if q.ndim == 1 else q
        if self.production is not None:
            self.production = np.atleast_1d(np.array(self.production, dtype=float))

    @classmethod
    def from_simplex(cls, q_tilde, available, production=None):
        """
        Build targets per commodity from simplex weights.

        Args:
            q_tilde: (n_nodes,) or (n_nodes, n_commodities) simplex weights
            available: scalar or per-commodity available mass M
            production: optional production requests
        """
        q_tilde = np.asarray(q_tilde, dtype=float)
        if q_tilde.ndim == 1:
            q_tilde = q_tilde[:, None]
        available = np.broadcast_to(np.asarray(available, dtype=float), (q_tilde.shape[1],))
        targets = np.column_stack([floor_allocation(q_tilde[:, k], available[k]) for k in range(q_tilde.shape[1])])
        return cls(targets, production)


@dataclass
class LcpModel:
    """
    A built control problem.

    Attributes:
        program: the LinearProgram
        kind: "mcf", "scim" or "dvr"
        graph: graph snapshot the flows live on
        state: state the problem was built from
        flow_index: (n_edges, n_commodities) variable index per flow, -1 if absent
        production_index: variable index per production node
        production_nodes: node positions of the production variables
        constraints: constraint families an action must satisfy
        inflow_cap: per-node bound on committed inflow (inf where unbounded)
        distance_fn: callable(flows, production) -> achieved distance
    """

    program: object
    kind: str
    graph: object
    state: object
    flow_index: np.ndarray
    production_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    production_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    constraints: Constraints = field(default_factory=Constraints)
    inflow_cap: np.ndarray = None
    production_cap: np.ndarray = None
    distance_fn: object = None

    def decode(self, x):
        flows = np.zeros(self.flow_index.shape)
        present = self.flow_index >= 0
        flows[present] = x[self.flow_index[present]]
        flows = np.maximum(flows, 0.0)
        production = np.maximum(x[self.production_index], 0.0) if self.production_index.size else np.zeros(0)
        return FlowAction(flows), production

    def distance(self, flows, production):
        return float(self.distance_fn(flows, production)) if self.distance_fn else 0.0


@dataclass
class LcpResult:
    """
    Decoded solution of a control problem.

    ``flows`` and ``production`` are all-zero when the status is not optimal.
    """

    flows: FlowAction
    production: np.ndarray
    distance: float
    objective: float
    status: LpStatus
    model: LcpModel = None

    @property
    def feasible(self):
        return self.status is LpStatus.OPTIMAL


def solve_lcp(
    model: LcpModel,
    backend: Literal["simplex", "highs"] = "simplex",
    solver: Optional[TwoPhaseSimplex] = None,
) -> LcpResult:
    """Solve a built control problem and decode its action."""
    sol = solve(model.program, backend=backend, solver=solver)
    if not sol.is_optimal:
        logger.debug("%s control problem returned %s", model.kind, sol.status.value)
        flows = FlowAction.zeros(*model.flow_index.shape)
        production = np.zeros(model.production_index.size)
        return LcpResult(flows, production, float("nan"), float("nan"), sol.status, model)
    flows, production = model.decode(sol.x)
    return LcpResult(flows, production, model.distance(flows, production), sol.objective, sol.status, model)
