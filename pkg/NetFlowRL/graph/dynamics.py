"""
Transition and money arithmetic of the linear network model.

Departures are debited at the step they are decided; each departure is
credited at its destination ``travel_time`` steps later through the
``in_transit`` queue of the state. All functions are pure: they never mutate
their arguments.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..exceptions import DomainError, RejectedActionError
from .core import CommodityState, ExchangeSpec, FlowAction, Graph, Shipment

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-7


@dataclass(frozen=True)
class Violation:
    """One violated constraint of an action."""

    kind: str
    where: str
    amount: float

    def __str__(self):
        return f"{self.kind} at {self.where} (by {self.amount:.6g})"


@dataclass
class Constraints:
    """
    Which constraint families apply when validating an action.

    Attributes:
        nonnegative: True for every node, False for none, or a boolean mask over
            node positions (stores with backorders are exempt, for instance)
        capacity: enforce per-edge capacity on the commodity-summed flow
        capacity_override: per-edge capacities replacing the graph's own
            (the remaining capacity of an episode-wide budget, for instance)
        tol: absolute feasibility tolerance
    """

    nonnegative: object = True
    capacity: bool = True
    capacity_override: object = None
    tol: float = FEASIBILITY_TOL

    def nonnegative_mask(self, n_nodes):
        if self.nonnegative is True:
            return np.ones(n_nodes, dtype=bool)
        if self.nonnegative is False:
            return np.zeros(n_nodes, dtype=bool)
        return np.asarray(self.nonnegative, dtype=bool)

    def edge_capacity(self, graph):
        if self.capacity_override is not None:
            return np.asarray(self.capacity_override, dtype=float)
        return graph.capacities


def _check_flows(graph, flows):
    if flows.flows.shape[0] != graph.n_edges:
        raise DomainError(
            f"flow matrix has {flows.flows.shape[0]} rows for a graph with {graph.n_edges} edges"
        )


def net_flow(graph, flows, node, commodity, state=None):
    """
    Net flow into ``node`` for ``commodity`` over the coming transition.

    Inflow counts what materialises at the next step: shipments already in
    transit that arrive then, plus the new flows whose travel time is one step.
    Outflow counts every new departure, debited immediately.

    Args:
        graph: Graph snapshot
        flows: FlowAction
        node: node id
        commodity: commodity index
        state: optional CommodityState providing the in-transit queue

    Returns:
        float: inflow minus outflow
    """
    _check_flows(graph, flows)
    pos = graph.node_index(node)
    n_comm = flows.flows.shape[1]
    if not 0 <= int(commodity) < n_comm:
        raise DomainError(f"unknown commodity {commodity!r}")
    k = int(commodity)

    out = float(flows.flows[graph.src_index == pos, k].sum())
    arriving = (graph.dst_index == pos) & (graph.travel_times == 1)
    inflow = float(flows.flows[arriving, k].sum())
    if state is not None:
        inflow += float(state.arrivals(state.step + 1)[pos, k])
    return inflow - out


def flow_money(graph, flows, double_count=False):
    """
    Money generated by a set of flows: minus the cost-weighted flow sum.

    Each edge is charged once. ``double_count=True`` reproduces the node-wise
    reading that charges an edge as outflow of its source and again as inflow
    of its destination.
    """
    _check_flows(graph, flows)
    total = float(np.dot(graph.costs, flows.flows.sum(axis=1)))
    return -2.0 * total if double_count else -total


def apply_exchanges(state, spec, weights):
    """
    Commodity and money changes produced by exchange weights.

    Args:
        state: CommodityState (used for the commodity count)
        spec: ExchangeSpec
        weights: mapping node id -> weight vector of length ``spec.options(node)``

    Returns:
        tuple: (dict node id -> commodity change vector, total exchange money)
    """
    if spec is None:
        if any(np.any(np.asarray(w) != 0) for w in (weights or {}).values()):
            raise DomainError("exchange weights given without an exchange spec")
        return {}, 0.0
    if spec.n_commodities != state.n_commodities:
        raise DomainError(
            f"exchange spec covers {spec.n_commodities} commodities, state has {state.n_commodities}"
        )
    changes = {}
    money = 0.0
    for node, w in (weights or {}).items():
        node = int(node)
        w = np.asarray(w, dtype=float).ravel()
        n_opts = spec.options(node)
        if w.shape[0] != n_opts:
            raise DomainError(f"node {node}: expected {n_opts} exchange weights, got {w.shape[0]}")
        if n_opts == 0:
            continue
        result = spec.matrices[node] @ w
        changes[node] = result[:-1]
        money += float(result[-1])
    return changes, money


def _exchange_matrix(graph, state, changes):
    out = np.zeros_like(state.quantities)
    for node, delta in changes.items():
        out[graph.node_index(node)] += delta
    return out


def validate_action(
    state: CommodityState,
    graph: Graph,
    action: FlowAction,
    constraints: Optional[Constraints] = None,
    spec: Optional[ExchangeSpec] = None,
) -> List[Violation]:
    """
    List every constraint the action violates; an empty list means valid.

    Checks non-finite and negative flows, flows on inactive edges, capacity on the
    commodity-summed flow (closed: equality is allowed) and, where
    non-negativity applies, stock left after departures and exchanges.
    """
    constraints = constraints or Constraints()
    tol = constraints.tol
    _check_flows(graph, action)
    f = action.flows
    if f.shape[1] != state.n_commodities:
        raise DomainError(
            f"flow matrix has {f.shape[1]} commodities, state has {state.n_commodities}"
        )
    violations = []

    def edge_name(k):
        e = graph.edges[k]
        return f"edge {e.src}->{e.dst}"

    for k, c in zip(*np.nonzero(~np.isfinite(f))):
        violations.append(Violation("non-finite flow", f"{edge_name(k)}[{c}]", float(f[k, c])))

    for k, c in zip(*np.nonzero(f < -tol)):
        violations.append(Violation("negative flow", f"{edge_name(k)}[{c}]", float(-f[k, c])))

    inactive = ~graph.active_edge_mask()
    for k in np.flatnonzero(inactive & (np.abs(f).sum(axis=1) > tol)):
        violations.append(Violation("inactive edge", edge_name(k), float(np.abs(f[k]).sum())))

    if constraints.capacity:
        cap = constraints.edge_capacity(graph)
        excess = f.sum(axis=1) - cap
        for k in np.flatnonzero(excess > tol):
            violations.append(Violation("capacity", edge_name(k), float(excess[k])))

    mask = constraints.nonnegative_mask(graph.n_nodes)
    if mask.any():
        changes, _ = apply_exchanges(state, spec, action.exchange_weights)
        remaining = state.quantities - action.outflow(graph) + _exchange_matrix(graph, state, changes)
        for pos, c in zip(*np.nonzero(remaining < -tol)):
            if mask[pos]:
                violations.append(
                    Violation("negative stock", f"node {graph.nodes[pos]}[{c}]", float(-remaining[pos, c]))
                )
    return violations


def step_state(
    state: CommodityState,
    graph: Graph,
    action: FlowAction,
    spec: Optional[ExchangeSpec] = None,
    constraints: Optional[Constraints] = None,
    double_count: bool = False,
) -> CommodityState:
    """
    Advance the state by one step.

    Departures leave immediately and join the in-transit queue with arrival
    step ``t + travel_time``; everything due at ``t + 1`` is then credited.
    Exchanges apply at the node where they are decided.

    Raises:
        RejectedActionError: when validate_action reports any violation
    """
    violations = validate_action(state, graph, action, constraints, spec)
    if violations:
        logger.debug("rejecting action with %d violations", len(violations))
        raise RejectedActionError(violations)

    changes, exchange_money = apply_exchanges(state, spec, action.exchange_weights)
    quantities = state.quantities - action.outflow(graph) + _exchange_matrix(graph, state, changes)

    shipments = list(state.in_transit)
    times = graph.travel_times
    for k, c in zip(*np.nonzero(action.flows)):
        shipments.append(Shipment(
            state.step + int(times[k]), int(graph.dst_index[k]), int(c), float(action.flows[k, c])
        ))

    next_step = state.step + 1
    pending = []
    for s in shipments:
        if s.arrival_step <= next_step:
            quantities[s.node, s.commodity] += s.amount
        else:
            pending.append(s)

    money = state.money + flow_money(graph, action, double_count) + exchange_money
    return CommodityState(quantities, tuple(pending), money, next_step)
