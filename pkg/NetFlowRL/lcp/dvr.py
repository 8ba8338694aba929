"""
Rebalancing problem of the vehicle-routing environment.

Minimum-cost movement of idle vehicles along station-graph edges so that
every station ends with at least its desired number of vehicles.
"""

import numpy as np

from ..exceptions import DomainError
from ..graph import Constraints
from ..lp import LpBuilder
from .base import LcpModel


def build_dvr_lcp(state, graph, desired, penalty_weight=None):
    """
    Build the rebalancing problem.

    ``penalty_weight=None`` imposes the station targets as hard constraints
    (an unreachable target makes the program infeasible). A number relaxes each
    target with a shortfall variable charged ``penalty_weight`` per vehicle;
    0 drops the targets altogether.

    Args:
        state: CommodityState whose single commodity is the idle fleet
        graph: station Graph (edge cost = rebalancing cost per vehicle)
        desired: DesiredState with per-station targets, or None
        penalty_weight: None, or a weight >= 0

    Returns:
        LcpModel
    """
    if state.n_commodities != 1:
        raise DomainError("the rebalancing problem has a single commodity")
    q = state.quantities[:, 0]
    q_hat = None
    if desired is not None and desired.target_quantities is not None:
        q_hat = desired.target_quantities[:, 0]
        if q_hat.sum() > q.sum() + 1e-7:
            raise DomainError(f"desired fleet {q_hat.sum():g} exceeds available vehicles {q.sum():g}")
    if penalty_weight is not None and penalty_weight < 0:
        raise DomainError(f"penalty weight must be >= 0, got {penalty_weight}")

    edge_mask = graph.active_edge_mask()
    costs = graph.costs
    b = LpBuilder()
    flow_index = -np.ones((graph.n_edges, 1), dtype=int)
    for e in np.flatnonzero(edge_mask):
        edge = graph.edges[e]
        flow_index[e, 0] = b.add_variable(f"r[{edge.src},{edge.dst}]", cost=costs[e])

    for pos in graph.active_node_positions():
        out_edges = np.flatnonzero(edge_mask & (graph.src_index == pos))
        in_edges = np.flatnonzero(edge_mask & (graph.dst_index == pos))
        out = {int(flow_index[e, 0]): 1.0 for e in out_edges}
        if out:
            b.add_constraint(out, "<=", max(q[pos], 0.0))
        if q_hat is None or (penalty_weight is not None and penalty_weight == 0):
            continue
        net = {int(flow_index[e, 0]): 1.0 for e in in_edges}
        for j in out:
            net[j] = net.get(j, 0.0) - 1.0
        if penalty_weight is not None:
            net[b.add_variable(f"short[{graph.nodes[pos]}]", cost=penalty_weight)] = 1.0
        b.add_constraint(net, ">=", q_hat[pos] - q[pos])

    def distance(flows, production):
        if q_hat is None:
            return 0.0
        projected = q + flows.inflow(graph)[:, 0] - flows.outflow(graph)[:, 0]
        return np.maximum(q_hat - projected, 0.0).sum()

    return LcpModel(b.build(), "dvr", graph, state, flow_index,
                    constraints=Constraints(nonnegative=True, capacity=False), distance_fn=distance)
