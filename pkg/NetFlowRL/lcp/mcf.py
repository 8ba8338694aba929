"""
Control problem of the minimum-cost-flow environments.

Variables are one-step flows per active edge and commodity. The next-state
projection counts departures as committed to their destination, so the L1
distance to the desired state is ``|x_i + inflow_i - outflow_i - q_hat_i|``.
The reward term charges each unit its edge cost and credits ``lam`` for every
unit sent into a sink of its own commodity.
"""

import numpy as np

from ..exceptions import DomainError
from ..graph import Constraints
from ..lp import LpBuilder
from .base import LcpModel


def build_mcf_lcp(state, graph, desired, penalty_weight, lam=25.0, sinks=None,
                  capacity=None, include_reward=True):
    """
    Build the MCF control problem.

    Args:
        state: CommodityState with quantities of shape (n_nodes, n_commodities)
        graph: Graph snapshot (only active elements get variables)
        desired: DesiredState or None (None drops the distance term)
        penalty_weight: weight of the L1 distance, >= 0
        lam: reward per unit delivered to a sink
        sinks: per-commodity sequence of sink node ids rewarded for that commodity
        capacity: optional per-edge capacity on the commodity-summed flow
        include_reward: subtract the immediate reward from the objective

    Returns:
        LcpModel
    """
    if penalty_weight < 0:
        raise DomainError(f"penalty weight must be >= 0, got {penalty_weight}")
    active_nodes = graph.active_node_positions()
    if active_nodes.size == 0:
        raise DomainError("control problem on an empty active graph")
    n_comm = state.n_commodities
    sinks = sinks if sinks is not None else [()] * n_comm
    if len(sinks) != n_comm:
        raise DomainError(f"need one sink set per commodity ({n_comm}), got {len(sinks)}")
    sink_pos = [{graph.node_index(s) for s in group} for group in sinks]

    edge_mask = graph.active_edge_mask()
    costs = graph.costs
    b = LpBuilder()
    flow_index = -np.ones((graph.n_edges, n_comm), dtype=int)
    for e in np.flatnonzero(edge_mask):
        dst = graph.dst_index[e]
        for k in range(n_comm):
            cost = 0.0
            if include_reward:
                cost = costs[e] - (lam if dst in sink_pos[k] else 0.0)
            edge = graph.edges[e]
            flow_index[e, k] = b.add_variable(f"f[{edge.src},{edge.dst},{k}]", cost=cost)

    x = state.quantities
    for pos in active_nodes:
        out_edges = np.flatnonzero(edge_mask & (graph.src_index == pos))
        for k in range(n_comm):
            if out_edges.size:
                b.add_constraint({int(flow_index[e, k]): 1.0 for e in out_edges}, "<=", max(x[pos, k], 0.0))

    if capacity is not None:
        capacity = np.asarray(capacity, dtype=float)
        for e in np.flatnonzero(edge_mask & np.isfinite(capacity)):
            b.add_constraint({int(j): 1.0 for j in flow_index[e]}, "<=", capacity[e])

    targets = None
    if desired is not None and desired.target_quantities is not None:
        targets = desired.target_quantities
        if targets.shape != x.shape:
            raise DomainError(f"desired targets have shape {targets.shape}, state has {x.shape}")
    if targets is not None and penalty_weight > 0:
        for pos in active_nodes:
            for k in range(n_comm):
                expr = {}
                for e in np.flatnonzero(edge_mask & (graph.dst_index == pos)):
                    expr[int(flow_index[e, k])] = expr.get(int(flow_index[e, k]), 0.0) + 1.0
                for e in np.flatnonzero(edge_mask & (graph.src_index == pos)):
                    expr[int(flow_index[e, k])] = expr.get(int(flow_index[e, k]), 0.0) - 1.0
                b.add_abs_penalty(expr, penalty_weight, constant=x[pos, k] - targets[pos, k],
                                  name=f"d[{graph.nodes[pos]},{k}]")

    def distance(flows, production):
        if targets is None:
            return 0.0
        projected = x + flows.inflow(graph) - flows.outflow(graph)
        return np.abs(projected - targets)[active_nodes].sum()

    constraints = Constraints(nonnegative=True, capacity=capacity is not None, capacity_override=capacity)
    return LcpModel(b.build(), "mcf", graph, state, flow_index, constraints=constraints, distance_fn=distance)
