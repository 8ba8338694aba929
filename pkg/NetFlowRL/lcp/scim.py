"""
Control problem of the supply-chain environment.

Stores receive shipments from warehouses; warehouses order production. The
problem keeps shipments and production as close as possible (L1) to the
requested store inflows and production, subject to store and warehouse
capacities and warehouse stock.
"""

import numpy as np

from ..exceptions import DomainError
from ..graph import Constraints
from ..lp import LpBuilder
from .base import LcpModel


def build_scim_lcp(state, graph, desired, demand, capacity, warehouses, stores,
                   penalty_weight=1.0, include_reward=False, production_cost=0.0):
    """
    Build the SCIM control problem.

    Constraints per store: inflow equals the request up to slack, and
    ``q + inflow - d <= c``. Per warehouse: outflow is bounded by stock,
    ``q + w - outflow <= c`` and production ``w = w_hat`` up to slack, ``w >= 0``.

    Args:
        state: CommodityState, single commodity (store stock may be negative)
        graph: Graph with warehouse -> store edges (cost = transport cost)
        desired: DesiredState with store targets (indexed by node position) and
            per-warehouse production, or None for no distance term
        demand: per-node demand of the current step
        capacity: per-node storage capacity
        warehouses: node ids of warehouses
        stores: node ids of stores
        penalty_weight: weight of the L1 slack terms (0 drops them)
        include_reward: add production and transport costs to the objective
        production_cost: unit production cost used when include_reward is set

    Returns:
        LcpModel
    """
    if penalty_weight < 0:
        raise DomainError(f"penalty weight must be >= 0, got {penalty_weight}")
    if state.n_commodities != 1:
        raise DomainError("the supply-chain problem has a single commodity")
    q = state.quantities[:, 0]
    demand = np.asarray(demand, dtype=float)
    capacity = np.asarray(capacity, dtype=float)
    w_pos = np.array([graph.node_index(n) for n in warehouses], dtype=int)
    s_pos = np.array([graph.node_index(n) for n in stores], dtype=int)

    q_hat = w_hat = None
    if desired is not None:
        if desired.target_quantities is not None:
            q_hat = desired.target_quantities[:, 0]
        if desired.production is not None:
            w_hat = desired.production
            if w_hat.shape != (w_pos.size,):
                raise DomainError(f"need {w_pos.size} production requests, got {w_hat.shape}")

    edge_mask = graph.active_edge_mask()
    b = LpBuilder()
    flow_index = -np.ones((graph.n_edges, 1), dtype=int)
    for e in np.flatnonzero(edge_mask):
        edge = graph.edges[e]
        cost = edge.cost if include_reward else 0.0
        flow_index[e, 0] = b.add_variable(f"f[{edge.src},{edge.dst}]", cost=cost)
    production_index = np.array([
        b.add_variable(f"w[{graph.nodes[p]}]", cost=production_cost if include_reward else 0.0)
        for p in w_pos
    ], dtype=int)

    inflow_cap = np.full(graph.n_nodes, np.inf)
    for pos in s_pos:
        in_edges = np.flatnonzero(edge_mask & (graph.dst_index == pos))
        expr = {int(flow_index[e, 0]): 1.0 for e in in_edges}
        inflow_cap[pos] = capacity[pos] - q[pos] + demand[pos]
        if expr:
            b.add_constraint(expr, "<=", inflow_cap[pos])
        if q_hat is not None and penalty_weight > 0:
            b.add_abs_penalty(expr, penalty_weight, constant=-q_hat[pos], name=f"ef[{graph.nodes[pos]}]")

    production_cap = np.zeros(w_pos.size)
    for i, pos in enumerate(w_pos):
        out_edges = np.flatnonzero(edge_mask & (graph.src_index == pos))
        out = {int(flow_index[e, 0]): 1.0 for e in out_edges}
        if out:
            b.add_constraint(out, "<=", max(q[pos], 0.0))
        row = {int(production_index[i]): 1.0}
        row.update({j: -1.0 for j in out})
        b.add_constraint(row, "<=", capacity[pos] - q[pos])
        production_cap[i] = capacity[pos] - q[pos]
        if w_hat is not None and penalty_weight > 0:
            b.add_abs_penalty({int(production_index[i]): 1.0}, penalty_weight, constant=-w_hat[i],
                              name=f"ew[{graph.nodes[pos]}]")

    def distance(flows, production):
        total = 0.0
        if q_hat is not None:
            inflow = flows.inflow(graph)[:, 0]
            total += np.abs(inflow[s_pos] - q_hat[s_pos]).sum()
        if w_hat is not None:
            total += np.abs(production - w_hat).sum()
        return total

    nonneg = np.zeros(graph.n_nodes, dtype=bool)
    nonneg[w_pos] = True
    return LcpModel(
        b.build(), "scim", graph, state, flow_index,
        production_index=production_index,
        production_nodes=w_pos,
        constraints=Constraints(nonnegative=nonneg, capacity=False),
        inflow_cap=inflow_cap,
        production_cap=production_cap,
        distance_fn=distance,
    )
