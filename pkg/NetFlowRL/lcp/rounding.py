"""Integer post-processing of control-problem solutions."""

from typing import Optional

import numpy as np

from ..graph import CommodityState, FlowAction
from .base import LcpResult

_FRACTION_TOL = 1e-9


def round_to_integer(result: LcpResult, state: Optional[CommodityState] = None) -> LcpResult:
    """
    Round flows and production to integers without breaking feasibility.

    Flows are floored; then, in order of decreasing fractional part (ties by
    edge index), each flow is raised by one unit when source stock, edge
    capacity and destination inflow bounds still hold. Production is floored
    and rounded up when its fraction is at least one half and warehouse
    capacity allows.

    Args:
        result: LcpResult carrying the model it came from
        state: CommodityState; defaults to the model's state

    Returns:
        LcpResult with integer flows and production
    """
    model = result.model
    if model is None:
        raise ValueError("round_to_integer needs a result produced by solve_lcp")
    state = state if state is not None else model.state
    graph = model.graph
    cons = model.constraints

    raw = result.flows.flows
    flows = np.floor(raw + _FRACTION_TOL)
    fractions = raw - flows

    stock = state.quantities.copy()
    nonneg = cons.nonnegative_mask(graph.n_nodes)
    out_room = np.where(nonneg[:, None], stock, np.inf) - FlowAction(flows).outflow(graph)
    cap = cons.edge_capacity(graph) if cons.capacity else np.full(graph.n_edges, np.inf)
    cap_room = cap - flows.sum(axis=1)
    in_cap = model.inflow_cap if model.inflow_cap is not None else np.full(graph.n_nodes, np.inf)
    in_room = in_cap - FlowAction(flows).inflow(graph).sum(axis=1)

    order = sorted(
        ((e, k) for e, k in zip(*np.nonzero(fractions > _FRACTION_TOL))),
        key=lambda ek: (-fractions[ek], ek[0], ek[1]),
    )
    for e, k in order:
        src, dst = graph.src_index[e], graph.dst_index[e]
        if out_room[src, k] >= 1.0 - 1e-9 and cap_room[e] >= 1.0 - 1e-9 and in_room[dst] >= 1.0 - 1e-9:
            flows[e, k] += 1.0
            out_room[src, k] -= 1.0
            cap_room[e] -= 1.0
            in_room[dst] -= 1.0

    production = result.production
    if production.size:
        production = np.floor(production + _FRACTION_TOL)
        frac = result.production - production
        outflow = FlowAction(flows).outflow(graph)[:, 0]
        for i, pos in enumerate(model.production_nodes):
            room = np.inf if model.production_cap is None else model.production_cap[i] + outflow[pos]
            if frac[i] >= 0.5 and production[i] + 1.0 <= room + 1e-9:
                production[i] += 1.0

    rounded = FlowAction(flows)
    return LcpResult(rounded, production, model.distance(rounded, production),
                     result.objective, result.status, model)
