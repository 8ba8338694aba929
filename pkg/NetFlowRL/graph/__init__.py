"""
Graph snapshots, commodity states and the exact one-step transition arithmetic.
"""

from .core import CommodityState, Edge, ExchangeSpec, FlowAction, Graph, Shipment, load_graph, save_graph
from .dynamics import (
    FEASIBILITY_TOL,
    Constraints,
    Violation,
    apply_exchanges,
    flow_money,
    net_flow,
    step_state,
    validate_action,
)

__all__ = [
    "Edge",
    "Graph",
    "Shipment",
    "CommodityState",
    "ExchangeSpec",
    "FlowAction",
    "load_graph",
    "save_graph",
    "Constraints",
    "Violation",
    "FEASIBILITY_TOL",
    "net_flow",
    "flow_money",
    "apply_exchanges",
    "validate_action",
    "step_state",
]
