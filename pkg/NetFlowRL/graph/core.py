"""
Core containers for network-flow control problems.

This module provides the data side of the linear network model:

- Edge / Graph: a directed graph with per-edge travel time, unit cost and
  capacity, plus node/edge activity masks for topologies that change over time
- CommodityState: per-node per-commodity quantities, the queue of shipments
  still travelling, the accumulated money and the current step
- ExchangeSpec: per-node exchange matrices converting commodities and money
- FlowAction: per-edge per-commodity flows and per-node exchange weights

A Graph is a snapshot. Environments with a time-varying topology build a new
snapshot (see ``Graph.with_activity``) whenever the topology changes, so every
neighbour query answers for the step the snapshot was taken at.
"""

import json
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from ..exceptions import DomainError


@dataclass(frozen=True)
class Edge:
    """A directed edge ``src -> dst``; travel time is in whole steps."""

    src: int
    dst: int
    travel_time: int = 1
    cost: float = 0.0
    capacity: float = math.inf

    def to_dict(self):
        return {
            "src": self.src,
            "dst": self.dst,
            "time": self.travel_time,
            "cost": self.cost,
            "capacity": None if math.isinf(self.capacity) else self.capacity,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            capacity = data.get("capacity")
            return cls(
                src=int(data["src"]),
                dst=int(data["dst"]),
                travel_time=int(data.get("time", 1)),
                cost=float(data.get("cost", 0.0)),
                capacity=math.inf if capacity is None else float(capacity),
            )
        except KeyError as exc:
            raise DomainError(f"edge record missing field {exc}") from exc


class Graph:
    """
    Directed graph snapshot with activity masks.

    Nodes are arbitrary integer ids; internally every per-node array is indexed
    by the node's position in ``nodes`` and every per-edge array by the edge's
    position in ``edges``.

    Args:
        nodes: node ids
        edges: Edge objects, (src, dst[, time[, cost[, capacity]]]) tuples or dicts
        node_active: optional boolean mask over nodes (default all active)
        edge_active: optional boolean mask over edges (default all active)
        allow_self_loops: accept edges with src == dst
    """

    def __init__(self, nodes, edges, node_active=None, edge_active=None, allow_self_loops=False):
        self.nodes = [int(n) for n in nodes]
        self._index = {}
        for pos, node in enumerate(self.nodes):
            if node in self._index:
                raise DomainError(f"duplicate node id {node}")
            self._index[node] = pos
        self.allow_self_loops = allow_self_loops
        self.edges = [self._coerce_edge(e) for e in edges]
        for e in self.edges:
            self._check_edge(e)

        self.node_active = self._mask(node_active, len(self.nodes), "node_active")
        self.edge_active = self._mask(edge_active, len(self.edges), "edge_active")

        self.src_index = np.array([self._index[e.src] for e in self.edges], dtype=int)
        self.dst_index = np.array([self._index[e.dst] for e in self.edges], dtype=int)

    @staticmethod
    def _coerce_edge(edge):
        if isinstance(edge, Edge):
            return edge
        if isinstance(edge, dict):
            return Edge.from_dict(edge)
        return Edge(*edge)

    def _check_edge(self, e):
        if e.src not in self._index or e.dst not in self._index:
            raise DomainError(f"edge {e.src}->{e.dst} references an unknown node")
        if e.src == e.dst and not self.allow_self_loops:
            raise DomainError(f"self-loop on node {e.src} is not allowed")
        if int(e.travel_time) != e.travel_time or e.travel_time < 1:
            raise DomainError(f"edge {e.src}->{e.dst}: travel time must be an integer >= 1")
        if e.capacity < 0:
            raise DomainError(f"edge {e.src}->{e.dst}: capacity must be >= 0")
        if not math.isfinite(e.cost):
            raise DomainError(f"edge {e.src}->{e.dst}: cost must be finite")

    @staticmethod
    def _mask(mask, size, name):
        if mask is None:
            return np.ones(size, dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (size,):
            raise DomainError(f"{name} must have shape ({size},), got {mask.shape}")
        return mask.copy()

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def travel_times(self):
        return np.array([e.travel_time for e in self.edges], dtype=int)

    @property
    def costs(self):
        return np.array([e.cost for e in self.edges], dtype=float)

    @property
    def capacities(self):
        return np.array([e.capacity for e in self.edges], dtype=float)

    def node_index(self, node):
        """Position of a node id in ``nodes``."""
        try:
            return self._index[int(node)]
        except (KeyError, TypeError, ValueError):
            raise DomainError(f"unknown node {node!r}") from None

    def has_node(self, node):
        return node in self._index

    def edge_index(self, src, dst):
        """Position of the first edge ``src -> dst``."""
        for k, e in enumerate(self.edges):
            if e.src == src and e.dst == dst:
                return k
        raise DomainError(f"no edge {src}->{dst}")

    def active_edge_mask(self):
        """Edges usable now: the edge and both endpoints must be active."""
        return self.edge_active & self.node_active[self.src_index] & self.node_active[self.dst_index]

    def active_node_positions(self):
        return np.flatnonzero(self.node_active)

    def active_nodes(self):
        return [self.nodes[p] for p in self.active_node_positions()]

    def out_edges(self, node):
        pos = self.node_index(node)
        mask = self.active_edge_mask()
        return [k for k in range(self.n_edges) if mask[k] and self.src_index[k] == pos]

    def in_edges(self, node):
        pos = self.node_index(node)
        mask = self.active_edge_mask()
        return [k for k in range(self.n_edges) if mask[k] and self.dst_index[k] == pos]

    def successors(self, node):
        return [self.edges[k].dst for k in self.out_edges(node)]

    def predecessors(self, node):
        return [self.edges[k].src for k in self.in_edges(node)]

    def canonical_node_order(self):
        """Node positions sorted by node id."""
        return np.argsort(np.asarray(self.nodes), kind="stable")

    def with_edge_attributes(self, travel_time=None, cost=None, capacity=None):
        """Copy of the graph with per-edge attributes replaced where given."""
        edges = []
        for k, e in enumerate(self.edges):
            edges.append(Edge(
                e.src, e.dst,
                int(travel_time[k]) if travel_time is not None else e.travel_time,
                float(cost[k]) if cost is not None else e.cost,
                float(capacity[k]) if capacity is not None else e.capacity,
            ))
        return Graph(self.nodes, edges, self.node_active, self.edge_active, self.allow_self_loops)

    def with_activity(self, node_active=None, edge_active=None):
        """Copy of the graph with new activity masks."""
        return Graph(
            self.nodes, self.edges,
            self.node_active if node_active is None else node_active,
            self.edge_active if edge_active is None else edge_active,
            self.allow_self_loops,
        )

    def to_networkx(self, active_only=True):
        """DiGraph view keyed by node id with the edge attributes attached."""
        g = nx.DiGraph()
        mask = self.active_edge_mask() if active_only else np.ones(self.n_edges, dtype=bool)
        for pos, node in enumerate(self.nodes):
            if self.node_active[pos] or not active_only:
                g.add_node(node)
        for k, e in enumerate(self.edges):
            if mask[k]:
                g.add_edge(e.src, e.dst, time=e.travel_time, cost=e.cost, capacity=e.capacity)
        return g

    def to_dict(self):
        data = {
            "nodes": list(self.nodes),
            "edges": [e.to_dict() for e in self.edges],
        }
        if not self.node_active.all():
            data["node_active"] = self.node_active.tolist()
        if not self.edge_active.all():
            data["edge_active"] = self.edge_active.tolist()
        return data

    @classmethod
    def from_dict(cls, data):
        if "nodes" not in data or "edges" not in data:
            raise DomainError("graph document needs 'nodes' and 'edges'")
        return cls(
            data["nodes"],
            [Edge.from_dict(e) for e in data["edges"]],
            data.get("node_active"),
            data.get("edge_active"),
            bool(data.get("allow_self_loops", False)),
        )

    def __repr__(self):
        return f"Graph(nodes={self.n_nodes}, edges={self.n_edges}, active_edges={int(self.active_edge_mask().sum())})"


def load_graph(path):
    """Read a graph from its JSON document."""
    with open(path, "r") as fh:
        return Graph.from_dict(json.load(fh))


def save_graph(graph, path):
    with open(path, "w") as fh:
        json.dump(graph.to_dict(), fh, indent=2)


@dataclass(frozen=True)
class Shipment:
    """Quantity travelling towards node position ``node``; credited at ``arrival_step``."""

    arrival_step: int
    node: int
    commodity: int
    amount: float


@dataclass
class CommodityState:
    """
    Quantities on nodes, shipments in flight and accumulated money.

    Attributes:
        quantities: array of shape (n_nodes, n_commodities)
        in_transit: shipments ordered by (arrival_step, node, commodity)
        money: accumulated money
        step: current time step
    """

    quantities: np.ndarray
    in_transit: tuple = ()
    money: float = 0.0
    step: int = 0

    def __post_init__(self):
        q = np.array(self.quantities, dtype=float)
        if q.ndim == 1:
            q = q[:, None]
        if q.ndim != 2:
            raise DomainError("quantities must be a (nodes, commodities) matrix")
        self.quantities = q
        self.in_transit = tuple(sorted(
            self.in_transit, key=lambda s: (s.arrival_step, s.node, s.commodity)
        ))

    @classmethod
    def zeros(cls, n_nodes, n_commodities=1):
        return cls(np.zeros((n_nodes, n_commodities)))

    @property
    def n_nodes(self):
        return self.quantities.shape[0]

    @property
    def n_commodities(self):
        return self.quantities.shape[1]

    def on_node_mass(self):
        return float(self.quantities.sum())

    def in_transit_mass(self):
        return float(sum(s.amount for s in self.in_transit))

    def total_mass(self):
        return self.on_node_mass() + self.in_transit_mass()

    def arrivals(self, step):
        """Matrix of quantities credited at ``step``."""
        out = np.zeros_like(self.quantities)
        for s in self.in_transit:
            if s.arrival_step == step:
                out[s.node, s.commodity] += s.amount
        return out

    def pipeline(self, horizon):
        """Arrivals for the next ``horizon`` steps, shape (horizon, nodes, commodities)."""
        out = np.zeros((horizon,) + self.quantities.shape)
        for s in self.in_transit:
            lag = s.arrival_step - self.step - 1
            if 0 <= lag < horizon:
                out[lag, s.node, s.commodity] += s.amount
        return out

    def copy(self):
        return CommodityState(self.quantities.copy(), self.in_transit, self.money, self.step)


class ExchangeSpec:
    """
    Exchange matrices per node.

    Each matrix has ``n_commodities + 1`` rows (the last row is money) and one
    column per exchange option available at the node.
    """

    def __init__(self, matrices, n_commodities):
        self.n_commodities = int(n_commodities)
        self.matrices = {}
        for node, mat in matrices.items():
            mat = np.asarray(mat, dtype=float)
            if mat.ndim == 1:
                mat = mat[:, None]
            if mat.ndim != 2 or mat.shape[0] != self.n_commodities + 1:
                raise DomainError(
                    f"exchange matrix of node {node} must have {self.n_commodities + 1} rows, "
                    f"got shape {mat.shape}"
                )
            self.matrices[int(node)] = mat

    def options(self, node):
        mat = self.matrices.get(int(node))
        return 0 if mat is None else mat.shape[1]


@dataclass
class FlowAction:
    """
    Flows per (edge, commodity) and exchange weights per node id.
    """

    flows: np.ndarray
    exchange_weights: dict = field(default_factory=dict)

    def __post_init__(self):
        f = np.array(self.flows, dtype=float)
        if f.ndim == 1:
            f = f[:, None]
        self.flows = f

    @classmethod
    def zeros(cls, n_edges, n_commodities=1):
        return cls(np.zeros((n_edges, n_commodities)))

    def outflow(self, graph):
        """Per-node outflow, shape (n_nodes, n_commodities)."""
        out = np.zeros((graph.n_nodes, self.flows.shape[1]))
        np.add.at(out, graph.src_index, self.flows)
        return out

    def inflow(self, graph):
        """Per-node committed inflow ignoring travel delays."""
        out = np.zeros((graph.n_nodes, self.flows.shape[1]))
        np.add.at(out, graph.dst_index, self.flows)
        return out
