"""
Dynamic minimum-cost-flow environments.

Commodities are injected at the source every step and must reach a sink as
fast as possible: every unit pays the travel time of each edge it takes and a
unit sent into a sink of its own commodity earns ``lam``. Sinks absorb
whatever arrives.
"""

import logging
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from ..exceptions import ConfigError, DomainError, RejectedActionError
from ..graph import CommodityState, Constraints, Edge, Graph, step_state
from ..lcp import DesiredState, build_mcf_lcp
from .base import EnvAction, NetworkEnv, Observation, StepResult

logger = logging.getLogger(__name__)

VARIANTS = (
    "2hop", "3hop", "4hop", "dynamic_tt", "dynamic_topology", "capacity", "multi_commodity", "bandit", "wide",
)

THREE_HOP_EDGES = [
    (0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (2, 4), (2, 5), (2, 6), (3, 5), (3, 6), (4, 7), (5, 7), (6, 7),
]

MULTI_COMMODITY_EDGES = [
    (0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (2, 5), (3, 5), (4, 6), (4, 8), (5, 7), (5, 9),
    (6, 10), (8, 10), (7, 11), (9, 11),
]


@dataclass
class Topology:
    """
    Static description of an MCF network.

    Attributes:
        nodes: node ids
        edges: (src, dst) pairs
        source: node receiving the injected commodities
        sinks: per-commodity tuple of rewarded sink ids
        hops: source-to-sink hop count (message-passing depth)
        late_nodes: nodes that only become active at the topology change
    """

    nodes: list
    edges: list
    source: int
    sinks: list
    hops: int
    late_nodes: tuple = ()

    @property
    def n_commodities(self):
        return len(self.sinks)

    @property
    def all_sinks(self):
        return sorted({s for group in self.sinks for s in group})


def widened_three_hop(width):
    """
    Three-hop network with ``width`` nodes in each of the two middle layers.

    Node ``i`` of the first layer feeds nodes ``i`` and ``i + 1`` (cyclically)
    of the second layer.
    """
    if width < 1:
        raise DomainError(f"width must be >= 1, got {width}")
    first = list(range(1, width + 1))
    second = list(range(width + 1, 2 * width + 1))
    sink = 2 * width + 1
    edges = [(0, a) for a in first]
    for i, a in enumerate(first):
        targets = {second[i], second[(i + 1) % width]}
        edges.extend((a, b) for b in sorted(targets))
    edges.extend((b, sink) for b in second)
    return Topology(list(range(sink + 1)), edges, 0, [(sink,)], 3)


def mcf_topology(variant, width=3):
    """Topology of an MCF variant."""
    if variant == "2hop":
        edges = [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]
        return Topology(list(range(5)), edges, 0, [(4,)], 2)
    if variant in ("3hop", "dynamic_tt", "capacity"):
        return Topology(list(range(8)), list(THREE_HOP_EDGES), 0, [(7,)], 3)
    if variant == "4hop":
        edges = [
            (0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (2, 5), (2, 6), (3, 4), (3, 6),
            (4, 7), (4, 8), (5, 8), (5, 9), (6, 7), (6, 9), (7, 10), (8, 10), (9, 10),
        ]
        return Topology(list(range(11)), edges, 0, [(10,)], 4)
    if variant == "dynamic_topology":
        edges = list(THREE_HOP_EDGES) + [(0, 8), (8, 7)]
        return Topology(list(range(9)), edges, 0, [(7,)], 3, late_nodes=(8,))
    if variant == "multi_commodity":
        return Topology(list(range(12)), list(MULTI_COMMODITY_EDGES), 0, [(10,), (11,)], 4)
    if variant == "bandit":
        return Topology([0, 1, 2], [(0, 1), (0, 2)], 0, [(1, 2)], 1)
    if variant == "wide":
        return widened_three_hop(width)
    raise DomainError(f"unknown MCF variant {variant!r}")


@dataclass
class McfConfig:
    """
    MCF environment parameters.

    ``travel_times`` pins the per-edge travel times (in topology edge order)
    instead of sampling them from ``U[0, travel_time_max]`` each episode.
    ``stop_when_empty`` ends the episode early once no mass is on the nodes
    or in transit and no injection is left.
    """

    variant: str = "2hop"
    episode_length: int = 30
    lam: float = 25.0
    demand_mean: int = 10
    demand_spread: int = 2
    travel_time_max: float = 10.0
    drift: float = 1.0
    edge_capacity: float = 20.0
    topology_change_step: int = 10
    width: int = 3
    travel_times: list = None
    feature_scale: float = 0.1
    stop_when_empty: bool = True

    def __post_init__(self):
        if self.variant == "bandit" and self.travel_times is None:
            self.travel_times = [1.0, 5.0]

    def validate(self, path="env"):
        if self.variant not in VARIANTS:
            raise ConfigError(f"{path}.variant", f"must be one of {VARIANTS}")
        if self.episode_length <= 0:
            raise ConfigError(f"{path}.episode_length", "must be > 0")
        if self.lam <= 0:
            raise ConfigError(f"{path}.lam", "must be > 0")
        if self.demand_spread < 0 or self.demand_mean - self.demand_spread < 0:
            raise ConfigError(f"{path}.demand_spread", "injected demand must stay >= 0")
        if self.travel_time_max < 0:
            raise ConfigError(f"{path}.travel_time_max", "must be >= 0")
        if self.edge_capacity <= 0:
            raise ConfigError(f"{path}.edge_capacity", "must be > 0")
        if self.width < 1:
            raise ConfigError(f"{path}.width", "must be >= 1")
        if self.travel_times is not None:
            n_edges = len(mcf_topology(self.variant, self.width).edges)
            if len(self.travel_times) != n_edges or min(self.travel_times) < 0:
                raise ConfigError(f"{path}.travel_times", f"need {n_edges} non-negative values")
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data, path="env"):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown field")
        return cls(**data).validate(path)


def delay_of(travel_time):
    """Whole-step delay of a continuous travel time."""
    return np.maximum(1, np.round(np.asarray(travel_time, dtype=float))).astype(int)


@dataclass
class McfFuture:
    """
    Realised remainder of an MCF episode.

    Attributes:
        graphs: graph snapshot for every remaining step (first = current)
        injection: (steps, n_commodities) amounts injected at the source at
            the start of each remaining step (first row already applied)
        remaining_capacity: per-edge capacity left for the rest of the episode
    """

    graphs: list
    injection: np.ndarray
    remaining_capacity: np.ndarray

    def head(self, steps):
        """The first ``steps`` steps of the remainder."""
        return McfFuture(self.graphs[:steps], self.injection[:steps], self.remaining_capacity)


class McfEnv(NetworkEnv):
    """
    Minimum-cost-flow environment.

    Args:
        config: McfConfig
    """

    kind = "mcf"

    def __init__(self, config=None):
        super().__init__((config or McfConfig()).validate())
        cfg = self.config
        self.topology = mcf_topology(cfg.variant, cfg.width)
        self.n_commodities = self.topology.n_commodities
        base_edges = [Edge(s, d) for s, d in self.topology.edges]
        self._base = Graph(self.topology.nodes, base_edges)
        self.source_pos = self._base.node_index(self.topology.source)
        self.sink_pos = [[self._base.node_index(s) for s in group] for group in self.topology.sinks]
        self.all_sink_pos = sorted({p for group in self.sink_pos for p in group})
        self.capacity = np.full(self._base.n_edges, np.inf)
        if cfg.variant == "capacity":
            sink = self.topology.sinks[0][0]
            for k, (s, d) in enumerate(self.topology.edges):
                if d != sink:
                    self.capacity[k] = cfg.edge_capacity
        self._times = None
        self._injection = None
        self._drained = False
        self._graphs = {}
        self.accumulated = np.zeros(self._base.n_edges)
        self.delivered = 0.0
        self.stranded = 0.0

    @property
    def message_hops(self):
        return self.topology.hops

    @property
    def sinks(self):
        return [list(group) for group in self.topology.sinks]

    def _sample_times(self):
        cfg = self.config
        n_edges = self._base.n_edges
        T = cfg.episode_length
        if cfg.travel_times is not None:
            first = np.asarray(cfg.travel_times, dtype=float)
        else:
            first = self.rng.uniform(0.0, cfg.travel_time_max, n_edges)
            if self.topology.late_nodes:
                # late path: U[0, max / 4]
                late = [k for k, (s, d) in enumerate(self.topology.edges)
                        if s in self.topology.late_nodes or d in self.topology.late_nodes]
                first[late] = self.rng.uniform(0.0, 0.25 * cfg.travel_time_max, len(late))
        times = np.tile(first, (T, 1))
        if cfg.variant == "dynamic_tt":
            for t in range(1, T):
                times[t] = np.maximum(times[t - 1] + self.rng.uniform(-cfg.drift, cfg.drift, n_edges), 0.0)
        return times

    def _node_active(self, t):
        active = np.ones(self._base.n_nodes, dtype=bool)
        if self.topology.late_nodes and t < self.config.topology_change_step:
            for node in self.topology.late_nodes:
                active[self._base.node_index(node)] = False
        return active

    def graph_at(self, t):
        """Graph snapshot used at step ``t``."""
        t = min(t, self.episode_length - 1)
        if t not in self._graphs:
            times = self._times[t]
            graph = self._base.with_edge_attributes(travel_time=delay_of(times), cost=times, capacity=self.capacity)
            self._graphs[t] = graph.with_activity(node_active=self._node_active(t))
        return self._graphs[t]

    @property
    def graph(self):
        return self.graph_at(self.t)

    def remaining_capacity(self):
        return self.capacity - self.accumulated

    def reset(self, seed: Optional[int] = None) -> Observation:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.seed = seed
        cfg = self.config
        self._times = self._sample_times()
        self._graphs = {}
        self._injection = cfg.demand_mean + self.rng.integers(
            -cfg.demand_spread, cfg.demand_spread + 1, size=(cfg.episode_length, self.n_commodities)
        )
        self.t = 0
        self.accumulated = np.zeros(self._base.n_edges)
        self.delivered = 0.0
        self.stranded = 0.0
        self._drained = False
        self.state = CommodityState.zeros(self._base.n_nodes, self.n_commodities)
        self.state.quantities[self.source_pos] += self._injection[0]
        return self.observe()

    def observe(self) -> Observation:
        cfg = self.config
        graph = self.graph
        s = cfg.feature_scale
        arrivals = self.state.arrivals(self.state.step + 1)
        sink_flags = np.zeros((graph.n_nodes, self.n_commodities))
        for k, group in enumerate(self.sink_pos):
            sink_flags[group, k] = 1.0
        node_features = np.hstack([self.state.quantities * s, arrivals * s, sink_flags])

        time_scale = 1.0 / max(cfg.travel_time_max, 1.0)
        columns = [graph.costs * time_scale]
        if cfg.variant == "capacity":
            remaining = np.minimum(self.remaining_capacity(), cfg.edge_capacity)
            columns += [remaining / cfg.edge_capacity, self.accumulated / cfg.edge_capacity]
        edge_features = np.column_stack(columns)
        return Observation(graph, node_features, edge_features, graph.active_node_positions(), step=self.t)

    def desired_state(self, simplex, production=None):
        positions = self.graph.active_node_positions()
        available = self.state.quantities[positions].sum(axis=0)
        targets = self._spread(simplex, positions, self._base.n_nodes, available)
        return DesiredState(targets)

    def build_lcp(self, desired, penalty_weight):
        capacity = self.remaining_capacity() if self.config.variant == "capacity" else None
        return build_mcf_lcp(
            self.state, self.graph, desired, penalty_weight, lam=self.config.lam,
            sinks=self.sinks, capacity=capacity, include_reward=True,
        )

    def reward_of(self, graph, flows):
        """Immediate reward of a flow matrix on ``graph``."""
        cost = float(np.dot(graph.costs, flows.sum(axis=1)))
        sink_flow = 0.0
        for k, group in enumerate(self.sink_pos):
            into_sink = np.isin(graph.dst_index, group)
            sink_flow += float(flows[into_sink, k].sum())
        return -cost + self.config.lam * sink_flow, cost, sink_flow

    def _stranded_mass(self, graph):
        remaining = self.remaining_capacity()
        mask = graph.active_edge_mask()
        stuck = 0.0
        for pos in graph.active_node_positions():
            if pos in self.all_sink_pos:
                continue
            out = mask & (graph.src_index == pos)
            if out.any() and np.all(remaining[out] <= 1e-9):
                stuck += float(self.state.quantities[pos].sum())
        return stuck

    @property
    def done(self):
        if self.t >= self.episode_length:
            return True
        return self.config.stop_when_empty and self._drained

    def _no_mass_left(self):
        if self.state.total_mass() > 1e-9:
            return False
        return not np.any(self._injection[self.t + 1:] > 0)

    def step(self, action: EnvAction) -> StepResult:
        self._require_running()
        graph = self.graph
        flows = action.flows
        constraints = Constraints(
            nonnegative=True,
            capacity=self.config.variant == "capacity",
            capacity_override=self.remaining_capacity(),
        )
        try:
            state = step_state(self.state, graph, flows, constraints=constraints)
        except RejectedActionError:
            logger.debug("MCF action rejected at step %d", self.t)
            raise
        reward, cost, sink_flow = self.reward_of(graph, flows.flows)

        delivered = float(state.quantities[self.all_sink_pos].sum())
        state.quantities[self.all_sink_pos] = 0.0
        self.delivered += delivered
        self.accumulated += flows.flows.sum(axis=1)

        self.state = state
        self.t += 1
        if not self.done:
            self.state.quantities[self.source_pos] += self._injection[self.t]
        self._drained = self._no_mass_left()
        info = {"step": self.t, "delivered": delivered, "transit_cost": cost, "sink_flow": sink_flow}
        if self.config.variant == "capacity":
            stranded = self._stranded_mass(self.graph)
            self.stranded = max(self.stranded, stranded)
            info["stranded"] = stranded
        return StepResult(self.observe(), reward, self.done, info)

    @property
    def success(self):
        """No mass got stuck behind exhausted capacity during the episode."""
        return self.stranded <= 1e-9

    def reveal_future(self):
        graphs = [self.graph_at(t) for t in range(self.t, self.episode_length)]
        injection = self._injection[self.t:].astype(float).copy()
        if len(injection):
            injection[0] = 0.0
        return McfFuture(graphs, injection, self.remaining_capacity())
