"""
Dynamic vehicle-routing (fleet rebalancing) environment.

A fleet of ``M`` vehicles serves passenger requests between stations. At
every step the operator moves idle vehicles along station-graph edges
(rebalancing); requests that appear at a station are then served first come,
first served by the idle vehicles there and the rest leave. The reward is the
passenger margin ``p - m`` of every served trip minus the cost ``m`` of every
rebalancing move.
"""

import logging
from dataclasses import asdict, dataclass, fields
from typing import Optional

import networkx as nx
import numpy as np

from ..exceptions import ConfigError, DomainError
from ..graph import CommodityState, Constraints, Edge, Graph, Shipment, load_graph, step_state
from ..lcp import DesiredState, build_dvr_lcp
from .base import EnvAction, NetworkEnv, Observation, StepResult
from .trips import load_trip_records

logger = logging.getLogger(__name__)

DEMAND_SOURCES = ("synthetic", "trip_file")


@dataclass
class DvrConfig:
    """
    Vehicle-routing parameters.

    The synthetic source builds a ``rows x cols`` grid of stations with
    time-varying asymmetric demand: trips into the interior stations peak in
    the first half of the episode and trips out of them in the second half.
    The trip-file source estimates rates (and, where recorded, prices and
    travel times) from a trip-record CSV; ``graph_file`` then names the
    station graph (default: the grid).
    """

    rows: int = 4
    cols: int = 4
    fleet_size: int = 100
    episode_length: int = 20
    base_rate: float = 0.1
    peak_factor: float = 3.0
    price_per_hop: float = 5.0
    cost_per_hop: float = 1.0
    lookahead: int = 4
    demand_source: str = "synthetic"
    trip_file: str = None
    graph_file: str = None
    bin_seconds: int = 180
    trip_days: int = 1

    def validate(self, path="env"):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError(f"{path}.rows", "grid dimensions must be >= 1")
        if self.fleet_size <= 0:
            raise ConfigError(f"{path}.fleet_size", "must be > 0")
        if self.episode_length <= 0:
            raise ConfigError(f"{path}.episode_length", "must be > 0")
        if self.base_rate < 0 or self.peak_factor < 0:
            raise ConfigError(f"{path}.base_rate", "rates must be >= 0")
        if self.price_per_hop < 0 or self.cost_per_hop < 0:
            raise ConfigError(f"{path}.price_per_hop", "prices and costs must be >= 0")
        if self.lookahead < 1:
            raise ConfigError(f"{path}.lookahead", "must be >= 1")
        if self.demand_source not in DEMAND_SOURCES:
            raise ConfigError(f"{path}.demand_source", f"must be one of {DEMAND_SOURCES}")
        if self.demand_source == "trip_file" and not self.trip_file:
            raise ConfigError(f"{path}.trip_file", "required for the trip_file demand source")
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


def grid_stations(rows, cols, cost_per_hop=1.0):
    """
    Station graph of a ``rows x cols`` grid.

    Station ``r * cols + c`` sits at grid cell (r, c); neighbouring stations
    are joined in both directions with travel time 1.

    Returns:
        tuple: (Graph, list of interior station ids)
    """
    grid = nx.grid_2d_graph(rows, cols)
    node_id = {(r, c): r * cols + c for r, c in grid.nodes}
    edges = []
    for a, b in sorted(grid.edges):
        edges.append(Edge(node_id[a], node_id[b], 1, cost_per_hop))
        edges.append(Edge(node_id[b], node_id[a], 1, cost_per_hop))
    interior = sorted(node_id[(r, c)] for r, c in grid.nodes if 0 < r < rows - 1 and 0 < c < cols - 1)
    return Graph(sorted(node_id.values()), edges), interior


def hop_matrix(graph):
    """(n, n) shortest-path hop counts between node positions (0 if unreachable)."""
    lengths = dict(nx.all_pairs_shortest_path_length(graph.to_networkx()))
    n = graph.n_nodes
    hops = np.zeros((n, n), dtype=int)
    for i, a in enumerate(graph.nodes):
        for j, b in enumerate(graph.nodes):
            hops[i, j] = lengths.get(a, {}).get(b, 0)
    return hops


def synthetic_rates(n_steps, n, interior, base_rate, peak_factor):
    """(n_steps, n, n) request rates with an inbound then outbound peak."""
    inner = np.zeros(n, dtype=bool)
    inner[list(interior)] = True
    inbound = np.outer(~inner, inner).astype(float)
    outbound = np.outer(inner, ~inner).astype(float)
    rates = np.full((n_steps, n, n), base_rate)
    half = n_steps / 2.0
    for t in range(n_steps):
        peak = inbound if t < half else outbound
        rates[t] *= 1.0 + (peak_factor - 1.0) * peak
        np.fill_diagonal(rates[t], 0.0)
    return rates


def dvr_match_passengers(idle, requests):
    """
    Serve requests first come, first served.

    Args:
        idle: idle vehicles per station position
        requests: per origin position, destination positions in arrival order

    Returns:
        (n, n) matrix of served trips; origin ``o`` serves its first
        ``min(idle[o], len(requests[o]))`` requests and the rest leave
    """
    idle = np.asarray(idle, dtype=float)
    n = idle.size
    served = np.zeros((n, n))
    for o, queue in enumerate(requests):
        take = int(min(np.floor(max(idle[o], 0.0) + 1e-9), len(queue)))
        if take:
            np.add.at(served[o], np.asarray(queue[:take], dtype=int), 1.0)
    return served


@dataclass
class DvrFuture:
    """
    Realised remainder of a vehicle-routing episode.

    Attributes:
        requests: (steps, n, n) request counts for the matchings still to
            come; row ``h`` is matched after the rebalancing of step ``t + h``
        price: (n, n) trip prices
        trip_cost: (n, n) trip costs
        trip_steps: (n, n) trip durations
    """

    requests: np.ndarray
    price: np.ndarray
    trip_cost: np.ndarray
    trip_steps: np.ndarray

    def head(self, steps):
        return DvrFuture(self.requests[:steps], self.price, self.trip_cost, self.trip_steps)


class DvrEnv(NetworkEnv):
    """
    Vehicle-routing environment.

    Args:
        config: DvrConfig
    """

    kind = "dvr"

    def __init__(self, config=None):
        super().__init__((config or DvrConfig()).validate())
        cfg = self.config
        if cfg.graph_file:
            self._graph = load_graph(cfg.graph_file)
            interior = []
        else:
            self._graph, interior = grid_stations(cfg.rows, cfg.cols, cfg.cost_per_hop)
        n = self._graph.n_nodes
        hops = hop_matrix(self._graph)
        self.trip_steps = np.maximum(hops, 1)
        self.price = cfg.price_per_hop * self.trip_steps
        self.trip_cost = cfg.cost_per_hop * self.trip_steps

        n_bins = cfg.episode_length + 1
        if cfg.demand_source == "trip_file":
            demand = load_trip_records(cfg.trip_file, stations=self._graph.nodes, bin_seconds=cfg.bin_seconds,
                                       n_bins=n_bins, days=cfg.trip_days)
            self.rates = demand.rates
            known = ~np.isnan(demand.price)
            self.price = np.where(known, demand.price, self.price)
            self.trip_steps = np.where(demand.travel_steps > 0, demand.travel_steps, self.trip_steps)
            self.trip_cost = cfg.cost_per_hop * self.trip_steps
        else:
            self.rates = synthetic_rates(n_bins, n, [self._graph.node_index(s) for s in interior],
                                         cfg.base_rate, cfg.peak_factor)
        for m in (self.price, self.trip_cost):
            np.fill_diagonal(m, 0.0)
        self._requests = None
        self._counts = None
        self._pending_reward = 0.0
        self._pending_served = 0.0

    @property
    def graph(self):
        return self._graph

    @property
    def fleet_size(self):
        return self.config.fleet_size

    @property
    def message_hops(self):
        return 1

    def _sample_requests(self):
        n = self._graph.n_nodes
        counts = self.rng.poisson(self.rates).astype(int)
        requests = []
        for t in range(counts.shape[0]):
            per_origin = []
            for o in range(n):
                queue = np.repeat(np.arange(n), counts[t, o])
                per_origin.append(self.rng.permutation(queue))
            requests.append(per_origin)
        return counts.astype(float), requests

    def _match(self, served):
        """Dispatch ``served`` passenger trips from the idle fleet; return (revenue, count)."""
        q = self.state.quantities[:, 0]
        departing = served.sum(axis=1)
        if np.any(departing > q + 1e-7):
            raise DomainError("passenger flows exceed idle vehicles")
        self.state.quantities[:, 0] = np.maximum(q - departing, 0.0)
        shipments = list(self.state.in_transit)
        for o, d in zip(*np.nonzero(served > 0)):
            shipments.append(Shipment(self.state.step + int(self.trip_steps[o, d]), int(d), 0, float(served[o, d])))
        self.state = CommodityState(self.state.quantities, tuple(shipments), self.state.money, self.state.step)
        margin = self.price - self.trip_cost
        return float((served * margin).sum()), float(served.sum())

    def _check_override(self, served, t):
        served = np.asarray(served, dtype=float)
        n = self._graph.n_nodes
        if served.shape != (n, n):
            raise DomainError(f"passenger flows must have shape ({n}, {n}), got {served.shape}")
        if np.any(served < -1e-7) or np.any(served > self._counts[t] + 1e-7):
            raise DomainError("passenger flows must lie between 0 and the realised requests")
        return np.clip(served, 0.0, self._counts[t])

    def reset(self, seed: Optional[int] = None) -> Observation:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.seed = seed
        n = self._graph.n_nodes
        M = self.config.fleet_size
        idle = np.full(n, M // n, dtype=float)
        idle[: M % n] += 1.0
        self.state = CommodityState(idle)
        self.t = 0
        self._counts, self._requests = self._sample_requests()
        served = dvr_match_passengers(self.state.quantities[:, 0], self._requests[0])
        self._pending_reward, self._pending_served = self._match(served)
        return self.observe()

    @property
    def pending_reward(self):
        """Margin of the trips matched at reset, paid out with the first step's reward."""
        return float(self._pending_reward)

    def idle(self):
        return self.state.quantities[:, 0].copy()

    def vehicles_in_transit(self):
        return self.state.in_transit_mass()

    def observe(self) -> Observation:
        cfg = self.config
        n = self._graph.n_nodes
        L = cfg.lookahead
        scale = n / float(cfg.fleet_size)
        q = self.idle()
        projected = q[:, None] + np.cumsum(self.state.pipeline(L)[:, :, 0], axis=0).T
        estimate = np.zeros((n, L))
        for h in range(L):
            t = self.t + 1 + h
            if t < self.rates.shape[0]:
                estimate[:, h] = self.rates[t].sum(axis=1)
        price_scale = max(float(self.price.max()), 1.0)
        mean_price = self.price.sum(axis=1) / max(n - 1, 1) / price_scale
        node_features = np.hstack([q[:, None] * scale, projected * scale, estimate, mean_price[:, None]])
        edge_features = self._graph.costs[:, None].copy()
        return Observation(self._graph, node_features, edge_features, np.arange(n), step=self.t)

    def desired_state(self, simplex, production=None):
        available = float(self.idle().sum())
        targets = self._spread(simplex, np.arange(self._graph.n_nodes), self._graph.n_nodes, available)
        return DesiredState(targets)

    def build_lcp(self, desired, penalty_weight):
        return build_dvr_lcp(self.state, self._graph, desired, penalty_weight)

    def step(self, action: EnvAction) -> StepResult:
        self._require_running()
        flows = action.flows
        served = None
        if action.passenger_flows is not None:
            served = self._check_override(action.passenger_flows, self.t + 1)
        constraints = Constraints(nonnegative=True, capacity=False)
        self.state = step_state(self.state, self._graph, flows, constraints=constraints)
        rebalancing_cost = float(np.dot(self._graph.costs, flows.flows[:, 0]))
        self.t += 1

        if served is None:
            served = dvr_match_passengers(self.idle(), self._requests[self.t])
        revenue, n_served = self._match(served)
        revenue += self._pending_reward
        n_served += self._pending_served
        requests = float(self._counts[self.t].sum())
        if self.t == 1:
            requests += float(self._counts[0].sum())
        self._pending_reward = self._pending_served = 0.0

        reward = revenue - rebalancing_cost
        info = {
            "step": self.t,
            "served": n_served,
            "requests": requests,
            "revenue": revenue,
            "rebalancing_cost": rebalancing_cost,
        }
        return StepResult(self.observe(), reward, self.done, info)

    def reveal_future(self):
        return DvrFuture(self._counts[self.t + 1:].copy(), self.price.copy(), self.trip_cost.copy(),
                         self.trip_steps.copy())
