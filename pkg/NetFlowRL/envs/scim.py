"""
Supply-chain inventory management environment.

One warehouse (node 0) produces goods and ships them to the stores
``1 .. S``; demand materialises at the stores and unmet demand is carried as
negative stock (backorders). The step reward is the manager's profit:

    p * sum_stores min(d, q+) - (storage + production + transport + backorder)

evaluated on the stock ``q`` at the start of the step.
"""

import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from ..exceptions import ConfigError, DomainError
from ..graph import CommodityState, Constraints, Edge, Graph, Shipment, step_state
from ..lcp import DesiredState, build_scim_lcp
from ..nn.distributions import round_production
from .base import EnvAction, NetworkEnv, Observation, StepResult

logger = logging.getLogger(__name__)

SCIM_PRESETS = {
    "1F2S": {
        "d_max": [2, 16],
        "d_var": [2, 2],
        "storage_cost": [3, 2, 1],
        "transport_cost": [0.3, 0.6],
        "travel_times": [1, 1],
        "capacity": [20, 9, 12],
    },
    "1F3S": {
        "d_max": [1, 5, 24],
        "d_var": [2, 2, 2],
        "storage_cost": [2, 1, 1],
        "transport_cost": [0.3, 0.3, 0.3],
        "travel_times": [1, 1, 1],
        "capacity": [30, 15, 15, 15],
    },
    "1F10S": {
        "d_max": [2, 2, 2, 2, 10, 10, 10, 18, 18, 18],
        "d_var": [2] * 10,
        "storage_cost": [1] + [2] * 10,
        "transport_cost": [0.3] * 10,
        "travel_times": [1] * 10,
        "capacity": [100] + [15] * 10,
    },
}

_PRESET_FIELDS = ("d_max", "d_var", "storage_cost", "transport_cost", "travel_times", "capacity")


@dataclass
class ScimConfig:
    """
    Supply-chain parameters.

    Per-node lists (``storage_cost``, ``capacity``, ``initial_inventory``) start
    with the warehouse; per-store lists (``d_max``, ``d_var``,
    ``transport_cost``, ``travel_times``) follow store order. Fields left as
    ``None`` are taken from ``preset``.
    """

    preset: str = "1F2S"
    d_max: list = None
    d_var: list = None
    storage_cost: list = None
    transport_cost: list = None
    travel_times: list = None
    capacity: list = None
    episode_length: int = 30
    production_time: int = 1
    production_cost: float = 5.0
    backorder_cost: float = 21.0
    price: float = 15.0
    lookahead: int = 6
    initial_inventory: list = None
    feature_scale: float = 0.1

    def __post_init__(self):
        if self.preset is not None:
            if self.preset not in SCIM_PRESETS:
                raise ConfigError("env.preset", f"must be one of {sorted(SCIM_PRESETS)}")
            for name in _PRESET_FIELDS:
                if getattr(self, name) is None:
                    setattr(self, name, list(SCIM_PRESETS[self.preset][name]))

    @property
    def n_stores(self):
        return len(self.d_max)

    def validate(self, path="env"):
        for name in _PRESET_FIELDS:
            if getattr(self, name) is None:
                raise ConfigError(f"{path}.{name}", "required when no preset is given")
        s = self.n_stores
        if s < 1:
            raise ConfigError(f"{path}.d_max", "need at least one store")
        for name, size in (("d_var", s), ("transport_cost", s), ("travel_times", s),
                           ("storage_cost", s + 1), ("capacity", s + 1)):
            if len(getattr(self, name)) != size:
                raise ConfigError(f"{path}.{name}", f"expected {size} values")
        for name in ("d_max", "d_var", "storage_cost", "transport_cost", "capacity"):
            if min(getattr(self, name)) < 0:
                raise ConfigError(f"{path}.{name}", "must be >= 0")
        for name in ("production_cost", "backorder_cost", "price"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{path}.{name}", "must be >= 0")
        if min(self.travel_times) < 1 or self.production_time < 1:
            raise ConfigError(f"{path}.travel_times", "travel and production times must be >= 1")
        if self.episode_length <= 0:
            raise ConfigError(f"{path}.episode_length", "must be > 0")
        if self.lookahead < 1:
            raise ConfigError(f"{path}.lookahead", "must be >= 1")
        if self.initial_inventory is not None and len(self.initial_inventory) != s + 1:
            raise ConfigError(f"{path}.initial_inventory", f"expected {s + 1} values")
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


def seasonal_demand(i, t, cfg):
    """Deterministic part ``d_max/2 * (1 + cos(4 pi (2i + t) / T))`` of store ``i``."""
    return cfg.d_max[i] / 2.0 * (1.0 + math.cos(4.0 * math.pi * (2 * i + t) / cfg.episode_length))


def scim_demand(i, t, cfg, rng=None, noise=None):
    """
    Demand of store ``i`` (0-based over stores) at step ``t``.

    ``noise`` pins the uniform component instead of drawing it from ``rng``.
    """
    if not 0 <= t < cfg.episode_length:
        raise DomainError(f"step {t} outside the episode [0, {cfg.episode_length})")
    if noise is None:
        noise = rng.uniform(0.0, cfg.d_var[i])
    return max(int(math.floor(seasonal_demand(i, t, cfg) + noise)), 0)


def _floor_integral(x):
    n = np.floor(x)
    return n * (n - 1.0) / 2.0 + n * (x - n)


def expected_floor(a, v):
    """``E floor(a + U(0, v))``; ``v = 0`` gives ``floor(a)``."""
    a = np.asarray(a, dtype=float)
    v = np.broadcast_to(np.asarray(v, dtype=float), a.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = (_floor_integral(a + v) - _floor_integral(a)) / v
    return np.where(v > 0, mean, np.floor(a))


def expected_demand(cfg):
    """(n_stores, T) matrix of expected (non-negative) demand."""
    T = cfg.episode_length
    a = np.array([[seasonal_demand(i, t, cfg) for t in range(T)] for i in range(cfg.n_stores)])
    v = np.asarray(cfg.d_var, dtype=float)[:, None]
    return np.maximum(expected_floor(a, v), 0.0)


def average_production(cfg):
    """Per-step production matching the episode-mean total store demand."""
    return float(np.round(expected_demand(cfg).mean(axis=1).sum()))


@dataclass
class ScimFuture:
    """
    Realised remainder of a supply-chain episode.

    Attributes:
        demand: (steps, n_nodes) demand from the current step on
    """

    demand: np.ndarray

    def head(self, steps):
        return ScimFuture(self.demand[:steps])


class ScimEnv(NetworkEnv):
    """
    Supply-chain environment with one warehouse and ``S`` stores.

    Args:
        config: ScimConfig
    """

    kind = "scim"
    has_production = True

    def __init__(self, config=None):
        super().__init__((config or ScimConfig()).validate())
        cfg = self.config
        self.warehouses = [0]
        self.stores = list(range(1, cfg.n_stores + 1))
        edges = [
            Edge(0, s, int(cfg.travel_times[i]), float(cfg.transport_cost[i]))
            for i, s in enumerate(self.stores)
        ]
        self._graph = Graph([0] + self.stores, edges)
        self.capacity = np.asarray(cfg.capacity, dtype=float)
        self.storage_cost = np.asarray(cfg.storage_cost, dtype=float)
        self.w_pos = np.array([self._graph.node_index(w) for w in self.warehouses], dtype=int)
        self.s_pos = np.array([self._graph.node_index(s) for s in self.stores], dtype=int)
        self._demand = None
        self._expected = expected_demand(cfg)

    @property
    def graph(self):
        return self._graph

    @property
    def message_hops(self):
        return 2

    def nonnegative_mask(self):
        mask = np.zeros(self._graph.n_nodes, dtype=bool)
        mask[self.w_pos] = True
        return mask

    def reset(self, seed: Optional[int] = None) -> Observation:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.seed = seed
        cfg = self.config
        T = cfg.episode_length
        noise = self.rng.uniform(0.0, 1.0, size=(T, cfg.n_stores)) * np.asarray(cfg.d_var, dtype=float)
        self._demand = np.zeros((T, self._graph.n_nodes))
        for t in range(T):
            for i, pos in enumerate(self.s_pos):
                self._demand[t, pos] = scim_demand(i, t, cfg, noise=noise[t, i])
        initial = cfg.initial_inventory if cfg.initial_inventory is not None else cfg.capacity
        self.state = CommodityState(np.asarray(initial, dtype=float))
        self.t = 0
        return self.observe()

    def demand(self, t=None):
        """Realised demand per node position at step ``t`` (default: now)."""
        return self._demand[self.t if t is None else t].copy()

    def demand_estimate(self):
        """(n_nodes, L): the current demand followed by expected future demand."""
        L = self.config.lookahead
        out = np.zeros((self._graph.n_nodes, L))
        T = self.config.episode_length
        for h in range(L):
            t = self.t + h
            if t >= T:
                break
            if h == 0:
                out[:, 0] = self._demand[t]
            else:
                out[self.s_pos, h] = self._expected[:, t]
        return out

    def observe(self) -> Observation:
        cfg = self.config
        s = cfg.feature_scale
        L = cfg.lookahead
        q = self.state.quantities[:, 0]
        pipeline = self.state.pipeline(L)[:, :, 0].T
        incoming = pipeline.copy()
        incoming[self.w_pos] = 0.0
        production = np.zeros_like(pipeline)
        production[self.w_pos] = pipeline[self.w_pos]
        node_features = np.hstack([q[:, None] * s, self.demand_estimate() * s, incoming * s, production * s])
        edge_features = np.column_stack([self._graph.travel_times.astype(float), self._graph.costs])
        positions = np.arange(self._graph.n_nodes)
        return Observation(self._graph, node_features, edge_features, positions, self.w_pos.copy(), step=self.t)

    def desired_state(self, simplex, production=None):
        available = max(float(self.state.quantities[self.w_pos, 0].sum()), 0.0)
        targets = self._spread(simplex, np.arange(self._graph.n_nodes), self._graph.n_nodes, available)
        if production is not None:
            production = round_production(production)
        return DesiredState(targets, production)

    def build_lcp(self, desired, penalty_weight):
        return build_scim_lcp(
            self.state, self._graph, desired, self.demand(), self.capacity, self.warehouses, self.stores,
            penalty_weight=penalty_weight, include_reward=True, production_cost=self.config.production_cost,
        )

    def profit_terms(self, q, demand, flows, production):
        """Revenue and cost terms of one step given start-of-step stock ``q``."""
        cfg = self.config
        stock = np.maximum(q, 0.0)
        sales = np.minimum(demand[self.s_pos], stock[self.s_pos])
        terms = {
            "revenue": cfg.price * float(sales.sum()),
            "storage_cost": float(np.dot(self.storage_cost, stock)),
            "production_cost": cfg.production_cost * float(np.sum(production)),
            "transport_cost": float(np.dot(self._graph.costs, flows.sum(axis=1))),
            "backorder_cost": cfg.backorder_cost * float(np.maximum(-q[self.s_pos], 0.0).sum()),
            "sales": float(sales.sum()),
        }
        terms["reward"] = terms["revenue"] - (
            terms["storage_cost"] + terms["production_cost"] + terms["transport_cost"] + terms["backorder_cost"]
        )
        return terms

    def step(self, action: EnvAction) -> StepResult:
        self._require_running()
        cfg = self.config
        production = np.zeros(self.w_pos.size) if action.production is None else np.asarray(action.production, float)
        if production.shape != (self.w_pos.size,):
            raise DomainError(f"expected {self.w_pos.size} production amounts, got shape {production.shape}")
        if np.any(production < -1e-7):
            raise DomainError("production must be >= 0")
        production = np.maximum(production, 0.0)

        q = self.state.quantities[:, 0].copy()
        demand = self.demand()
        terms = self.profit_terms(q, demand, action.flows.flows, production)

        pending = list(self.state.in_transit)
        for i, pos in enumerate(self.w_pos):
            if production[i] > 0:
                pending.append(Shipment(self.t + cfg.production_time, int(pos), 0, float(production[i])))
        before = CommodityState(self.state.quantities, tuple(pending), self.state.money, self.state.step)
        constraints = Constraints(nonnegative=self.nonnegative_mask(), capacity=False)
        state = step_state(before, self._graph, action.flows, constraints=constraints)

        state.quantities[:, 0] -= demand
        overflow = np.maximum(state.quantities[:, 0] - self.capacity, 0.0)
        if overflow.any():
            logger.debug("clipping %.3g units of overflow at step %d", overflow.sum(), self.t)
            state.quantities[:, 0] -= overflow
        state.money = self.state.money + terms["reward"]
        self.state = state
        self.t += 1

        info = dict(terms)
        info.update({"step": self.t, "demand": float(demand.sum()), "overflow": float(overflow.sum())})
        return StepResult(self.observe(), terms["reward"], self.done, info)

    def reveal_future(self):
        return ScimFuture(self._demand[self.t:].copy())
