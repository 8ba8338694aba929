"""
Order-up-to (S-type) inventory policy and its level sweep.

The warehouse orders production up to its level and every store requests
shipments up to the store level, both counting stock on hand plus everything
already in the pipeline. Store requests that exceed the warehouse stock are
scaled down in proportion to the deficits; the supply-chain control problem
then turns the requests into a feasible action.
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..exceptions import DomainError
from ..lcp import DesiredState
from .base import Controller, play_episode

logger = logging.getLogger(__name__)

SURFACE_COLUMNS = ["warehouse_level", "store_level", "mean_profit"]

# distance weight for the order-up-to requests; above every unit cost and price
S_TYPE_WEIGHT = 1000.0


@dataclass(frozen=True)
class STypeLevels:
    """Order-up-to levels of the warehouse and of every store."""

    warehouse: int
    store: int

    def __post_init__(self):
        if self.warehouse < 0 or self.store < 0:
            raise DomainError("order-up-to levels must be >= 0")

    def check(self, capacity):
        """Reject levels above the warehouse capacity or every store capacity."""
        capacity = np.asarray(capacity, dtype=float)
        if self.warehouse > capacity[0]:
            raise DomainError(f"warehouse level {self.warehouse} exceeds capacity {capacity[0]:g}")
        if self.store > capacity[1:].max():
            raise DomainError(f"store level {self.store} exceeds every store capacity")
        return self


def proportional_allocation(deficits, available):
    """
    Integer split of ``available`` units proportional to ``deficits``.

    Each entry gets at most its deficit; leftover units after flooring go to
    the largest fractional parts (ties to the lower index).
    """
    deficits = np.maximum(np.asarray(deficits, dtype=float), 0.0)
    total = deficits.sum()
    available = max(float(np.floor(available + 1e-9)), 0.0)
    if total <= available:
        return deficits.copy()
    share = deficits * available / total
    out = np.floor(share + 1e-9)
    left = int(round(available - out.sum()))
    order = sorted(range(deficits.size), key=lambda i: (-(share[i] - out[i]), i))
    for i in order[:left]:
        out[i] += 1.0
    return out


def inventory_position(env):
    """Stock on hand plus pipeline (production and shipments in transit) per node position."""
    pipeline = np.zeros(env.graph.n_nodes)
    for s in env.state.in_transit:
        pipeline[s.node] += s.amount
    return env.state.quantities[:, 0] + pipeline


def s_type_policy(env, levels):
    """
    Production order and store requests of the order-up-to policy.

    Returns:
        DesiredState: per-node requested inflow (stores) and the production order
    """
    if env.kind != "scim":
        raise DomainError("the order-up-to policy applies to the supply-chain environment")
    levels.check(env.capacity)
    position = inventory_position(env)
    w_pos, s_pos = env.w_pos, env.s_pos

    order = np.maximum(levels.warehouse - position[w_pos], 0.0)
    store_levels = np.minimum(levels.store, env.capacity[s_pos])
    deficits = np.maximum(store_levels - position[s_pos], 0.0)
    available = max(float(env.state.quantities[w_pos, 0].sum()), 0.0)

    targets = np.zeros(env.graph.n_nodes)
    targets[s_pos] = proportional_allocation(np.floor(deficits + 1e-9), available)
    return DesiredState(targets, np.floor(order + 1e-9))


class STypeController(Controller):
    name = "s_type"

    def __init__(self, levels, backend="simplex", penalty_weight=S_TYPE_WEIGHT):
        self.levels = levels
        self.backend = backend
        self.penalty_weight = penalty_weight

    def act(self, env, rng):
        desired = s_type_policy(env, self.levels)
        action, result = env.control(desired, self.penalty_weight, backend=self.backend)
        return action, {"fallback": not result.feasible}


@dataclass
class SweepResult:
    """
    Attributes:
        best: STypeLevels with the highest mean profit
        best_profit: that profit
        surface: DataFrame with the surface columns, one row per grid point
    """

    best: STypeLevels
    best_profit: float
    surface: pd.DataFrame


def s_type_sweep(env, warehouse_levels, store_levels, seeds, backend="simplex", path=None):
    """
    Exhaustive search over order-up-to levels.

    Every grid point is evaluated on the same episode seeds.

    Args:
        env: supply-chain environment
        warehouse_levels: iterable of warehouse levels
        store_levels: iterable of store levels
        seeds: evaluation episode seeds
        backend: LP backend of the control problem
        path: optional CSV destination of the surface

    Returns:
        SweepResult
    """
    warehouse_levels = [int(w) for w in warehouse_levels]
    store_levels = [int(s) for s in store_levels]
    seeds = list(seeds)
    if not warehouse_levels or not store_levels:
        raise DomainError("the level grid is empty")
    if not seeds:
        raise DomainError("need at least one evaluation seed")

    rows = []
    for w, s in itertools.product(warehouse_levels, store_levels):
        controller = STypeController(STypeLevels(w, s).check(env.capacity), backend)
        profits = [play_episode(env, controller, seed).total_reward for seed in seeds]
        rows.append({"warehouse_level": w, "store_level": s, "mean_profit": float(np.mean(profits))})
        logger.debug("order-up-to (%d, %d): mean profit %.3f", w, s, rows[-1]["mean_profit"])

    surface = pd.DataFrame(rows, columns=SURFACE_COLUMNS)
    best_row = surface.loc[surface["mean_profit"].idxmax()]
    best = STypeLevels(int(best_row["warehouse_level"]), int(best_row["store_level"]))
    logger.info("best order-up-to levels %s with mean profit %.3f", best, best_row["mean_profit"])
    if path is not None:
        surface.to_csv(path, index=False)
    return SweepResult(best, float(best_row["mean_profit"]), surface)
