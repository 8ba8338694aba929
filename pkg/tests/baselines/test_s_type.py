"""
Tests for the order-up-to policy and its level sweep.
"""
import numpy as np
import pandas as pd
import pytest

from NetFlowRL.baselines import (
    SURFACE_COLUMNS,
    STypeController,
    STypeLevels,
    inventory_position,
    play_episode,
    proportional_allocation,
    s_type_policy,
    s_type_sweep,
)
from NetFlowRL.envs import EnvAction, McfEnv, ScimConfig, ScimEnv
from NetFlowRL.exceptions import DomainError
from NetFlowRL.graph import FlowAction


class TestProportionalAllocation:

    def test_enough_stock(self):
        np.testing.assert_array_equal(proportional_allocation([5.0, 3.0], 10.0), [5.0, 3.0])

    def test_ties_go_to_the_lower_index(self):
        np.testing.assert_array_equal(proportional_allocation([5.0, 3.0], 4.0), [3.0, 1.0])

    def test_largest_remainder(self):
        out = proportional_allocation([3.0, 2.0, 5.0], 4.0)
        np.testing.assert_array_equal(out, [1.0, 1.0, 2.0])

    def test_nothing_available(self):
        np.testing.assert_array_equal(proportional_allocation([2.0, 1.0], -1.0), [0.0, 0.0])


def test_order_up_to(one_store):
    desired = s_type_policy(one_store, STypeLevels(5, 8))
    np.testing.assert_array_equal(desired.target_quantities[:, 0], [0.0, 2.0])
    np.testing.assert_array_equal(desired.production, [3.0])


def test_levels_below_stock_order_nothing(one_store):
    desired = s_type_policy(one_store, STypeLevels(0, 0))
    assert desired.target_quantities.sum() == 0.0
    np.testing.assert_array_equal(desired.production, [0.0])


def test_inventory_position_counts_the_pipeline():
    env = ScimEnv(ScimConfig(
        preset=None, d_max=[10], d_var=[0], storage_cost=[1, 0], transport_cost=[0.5], travel_times=[1],
        capacity=[20, 10], episode_length=4, initial_inventory=[2, 3], production_time=2,
    ))
    env.reset(seed=0)
    env.step(EnvAction(FlowAction([0.0]), production=np.array([4.0])))
    np.testing.assert_array_equal(inventory_position(env), [6.0, -7.0])


def test_level_checks(one_store):
    with pytest.raises(DomainError, match=">= 0"):
        STypeLevels(-1, 2)
    with pytest.raises(DomainError, match="warehouse level"):
        s_type_policy(one_store, STypeLevels(25, 2))
    with pytest.raises(DomainError, match="store level"):
        s_type_policy(one_store, STypeLevels(5, 11))
    env = McfEnv()
    env.reset(seed=0)
    with pytest.raises(DomainError, match="supply-chain"):
        s_type_policy(env, STypeLevels(5, 5))


def test_controller_plays_an_episode():
    env = ScimEnv(ScimConfig(episode_length=6))
    record = play_episode(env, STypeController(STypeLevels(15, 10)), seed=0)
    assert record.steps == 6
    assert record.fallbacks == 0


class TestSweep:

    def test_surface(self, one_store, tmp_path):
        path = tmp_path / "surface.csv"
        result = s_type_sweep(one_store, [0, 5], [0, 8], seeds=[0, 1], path=path)
        assert list(result.surface.columns) == SURFACE_COLUMNS
        assert len(result.surface) == 4
        assert result.best_profit == result.surface["mean_profit"].max()
        best = result.surface.loc[result.surface["mean_profit"].idxmax()]
        assert result.best == STypeLevels(int(best["warehouse_level"]), int(best["store_level"]))
        saved = pd.read_csv(path)
        np.testing.assert_allclose(saved["mean_profit"], result.surface["mean_profit"])

    def test_reproducible(self, one_store):
        a = s_type_sweep(one_store, [2, 6], [4], seeds=[3])
        b = s_type_sweep(one_store, [2, 6], [4], seeds=[3])
        pd.testing.assert_frame_equal(a.surface, b.surface)

    def test_empty_grid(self, one_store):
        with pytest.raises(DomainError, match="empty"):
            s_type_sweep(one_store, [], [1], seeds=[0])
        with pytest.raises(DomainError, match="seed"):
            s_type_sweep(one_store, [1], [1], seeds=[])
