"""
Tests for the perfect-information planner.
"""
import numpy as np
import pytest

from NetFlowRL.baselines import (
    EquallyBalancedController,
    GreedyController,
    OracleController,
    RandomController,
    STypeController,
    STypeLevels,
    fit_to_stock,
    mpc_oracle,
    play_episode,
)
from NetFlowRL.envs import DvrConfig, DvrEnv, EnvAction, McfConfig, McfEnv, ScimConfig, ScimEnv
from NetFlowRL.exceptions import DomainError
from NetFlowRL.graph import FlowAction
from NetFlowRL.nn import PolicyConfig
from NetFlowRL.rl import PolicyController, policy_for_env


def test_routes_through_the_fast_relay():
    env = McfEnv(McfConfig(variant="2hop", travel_times=[1, 3, 3, 2, 5, 5], episode_length=8))
    env.reset(seed=0)
    plan = mpc_oracle(env)
    assert len(plan.actions) == 8
    flows = np.stack([a.flows.flows[:, 0] for a in plan.actions])
    assert flows[:, 0].sum() > 0
    np.testing.assert_allclose(flows[:, [1, 2, 4, 5]], 0.0, atol=1e-7)


def test_idle_supply_chain_pays_storage_only():
    env = ScimEnv(ScimConfig(d_max=[0, 0], d_var=[0, 0], episode_length=5))
    env.reset(seed=0)
    plan = mpc_oracle(env)
    # full stock (20, 9, 12) at storage costs (3, 2, 1)
    assert plan.objective == pytest.approx(-5 * 90.0)
    record = play_episode(env, OracleController(), seed=0)
    assert record.total_reward == pytest.approx(-450.0)


@pytest.mark.parametrize("backend", ["highs", "simplex"])
def test_dominates_greedy_on_flow(backend):
    env = McfEnv(McfConfig(variant="2hop", episode_length=6))
    greedy = play_episode(env, GreedyController(), seed=3)
    oracle = play_episode(env, OracleController(backend), seed=3)
    assert oracle.total_reward >= greedy.total_reward - 1e-6
    assert oracle.fallbacks == 0


def test_plan_bounds_supply_chain_heuristics():
    env = ScimEnv(ScimConfig(episode_length=6))
    env.reset(seed=2)
    bound = mpc_oracle(env).objective
    for controller in (GreedyController(), STypeController(STypeLevels(15, 10))):
        assert play_episode(env, controller, seed=2).total_reward <= bound + 1e-6


def test_plan_bounds_greedy_routing():
    env = DvrEnv(DvrConfig(rows=2, cols=2, fleet_size=8, base_rate=1.0, episode_length=6))
    env.reset(seed=1)
    plan = mpc_oracle(env)
    for action in plan.actions:
        assert action.passenger_flows.shape == (4, 4)
    greedy = play_episode(env, GreedyController(), seed=1)
    assert greedy.total_reward <= plan.objective + 1e-6


def test_plan_starts_mid_episode():
    env = McfEnv(McfConfig(variant="2hop", episode_length=6))
    env.reset(seed=0)
    env.step(env.zero_action())
    env.step(env.zero_action())
    plan = mpc_oracle(env)
    assert plan.start_step == 2
    assert len(plan.actions) == 4
    assert plan.n_vars > 0


def test_fit_to_stock_scales_departures():
    env = McfEnv(McfConfig(variant="bandit", demand_spread=0))
    env.reset(seed=0)
    fitted = fit_to_stock(EnvAction(FlowAction([8.0, 4.0])), env)
    np.testing.assert_allclose(fitted.flows.flows[:, 0], [8.0 * 10 / 12, 4.0 * 10 / 12])
    untouched = fit_to_stock(EnvAction(FlowAction([3.0, 4.0])), env)
    np.testing.assert_array_equal(untouched.flows.flows[:, 0], [3.0, 4.0])


class TestHorizon:

    def test_window_truncates_the_program(self):
        env = McfEnv(McfConfig(variant="2hop", episode_length=6))
        env.reset(seed=0)
        full = mpc_oracle(env)
        window = mpc_oracle(env, horizon=2)
        assert len(window.actions) == 2
        assert window.n_vars < full.n_vars
        assert mpc_oracle(env, horizon=50).objective == pytest.approx(full.objective)

    def test_window_must_be_positive(self):
        env = McfEnv(McfConfig(variant="2hop", episode_length=6))
        env.reset(seed=0)
        with pytest.raises(DomainError, match="horizon"):
            mpc_oracle(env, horizon=0)

    def test_receding_controller_plays_the_episode(self):
        env = McfEnv(McfConfig(variant="2hop", episode_length=6))
        env.reset(seed=4)
        bound = mpc_oracle(env).objective
        record = play_episode(env, OracleController(horizon=2), seed=4)
        assert record.steps == 6
        assert record.total_reward <= bound + 1e-6


def _small_env(kind):
    if kind == "mcf":
        return McfEnv(McfConfig(variant="2hop", episode_length=6))
    if kind == "scim":
        return ScimEnv(ScimConfig(episode_length=6))
    return DvrEnv(DvrConfig(rows=2, cols=2, fleet_size=8, base_rate=1.0, episode_length=6))


def _controllers(env):
    yield RandomController()
    yield GreedyController()
    if env.kind == "scim":
        yield STypeController(STypeLevels(15, 10))
    if env.kind == "dvr":
        yield EquallyBalancedController()
    yield PolicyController(policy_for_env(env, PolicyConfig(hidden=8), seed=0), deterministic=False)


class TestDominance:
    """The full-information plan bounds what any controller earns on the same seed."""

    @pytest.mark.parametrize("kind", ["mcf", "scim", "dvr"])
    @pytest.mark.parametrize("seeds", [range(2), pytest.param(range(20), marks=pytest.mark.slow)])
    def test_plan_bounds_every_controller(self, kind, seeds):
        env = _small_env(kind)
        for controller in _controllers(env):
            for seed in seeds:
                env.reset(seed=seed)
                bound = mpc_oracle(env).objective
                record = play_episode(env, controller, seed=seed)
                assert record.total_reward <= bound + 1e-6, (controller.name, seed)
