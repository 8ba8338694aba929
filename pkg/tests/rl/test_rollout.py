"""
Tests for episode collection and the policy controller.
"""
import numpy as np
import pytest

from NetFlowRL.baselines import GreedyController, play_episode
from NetFlowRL.envs import McfConfig, McfEnv, ScimEnv
from NetFlowRL.nn import PolicyConfig
from NetFlowRL.rl import PolicyController, apply_control, policy_for_env, rollout


def test_transitions_record_the_step(bandit_env, trajectory):
    assert len(trajectory) == 3
    assert trajectory.terminal
    assert trajectory.seed == 0
    for tr in trajectory.transitions:
        assert tr.sample.simplex.shape == (3, 1)
        assert np.isfinite(tr.log_prob)
        assert tr.observation.node_features.shape[0] == 3
    assert trajectory.total_reward == pytest.approx(trajectory.rewards.sum())


def test_step_limit(bandit_env, small_policy):
    bandit_env.reset(seed=1)
    traj = rollout(bandit_env, small_policy, steps=2, rng=np.random.default_rng(0))
    assert len(traj) == 2
    assert not traj.terminal
    assert bandit_env.t == 2


def test_one_step_episode():
    env = McfEnv(McfConfig(episode_length=1))
    policy = policy_for_env(env, PolicyConfig(hidden=4))
    env.reset(seed=0)
    traj = rollout(env, policy, rng=np.random.default_rng(0), penalty_weight=1.0)
    assert len(traj) == 1
    assert traj.terminal


def test_zero_penalty_matches_greedy():
    env = McfEnv(McfConfig(variant="2hop", episode_length=6))
    policy = policy_for_env(env, PolicyConfig(hidden=8))
    greedy = play_episode(env, GreedyController(), seed=5)
    env.reset(seed=5)
    traj = rollout(env, policy, rng=np.random.default_rng(0), penalty_weight=0.0)
    np.testing.assert_allclose(traj.rewards, greedy.rewards)


def test_deterministic_rollouts_repeat(bandit_env, small_policy):
    runs = []
    for _ in range(2):
        bandit_env.reset(seed=2)
        runs.append(rollout(bandit_env, small_policy, rng=np.random.default_rng(), penalty_weight=10.0,
                            deterministic=True))
    np.testing.assert_array_equal(runs[0].rewards, runs[1].rewards)
    for a, b in zip(runs[0].transitions, runs[1].transitions):
        np.testing.assert_array_equal(a.sample.simplex, b.sample.simplex)


def test_seeded_sampling_repeats(bandit_env, small_policy):
    runs = []
    for _ in range(2):
        bandit_env.reset(seed=2)
        runs.append(rollout(bandit_env, small_policy, rng=np.random.default_rng(7), penalty_weight=10.0))
    np.testing.assert_array_equal(runs[0].log_probs, runs[1].log_probs)


def test_apply_control_steps_the_environment(bandit_env):
    bandit_env.reset(seed=0)
    action, step, fallback = apply_control(bandit_env, None, 0.0)
    assert not fallback
    assert bandit_env.t == 1
    assert np.all(action.flows.flows >= 0)
    assert action.flows.flows.sum() <= 10.0 + 1e-9
    assert np.isfinite(step.reward)


def test_production_samples_on_supply_chain():
    env = ScimEnv()
    policy = policy_for_env(env, PolicyConfig(hidden=8))
    env.reset(seed=0)
    traj = rollout(env, policy, steps=2, rng=np.random.default_rng(0), penalty_weight=1.0)
    for tr in traj.transitions:
        assert tr.sample.production.shape == (1,)
        assert tr.action.production.shape == (1,)
        assert tr.action.production[0] >= 0
        assert float(tr.action.production[0]).is_integer()


class TestPolicyController:

    def test_plays_a_whole_episode(self, bandit_env, small_policy):
        controller = PolicyController(small_policy, penalty_weight=10.0)
        record = play_episode(bandit_env, controller, seed=4)
        assert controller.name == "graph_rl"
        assert record.steps == 3
        assert record.fallbacks == 0

    def test_matches_deterministic_rollout(self, bandit_env, small_policy):
        record = play_episode(bandit_env, PolicyController(small_policy, penalty_weight=10.0), seed=4)
        bandit_env.reset(seed=4)
        traj = rollout(bandit_env, small_policy, penalty_weight=10.0, deterministic=True)
        np.testing.assert_allclose(record.rewards, traj.rewards)
