"""
Tests for returns, advantages and the A2C update.
"""
import dataclasses
import logging
from types import SimpleNamespace

import numpy as np
import pytest

from NetFlowRL.exceptions import DomainError
from NetFlowRL.rl import (
    Trajectory,
    TrainConfig,
    a2c_update,
    bootstrap_value,
    normalize,
    returns_and_advantages,
    rollout,
)


def _with(traj, rewards=None, values=None):
    """Copy of ``traj`` with rewards and values overwritten."""
    n = len(traj)
    rewards = traj.rewards if rewards is None else rewards
    values = traj.values if values is None else values
    return Trajectory([dataclasses.replace(tr, reward=float(r), value=float(v))
                       for tr, r, v in zip(traj.transitions, rewards, values)][:n], traj.seed)


class TestReturns:

    def test_backward_recursion(self):
        traj = SimpleNamespace(rewards=[1.0, 1.0, 1.0], values=[0.0, 0.0, 0.0])
        returns, advantages = returns_and_advantages(traj, 0.5)
        np.testing.assert_allclose(returns, [1.75, 1.5, 1.0])
        np.testing.assert_allclose(advantages, returns)

    def test_matches_direct_sum(self):
        rng = np.random.default_rng(3)
        rewards = rng.normal(size=12)
        values = rng.normal(size=12)
        gamma = 0.9
        returns, advantages = returns_and_advantages(SimpleNamespace(rewards=rewards, values=values), gamma, 2.0)
        for t in range(12):
            direct = sum(gamma ** (k - t) * rewards[k] for k in range(t, 12)) + gamma ** (12 - t) * 2.0
            assert returns[t] == pytest.approx(direct)
        np.testing.assert_allclose(advantages, returns - values)

    def test_values_equal_to_returns(self):
        traj = SimpleNamespace(rewards=[2.0, -1.0], values=[1.0, -1.0])
        _, advantages = returns_and_advantages(traj, 1.0)
        np.testing.assert_allclose(advantages, [0.0, 0.0])

    @pytest.mark.parametrize("gamma", [0.0, -0.5, 1.01])
    def test_gamma_range(self, gamma):
        with pytest.raises(DomainError, match="gamma"):
            returns_and_advantages(SimpleNamespace(rewards=[1.0], values=[0.0]), gamma)


class TestNormalize:

    def test_unit_variance(self):
        adv = normalize([1.0, 2.0, 3.0, 6.0])
        assert adv.mean() == pytest.approx(0.0)
        assert adv.std() == pytest.approx(1.0)

    def test_constant_is_only_centred(self):
        np.testing.assert_array_equal(normalize([4.0, 4.0, 4.0]), [0.0, 0.0, 0.0])

    def test_single_value_untouched(self):
        np.testing.assert_array_equal(normalize([5.0]), [5.0])


class TestUpdate:

    def test_zero_advantage_leaves_actor_unchanged(self, small_policy, trajectory):
        returns, _ = returns_and_advantages(trajectory, 0.97)
        traj = _with(trajectory, values=returns)
        before = small_policy.params.state()
        cfg = TrainConfig(value_weight=0.0, normalize_advantages=False, learning_rate=0.1)
        diag = a2c_update(small_policy, [traj], cfg)
        assert diag["grad_norm"] == 0.0
        after = small_policy.params.state()
        for name in before:
            np.testing.assert_array_equal(after[name], before[name])

    def test_positive_advantage_raises_log_prob(self, small_policy, trajectory):
        traj = _with(Trajectory(trajectory.transitions[:1]), rewards=[1.0], values=[0.0])
        tr = traj.transitions[0]
        before = small_policy.evaluate(tr.observation, tr.sample)[0].item()
        cfg = TrainConfig(value_weight=0.0, normalize_advantages=False, learning_rate=1e-3)
        diag = a2c_update(small_policy, [traj], cfg)
        assert not diag["skipped"]
        assert diag["steps"] == 1
        after = small_policy.evaluate(tr.observation, tr.sample)[0].item()
        assert after > before

    def test_duplicate_batch_doubles_gradient(self, small_policy, trajectory):
        cfg = TrainConfig(normalize_advantages=False, grad_clip=None)
        state = small_policy.params.state()
        single = a2c_update(small_policy, [trajectory], cfg)
        small_policy.params.load_state(state)
        double = a2c_update(small_policy, [trajectory, trajectory], cfg)
        assert single["grad_norm"] > 0
        assert double["grad_norm"] == pytest.approx(2.0 * single["grad_norm"], rel=1e-9)
        assert double["steps"] == 2 * single["steps"]
        assert double["mean_return"] == pytest.approx(single["mean_return"])

    def test_non_finite_loss_is_skipped(self, small_policy, trajectory, caplog):
        traj = _with(trajectory, rewards=[np.nan] + list(trajectory.rewards[1:]))
        before = small_policy.params.state()
        with caplog.at_level(logging.WARNING, logger="NetFlowRL.rl.a2c"):
            diag = a2c_update(small_policy, [traj], TrainConfig())
        assert diag["skipped"]
        assert "skipping" in caplog.text
        after = small_policy.params.state()
        for name in before:
            np.testing.assert_array_equal(after[name], before[name])

    def test_gradients_cleared_after_step(self, small_policy, trajectory):
        a2c_update(small_policy, [trajectory], TrainConfig())
        assert small_policy.params.grad_norm() == 0.0

    def test_needs_a_transition(self, small_policy):
        with pytest.raises(DomainError, match="non-empty"):
            a2c_update(small_policy, [Trajectory()], TrainConfig())


class TestBootstrap:

    def test_terminal_trajectory_bootstraps_zero(self, small_policy, trajectory):
        assert trajectory.terminal
        assert bootstrap_value(small_policy, trajectory) == 0.0

    def test_truncated_rollout_targets_next_value(self, bandit_env, small_policy):
        bandit_env.reset(seed=0)
        traj = rollout(bandit_env, small_policy, steps=1, rng=np.random.default_rng(0), penalty_weight=10.0)
        assert not traj.terminal
        assert traj.final_observation is not None
        next_value = small_policy.value(traj.final_observation)
        assert bootstrap_value(small_policy, traj) == pytest.approx(next_value)

        tr = traj.transitions[0]
        value = small_policy.evaluate(tr.observation, tr.sample)[1].item()
        target = tr.reward + 0.97 * next_value
        cfg = TrainConfig(gamma=0.97, normalize_advantages=False)
        diag = a2c_update(small_policy, [traj], cfg)
        assert diag["value_loss"] == pytest.approx((value - target) ** 2)
        assert diag["value_loss"] != pytest.approx((value - tr.reward) ** 2)
