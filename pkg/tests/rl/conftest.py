import numpy as np
import pytest

from NetFlowRL.envs import McfConfig, McfEnv
from NetFlowRL.nn import PolicyConfig
from NetFlowRL.rl import policy_for_env, rollout


@pytest.fixture
def bandit_env():
    return McfEnv(McfConfig(variant="bandit", episode_length=3, demand_spread=0))


@pytest.fixture
def small_policy(bandit_env):
    return policy_for_env(bandit_env, PolicyConfig(hidden=8), seed=0)


@pytest.fixture
def trajectory(bandit_env, small_policy):
    """Three sampled steps on the bandit graph."""
    bandit_env.reset(seed=0)
    return rollout(bandit_env, small_policy, rng=np.random.default_rng(0), penalty_weight=10.0)
