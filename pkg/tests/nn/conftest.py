import pytest

from NetFlowRL.envs import McfConfig, McfEnv, ScimEnv


@pytest.fixture
def mcf_env():
    env = McfEnv(McfConfig(variant="2hop"))
    env.reset(seed=0)
    return env


@pytest.fixture
def scim_env():
    env = ScimEnv()
    env.reset(seed=0)
    return env
