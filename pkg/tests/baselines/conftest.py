import pytest

from NetFlowRL.envs import ScimConfig, ScimEnv


@pytest.fixture
def one_store():
    """Warehouse with stock 2 and one store with stock 3, demand 10 then 0."""
    env = ScimEnv(ScimConfig(
        preset=None, d_max=[10], d_var=[0], storage_cost=[1, 0], transport_cost=[0.5], travel_times=[1],
        capacity=[20, 10], episode_length=4, initial_inventory=[2, 3],
    ))
    env.reset(seed=0)
    return env
