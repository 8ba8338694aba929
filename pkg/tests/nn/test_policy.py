"""
Tests for the actor-critic network and its checkpoints.
"""
import json

import numpy as np
import pytest

from NetFlowRL.envs import McfConfig, McfEnv, Observation
from NetFlowRL.exceptions import CheckpointError, ConfigError, TopologyMismatchError
from NetFlowRL.graph import Edge, Graph
from NetFlowRL.nn import GraphPolicy, PolicyConfig, backward, load_checkpoint, save_checkpoint

from .gradcheck import numeric_grad


def _policy(obs, seed=0, **kwargs):
    return GraphPolicy(PolicyConfig(hidden=8, **kwargs), obs.node_dim, obs.edge_dim, seed=seed)


class TestForward:

    @pytest.mark.parametrize("architecture", ["mpnn", "gcn"])
    def test_sample_lies_on_simplex(self, mcf_env, architecture):
        obs = mcf_env.observe()
        policy = _policy(obs, architecture=architecture)
        sample = policy.sample(obs, np.random.default_rng(0))
        assert sample.simplex.shape == (5, 1)
        assert sample.simplex.sum() == pytest.approx(1.0)
        assert np.isfinite(sample.log_prob)
        assert sample.production is None

    def test_deterministic_sample_is_the_mean(self, mcf_env):
        obs = mcf_env.observe()
        policy = _policy(obs)
        alpha = policy.forward(obs).alpha.data
        sample = policy.sample(obs, np.random.default_rng(0), deterministic=True)
        np.testing.assert_allclose(sample.simplex, alpha / alpha.sum())

    def test_production_head(self, scim_env):
        obs = scim_env.observe()
        policy = GraphPolicy(PolicyConfig(hidden=8, direction="both"), obs.node_dim, obs.edge_dim, production=True)
        out = policy.forward(obs)
        assert out.alpha.shape == (3, 1)
        assert out.mu.shape == (1,)
        assert np.all(out.sigma.data > 0)
        sample = policy.sample(obs, np.random.default_rng(2))
        assert sample.production.shape == (1,)
        log_prob, value, entropy = policy.evaluate(obs, sample)
        assert log_prob.item() == pytest.approx(sample.log_prob)
        assert value.item() == pytest.approx(sample.value)
        assert np.isfinite(entropy.item())

    def test_multi_commodity_heads(self):
        env = McfEnv(McfConfig(variant="multi_commodity"))
        obs = env.reset(seed=0)
        policy = GraphPolicy(PolicyConfig(hidden=8), obs.node_dim, obs.edge_dim, heads=2)
        sample = policy.sample(obs, np.random.default_rng(0))
        np.testing.assert_allclose(sample.simplex.sum(axis=0), [1.0, 1.0])

    def test_same_seed_same_network(self, mcf_env):
        obs = mcf_env.observe()
        a, b = _policy(obs, seed=5), _policy(obs, seed=5)
        assert a.forward(obs).value.item() == b.forward(obs).value.item()
        assert _policy(obs, seed=6).forward(obs).value.item() != a.forward(obs).value.item()

    def test_relabelled_graph(self):
        rng = np.random.default_rng(0)
        pairs = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 0)]
        perm = [2, 3, 0, 1]
        feats = rng.normal(size=(4, 2))
        edge_feats = rng.normal(size=(5, 1))
        outs = []
        for ids in (list(range(4)), perm):
            graph = Graph(ids, [Edge(ids[s], ids[d]) for s, d in pairs])
            obs = Observation(graph, feats, edge_feats, np.arange(4))
            policy = GraphPolicy(PolicyConfig(hidden=6, aggregator="sum"), 2, 1, seed=3)
            out = policy.forward(obs)
            outs.append((out.alpha.data, out.value.item()))
        np.testing.assert_allclose(outs[0][0], outs[1][0], rtol=1e-10)
        assert outs[0][1] == pytest.approx(outs[1][1], rel=1e-10)

    def test_feature_width_is_checked(self, mcf_env):
        obs = mcf_env.observe()
        policy = GraphPolicy(PolicyConfig(hidden=8), obs.node_dim + 1, obs.edge_dim)
        with pytest.raises(TopologyMismatchError):
            policy.forward(obs)


def test_log_prob_gradient_matches_finite_differences(mcf_env):
    obs = mcf_env.observe()
    policy = _policy(obs, layers=1)
    sample = policy.sample(obs, np.random.default_rng(1))
    log_prob, _, _ = policy.evaluate(obs, sample)
    policy.params.zero_grad()
    backward(log_prob)
    for name in ("actor.head.2.bias", "actor.head.0.weight"):
        param = policy.params[name]
        analytic = param.grad.copy()
        original = param.data.copy()

        def f(values):
            param.data = values
            return policy.evaluate(obs, sample)[0].item()

        numeric = numeric_grad(f, original)
        param.data = original
        np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-6)


class TestMlp:

    def test_fixed_size(self, mcf_env):
        obs = mcf_env.observe()
        policy = GraphPolicy(PolicyConfig(architecture="mlp", hidden=8), obs.node_dim, obs.edge_dim,
                             input_shape=(5, 6, 5, 0))
        assert policy.sample(obs, np.random.default_rng(0)).simplex.shape == (5, 1)

    def test_other_graph_is_rejected(self, mcf_env):
        obs = mcf_env.observe()
        policy = GraphPolicy(PolicyConfig(architecture="mlp", hidden=8), obs.node_dim, obs.edge_dim,
                             input_shape=(5, 6, 5, 0))
        other = McfEnv(McfConfig(variant="3hop")).reset(seed=0)
        with pytest.raises(TopologyMismatchError):
            policy.forward(other)

    def test_needs_input_shape(self):
        with pytest.raises(ConfigError, match="policy.architecture"):
            GraphPolicy(PolicyConfig(architecture="mlp"), 3, 1)


def test_config_errors():
    with pytest.raises(ConfigError, match="policy.architecture"):
        PolicyConfig(architecture="transformer").validate()
    with pytest.raises(ConfigError, match="policy.aggregator"):
        PolicyConfig(aggregator="median").validate()
    with pytest.raises(ConfigError, match="policy.hidden"):
        PolicyConfig(hidden=0).validate()
    with pytest.raises(ConfigError, match="policy.dropout"):
        PolicyConfig.from_dict({"dropout": 0.1})


class TestCheckpoint:

    def test_round_trip(self, mcf_env, tmp_path):
        obs = mcf_env.observe()
        trained = _policy(obs, seed=0)
        path = save_checkpoint(trained.params, tmp_path / "policy.json", {"env": "mcf"})
        state, metadata = load_checkpoint(path)
        assert metadata == {"env": "mcf"}
        fresh = _policy(obs, seed=9)
        fresh.params.load_state(state)
        np.testing.assert_array_equal(fresh.forward(obs).alpha.data, trained.forward(obs).alpha.data)

    def test_shape_mismatch(self, mcf_env, tmp_path):
        obs = mcf_env.observe()
        save_checkpoint(_policy(obs).params, tmp_path / "small.json")
        state, _ = load_checkpoint(tmp_path / "small.json")
        bigger = GraphPolicy(PolicyConfig(hidden=16), obs.node_dim, obs.edge_dim)
        with pytest.raises(CheckpointError, match="shape"):
            bigger.params.load_state(state)

    def test_missing_tensor(self, mcf_env):
        policy = _policy(mcf_env.observe())
        state = policy.params.state()
        del state["value.1.bias"]
        with pytest.raises(CheckpointError, match="missing"):
            policy.params.load_state(state)

    def test_bad_files(self, tmp_path):
        garbage = tmp_path / "garbage.json"
        garbage.write_text("not json")
        with pytest.raises(CheckpointError, match="not a checkpoint"):
            load_checkpoint(garbage)
        old = tmp_path / "old.json"
        old.write_text(json.dumps({"version": 0, "tensors": []}))
        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(old)
