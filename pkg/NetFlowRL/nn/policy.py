"""
Actor-critic policy over graphs.

The actor maps node features to the parameters of the desired-next-state
distribution: Dirichlet concentrations over the action nodes (one head per
commodity) and, when production is controlled, Gaussian mean and scale per
production node. The critic has its own encoder and pools node embeddings into
a scalar value. Encoders are message passing (``mpnn``), graph convolution
(``gcn``) or a fixed-size perceptron over flattened features (``mlp``).
"""

from dataclasses import asdict, dataclass, fields

import numpy as np

from ..exceptions import ConfigError, TopologyMismatchError
from .autograd import Tensor, concat, softplus
from .checkpoint import PolicyParams
from .distributions import (
    dirichlet_entropy,
    dirichlet_log_prob,
    dirichlet_sample,
    gaussian_entropy,
    gaussian_log_prob,
)
from .layers import (
    AGGREGATORS,
    DIRECTIONS,
    MessageGraph,
    dense_adjacency,
    gcn_layer,
    global_sum_pool,
    init_linear,
    mlp,
    mpnn_layer,
    value_head,
)

ARCHITECTURES = ("mpnn", "gcn", "mlp")
_ALPHA_FLOOR = 1e-6
_SIGMA_FLOOR = 1e-3


@dataclass
class PolicyConfig:
    architecture: str = "mpnn"
    hidden: int = 32
    layers: int = 2
    aggregator: str = "max"
    direction: str = "reverse"
    production_scale: float = 10.0

    def validate(self, path="policy"):
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(f"{path}.architecture", f"must be one of {ARCHITECTURES}")
        if self.aggregator not in AGGREGATORS:
            raise ConfigError(f"{path}.aggregator", f"must be one of {AGGREGATORS}")
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"{path}.direction", f"must be one of {DIRECTIONS}")
        if self.hidden < 1:
            raise ConfigError(f"{path}.hidden", "must be >= 1")
        if self.layers < 1:
            raise ConfigError(f"{path}.layers", "must be >= 1")
        if self.production_scale <= 0:
            raise ConfigError(f"{path}.production_scale", "must be > 0")
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data, path="policy"):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown field")
        return cls(**data).validate(path)


@dataclass
class PolicyOutput:
    """Distribution parameters and value for one observation."""

    alpha: Tensor = None
    mu: Tensor = None
    sigma: Tensor = None
    value: Tensor = None


@dataclass
class PolicySample:
    """
    A sampled desired state before it is turned into targets.

    Attributes:
        simplex: (n_action_nodes, heads) Dirichlet draw, columns sum to one
        production: raw (unrounded) Gaussian draw per production node
        log_prob: log-density of the draw
        value: critic estimate for the observation
    """

    simplex: np.ndarray = None
    production: np.ndarray = None
    log_prob: float = 0.0
    value: float = 0.0


class GraphPolicy:
    """
    Actor-critic network.

    Args:
        config: PolicyConfig
        node_dim: node feature width
        edge_dim: edge feature width
        heads: Dirichlet heads (commodities)
        production: whether the actor also emits a Gaussian production head
        seed: initialisation seed
        input_shape: (n_nodes, n_edges, n_action, n_production) of the graph a
            ``mlp`` policy is built for; ignored by graph architectures
    """

    def __init__(self, config, node_dim, edge_dim, heads=1, production=False, seed=0, input_shape=None):
        self.config = config.validate()
        self.node_dim = int(node_dim)
        self.edge_dim = int(edge_dim)
        self.heads = int(heads)
        self.production = bool(production)
        self.input_shape = tuple(input_shape) if input_shape is not None else None
        if config.architecture == "mlp" and self.input_shape is None:
            raise ConfigError("policy.architecture", "an mlp policy needs the graph input shape")
        self.params = PolicyParams()
        self._build(np.random.default_rng(seed))

    def _build(self, rng):
        cfg = self.config
        h = cfg.hidden
        p = {}
        if cfg.architecture == "mlp":
            n_nodes, n_edges, n_action, n_prod = self.input_shape
            flat = n_nodes * self.node_dim + n_edges * self.edge_dim
            for side in ("actor", "critic"):
                p.update(init_linear(rng, flat, h, f"{side}.trunk.0"))
                p.update(init_linear(rng, h, h, f"{side}.trunk.1"))
            p.update(init_linear(rng, h, n_action * self.heads, "actor.out"))
            if self.production:
                p.update(init_linear(rng, h, 2 * n_prod, "actor.prod_out"))
            p.update(init_linear(rng, h, 1, "value.0"))
        else:
            for side in ("actor", "critic"):
                d = self.node_dim
                for k in range(cfg.layers):
                    if cfg.architecture == "mpnn":
                        p.update(init_linear(rng, 2 * d + self.edge_dim, h, f"{side}.mp{k}.0"))
                        p.update(init_linear(rng, h, h, f"{side}.mp{k}.1"))
                    else:
                        p.update(init_linear(rng, d, h, f"{side}.gcn{k}"))
                    d = h
            emb = h + self.node_dim
            p.update(init_linear(rng, emb, h, "actor.head.0"))
            p.update(init_linear(rng, h, h, "actor.head.1"))
            p.update(init_linear(rng, h, self.heads, "actor.head.2"))
            if self.production:
                p.update(init_linear(rng, emb, h, "actor.prod.0"))
                p.update(init_linear(rng, h, 2, "actor.prod.1"))
            p.update(init_linear(rng, emb, h, "value.0"))
            p.update(init_linear(rng, h, 1, "value.1"))
        self.params.update(p)

    def _encode(self, side, x0, edge_feats, mg):
        cfg = self.config
        x = x0
        if cfg.architecture == "mpnn":
            e = mg.edge_rows_of(edge_feats) if self.edge_dim else np.zeros((mg.src.size, 0))
            for k in range(cfg.layers):
                x = mpnn_layer(x, e, mg, self.params, f"{side}.mp{k}", cfg.aggregator)
        else:
            adjacency = dense_adjacency(mg)
            for k in range(cfg.layers):
                x = gcn_layer(x, adjacency, self.params[f"{side}.gcn{k}.weight"], self.params[f"{side}.gcn{k}.bias"])
        return concat([x, x0], axis=1)

    def _canonical_index(self, mg, positions):
        lookup = {int(p): i for i, p in enumerate(mg.node_positions)}
        try:
            return np.array([lookup[int(p)] for p in positions], dtype=int)
        except KeyError as exc:
            raise TopologyMismatchError(f"node position {exc.args[0]} is not an active node") from exc

    def _forward_mlp(self, obs):
        n_nodes, n_edges, n_action, n_prod = self.input_shape
        graph = obs.graph
        mg = MessageGraph.from_graph(graph, "forward")
        edges = np.flatnonzero(graph.active_edge_mask())
        order = sorted(edges, key=lambda e: (graph.edges[e].src, graph.edges[e].dst, e))
        x_nodes = mg.node_rows(obs.node_features)
        x_edges = np.asarray(obs.edge_features, dtype=float).reshape(graph.n_edges, -1)[order]
        if (mg.n, len(order), len(obs.action_nodes), len(obs.production_nodes)) != (n_nodes, n_edges, n_action, n_prod) \
                or x_nodes.shape[1] != self.node_dim:
            raise TopologyMismatchError(
                f"mlp policy built for {n_nodes} nodes / {n_edges} edges, got {mg.n} / {len(order)}"
            )
        flat = Tensor(np.concatenate([x_nodes.ravel(), x_edges.ravel()]))
        out = PolicyOutput()
        actor = mlp(flat, self.params, "actor.trunk", 2, activate_last=True)
        if n_action:
            raw = (actor @ self.params["actor.out.weight"] + self.params["actor.out.bias"]).reshape(n_action, self.heads)
            out.alpha = softplus(raw) + _ALPHA_FLOOR
        if self.production:
            raw = (actor @ self.params["actor.prod_out.weight"] + self.params["actor.prod_out.bias"]).reshape(n_prod, 2)
            out.mu, out.sigma = self._gaussian(raw)
        critic = mlp(flat, self.params, "critic.trunk", 2, activate_last=True)
        out.value = value_head(critic, self.params, "value", 1)
        return out

    def _gaussian(self, raw):
        scale = self.config.production_scale
        mu = raw[:, 0] * scale
        sigma = softplus(raw[:, 1]) * scale + _SIGMA_FLOOR
        return mu, sigma

    def message_graph(self, graph):
        return MessageGraph.from_graph(graph, self.config.direction)

    def forward(self, obs):
        """
        Distribution parameters and value for an observation.

        Args:
            obs: object with ``graph``, ``node_features`` (per node position),
                ``edge_features`` (per edge position), ``action_nodes`` and
                ``production_nodes`` (node positions)

        Returns:
            PolicyOutput
        """
        if self.config.architecture == "mlp":
            return self._forward_mlp(obs)
        mg = self.message_graph(obs.graph)
        x0 = Tensor(mg.node_rows(obs.node_features))
        if x0.shape[1] != self.node_dim:
            raise TopologyMismatchError(f"expected {self.node_dim} node features, got {x0.shape[1]}")
        out = PolicyOutput()

        actor = self._encode("actor", x0, obs.edge_features, mg)
        if len(obs.action_nodes):
            rows = actor[self._canonical_index(mg, obs.action_nodes)]
            out.alpha = softplus(mlp(rows, self.params, "actor.head", 3)) + _ALPHA_FLOOR
        if self.production:
            rows = actor[self._canonical_index(mg, obs.production_nodes)]
            out.mu, out.sigma = self._gaussian(mlp(rows, self.params, "actor.prod", 2))

        critic = self._encode("critic", x0, obs.edge_features, mg)
        out.value = value_head(global_sum_pool(critic), self.params, "value", 2)
        return out

    def sample(self, obs, rng, deterministic=False):
        """
        Draw a desired state.

        ``deterministic=True`` returns the Dirichlet mean and the Gaussian mean
        instead of random draws (the log-probability is still evaluated).
        """
        out = self.forward(obs)
        simplex = production = None
        log_prob = 0.0
        if out.alpha is not None:
            a = out.alpha.data
            simplex = a / a.sum(axis=0, keepdims=True) if deterministic else dirichlet_sample(a, rng)
            log_prob += dirichlet_log_prob(out.alpha, simplex).item()
        if out.mu is not None:
            mu, sigma = out.mu.data, out.sigma.data
            production = mu.copy() if deterministic else mu + sigma * rng.standard_normal(mu.shape)
            log_prob += gaussian_log_prob(out.mu, out.sigma, production).item()
        return PolicySample(simplex, production, float(log_prob), out.value.item())

    def evaluate(self, obs, sample):
        """
        Differentiable log-probability, value and entropy of a stored sample.

        Returns:
            tuple: (log_prob Tensor, value Tensor, entropy Tensor)
        """
        out = self.forward(obs)
        log_prob = Tensor(0.0)
        entropy = Tensor(0.0)
        if out.alpha is not None:
            log_prob = log_prob + dirichlet_log_prob(out.alpha, sample.simplex)
            if out.alpha.shape[0] > 1:
                entropy = entropy + dirichlet_entropy(out.alpha)
        if out.mu is not None:
            log_prob = log_prob + gaussian_log_prob(out.mu, out.sigma, sample.production)
            entropy = entropy + gaussian_entropy(out.sigma)
        return log_prob, out.value, entropy

    def value(self, obs):
        """Critic estimate for an observation, without recording gradients."""
        return float(self.forward(obs).value.item())

    def actor_parameters(self):
        return [t for name, t in self.params.items() if name.startswith("actor.")]

    def critic_parameters(self):
        return [t for name, t in self.params.items() if not name.startswith("actor.")]
