"""
Graph layers and small dense building blocks.

Layers operate in a canonical node order (active nodes sorted by node id) and
a canonical edge order (sorted by destination id, then source id), so
relabelling the nodes of a graph reproduces the same floating-point
computation and the outputs are exactly permuted.
"""

from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError
from .autograd import Tensor, as_tensor, concat, relu, segment_max, segment_sum

AGGREGATORS = ("max", "sum", "mean")
DIRECTIONS = ("forward", "reverse", "both")


def init_linear(rng, fan_in, fan_out, prefix):
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weight and bias as named parameters."""
    bound = 1.0 / np.sqrt(max(fan_in, 1))
    return {
        f"{prefix}.weight": Tensor(rng.uniform(-bound, bound, (fan_in, fan_out)), requires_grad=True,
                                   name=f"{prefix}.weight"),
        f"{prefix}.bias": Tensor(rng.uniform(-bound, bound, (fan_out,)), requires_grad=True,
                                 name=f"{prefix}.bias"),
    }


def linear(x, params, prefix):
    return x @ params[f"{prefix}.weight"] + params[f"{prefix}.bias"]


def mlp(x, params, prefix, n_layers, activate_last=False):
    """Stack of linear layers ``{prefix}.0 ... {prefix}.{n-1}`` with ReLU in between."""
    for i in range(n_layers):
        x = linear(x, params, f"{prefix}.{i}")
        if i < n_layers - 1 or activate_last:
            x = relu(x)
    return x


@dataclass
class MessageGraph:
    """
    Canonical index structure of a graph snapshot for message passing.

    Attributes:
        node_positions: graph positions of the active nodes in canonical order
        src, dst: message endpoints as canonical node indices
        edge_rows: graph edge position of every message (for edge features)
        n: number of active nodes
    """

    node_positions: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    edge_rows: np.ndarray
    n: int

    @classmethod
    def from_graph(cls, graph, direction="forward"):
        if direction not in DIRECTIONS:
            raise DomainError(f"unknown message direction {direction!r}")
        ids = np.asarray(graph.nodes)
        active = graph.active_node_positions()
        positions = active[np.argsort(ids[active], kind="stable")]
        canon = -np.ones(graph.n_nodes, dtype=int)
        canon[positions] = np.arange(positions.size)

        messages = []
        for e in np.flatnonzero(graph.active_edge_mask()):
            s, d = graph.src_index[e], graph.dst_index[e]
            if direction in ("forward", "both"):
                messages.append((ids[d], ids[s], 0, e, canon[s], canon[d]))
            if direction in ("reverse", "both"):
                messages.append((ids[s], ids[d], 1, e, canon[d], canon[s]))
        messages.sort(key=lambda m: (m[0], m[1], m[2], graph.edges[m[3]].src, graph.edges[m[3]].dst, m[3]))
        src = np.array([m[4] for m in messages], dtype=int)
        dst = np.array([m[5] for m in messages], dtype=int)
        rows = np.array([m[3] for m in messages], dtype=int)
        return cls(positions, src, dst, rows, int(positions.size))

    def node_rows(self, features):
        """Canonical-order rows of a per-position feature matrix."""
        return np.asarray(features, dtype=float)[self.node_positions]

    def edge_rows_of(self, features):
        features = np.asarray(features, dtype=float)
        if features.ndim == 1:
            features = features[:, None]
        if features.shape[0] == 0 or self.edge_rows.size == 0:
            return np.zeros((self.edge_rows.size, features.shape[1] if features.ndim == 2 else 0))
        return features[self.edge_rows]


def mpnn_layer(node_feats, edge_feats, graph, params, prefix, aggregator="max"):
    """
    One message-passing layer.

    Every message is ``f(x_dst, x_src, e)`` with ``f`` a two-layer perceptron
    with ReLU activations; messages are aggregated per destination. Nodes
    without incoming messages receive the zero vector.

    Args:
        node_feats: (n, d) Tensor in the MessageGraph's canonical order
        edge_feats: (m, de) array aligned with the MessageGraph's messages
        graph: MessageGraph
        params: parameter mapping holding ``{prefix}.0`` and ``{prefix}.1`` linears
        prefix: parameter name prefix
        aggregator: "max", "sum" or "mean"

    Returns:
        Tensor of shape (n, hidden)
    """
    if aggregator not in AGGREGATORS:
        raise DomainError(f"unknown aggregator {aggregator!r}")
    x = as_tensor(node_feats)
    if x.shape[0] != graph.n:
        raise DomainError(f"expected {graph.n} node rows, got {x.shape[0]}")
    w0 = params[f"{prefix}.0.weight"]
    e = np.asarray(edge_feats, dtype=float)
    if e.ndim != 2:
        e = e.reshape(graph.src.size, -1) if graph.src.size else np.zeros((0, 0))
    if e.shape[0] != graph.src.size:
        raise DomainError(f"expected {graph.src.size} message rows, got {e.shape[0]}")
    if w0.shape[0] != 2 * x.shape[1] + e.shape[1]:
        raise DomainError(
            f"{prefix}: message input has {2 * x.shape[1] + e.shape[1]} features, weights expect {w0.shape[0]}"
        )
    hidden = params[f"{prefix}.1.weight"].shape[1]
    if graph.src.size == 0:
        return Tensor(np.zeros((graph.n, hidden)))

    inputs = concat([x[graph.dst], x[graph.src], Tensor(e)], axis=1)
    messages = mlp(inputs, params, prefix, 2, activate_last=True)
    if aggregator == "max":
        return segment_max(messages, graph.dst, graph.n)
    summed = segment_sum(messages, graph.dst, graph.n)
    if aggregator == "sum":
        return summed
    counts = np.bincount(graph.dst, minlength=graph.n).astype(float)
    return summed * Tensor(1.0 / np.maximum(counts, 1.0)[:, None])


def normalized_adjacency(adjacency):
    """``D^-1/2 (A + I) D^-1/2`` with D the degree matrix of ``A + I``."""
    a = np.asarray(adjacency, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"adjacency must be square, got shape {a.shape}")
    a_hat = a + np.eye(a.shape[0])
    d = 1.0 / np.sqrt(a_hat.sum(axis=1))
    return a_hat * d[:, None] * d[None, :]


def gcn_layer(X, adjacency, W, bias=None, node_ids=None):
    """
    Graph convolution ``relu(D^-1/2 (A + I) D^-1/2 X W [+ b])``.

    When ``node_ids`` is given the product is evaluated with rows sorted by
    id and mapped back, which makes relabelled inputs produce exactly
    permuted outputs.
    """
    X = as_tensor(X)
    W = as_tensor(W)
    a = np.asarray(adjacency, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != X.shape[0]:
        raise DomainError(f"adjacency {a.shape} does not match {X.shape[0]} node rows")
    if X.shape[1] != W.shape[0]:
        raise DomainError(f"features have {X.shape[1]} columns, weights expect {W.shape[0]}")
    if node_ids is None:
        out = Tensor(normalized_adjacency(a)) @ (X @ W)
        return relu(out if bias is None else out + bias)
    order = np.argsort(np.asarray(node_ids), kind="stable")
    inverse = np.argsort(order, kind="stable")
    a_c = a[np.ix_(order, order)]
    out = Tensor(normalized_adjacency(a_c)) @ (X[order] @ W)
    out = relu(out if bias is None else out + bias)
    return out[inverse]


def dense_adjacency(graph, symmetric=True):
    """Adjacency of the active subgraph in a MessageGraph's canonical order."""
    mg = graph if isinstance(graph, MessageGraph) else MessageGraph.from_graph(graph, "forward")
    a = np.zeros((mg.n, mg.n))
    a[mg.src, mg.dst] = 1.0
    if symmetric:
        a = np.maximum(a, a.T)
    np.fill_diagonal(a, 0.0)
    return a


def global_sum_pool(node_feats):
    x = as_tensor(node_feats)
    if x.shape[0] == 0:
        raise DomainError("cannot pool an empty graph")
    return x.sum(axis=0)


def value_head(embedding, params, prefix="value", n_layers=2):
    """Perceptron from a pooled embedding to a scalar value."""
    out = mlp(embedding, params, prefix, n_layers)
    return out.reshape(())
