"""
Numpy autodiff, graph layers, policy heads and the actor-critic network.
"""

from .autograd import Tensor, backward
from .checkpoint import PolicyParams, load_checkpoint, save_checkpoint
from .distributions import (
    dirichlet_entropy,
    dirichlet_log_prob,
    dirichlet_sample,
    dirichlet_sample_logprob,
    gaussian_entropy,
    gaussian_log_prob,
    gaussian_sample_logprob,
    round_production,
)
from .layers import MessageGraph, dense_adjacency, gcn_layer, global_sum_pool, mpnn_layer, normalized_adjacency, value_head
from .policy import GraphPolicy, PolicyConfig, PolicyOutput, PolicySample

__all__ = [
    "Tensor",
    "backward",
    "PolicyParams",
    "save_checkpoint",
    "load_checkpoint",
    "dirichlet_log_prob",
    "dirichlet_entropy",
    "dirichlet_sample",
    "dirichlet_sample_logprob",
    "gaussian_log_prob",
    "gaussian_entropy",
    "gaussian_sample_logprob",
    "round_production",
    "MessageGraph",
    "mpnn_layer",
    "gcn_layer",
    "normalized_adjacency",
    "dense_adjacency",
    "global_sum_pool",
    "value_head",
    "GraphPolicy",
    "PolicyConfig",
    "PolicyOutput",
    "PolicySample",
]
