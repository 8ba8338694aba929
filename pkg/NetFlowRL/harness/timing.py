"""
Per-decision wall-clock of the bi-level controller against the full-horizon
oracle on widened three-hop networks.
"""

import logging
import time

import numpy as np
import pandas as pd

from ..baselines import mpc_oracle
from ..envs import McfConfig, McfEnv
from ..exceptions import DomainError
from ..nn import PolicyConfig
from ..rl import policy_for_env

logger = logging.getLogger(__name__)

TIMING_COLUMNS = ["width", "n_nodes", "n_edges", "bilevel_seconds", "oracle_seconds", "ratio"]
DEFAULT_WIDTHS = (1, 2, 4, 8, 16)


def _bilevel_decision(env, policy, rng, penalty_weight, backend):
    started = time.perf_counter()
    sample = policy.sample(env.observe(), rng)
    env.control(env.desired_from_sample(sample), penalty_weight, backend=backend)
    return time.perf_counter() - started


def _oracle_decision(env, backend):
    started = time.perf_counter()
    mpc_oracle(env, backend)
    return time.perf_counter() - started


def timing_benchmark(widths=DEFAULT_WIDTHS, decisions=20, seed=0, penalty_weight=10.0,
                     backend="simplex", oracle_backend="highs", path=None):
    """
    Median seconds per decision for each network width.

    A bi-level decision is one policy forward pass plus one control problem;
    an oracle decision is one full-horizon time-expanded program. Both are
    timed at the start of ``decisions`` differently seeded episodes.

    Returns:
        pandas.DataFrame with the timing columns, one row per width (ascending)
    """
    widths = sorted({int(w) for w in widths})
    if not widths or widths[0] < 1:
        raise DomainError("widths must be >= 1")
    if decisions < 1:
        raise DomainError("need at least one decision per width")

    rows = []
    for width in widths:
        env = McfEnv(McfConfig(variant="wide", width=width))
        hops = env.message_hops
        policy = policy_for_env(env, PolicyConfig(layers=hops, direction="reverse"), seed)
        rng = np.random.default_rng(seed)
        bilevel, oracle = [], []
        for i in range(decisions):
            env.reset(seed + i)
            bilevel.append(_bilevel_decision(env, policy, rng, penalty_weight, backend))
            oracle.append(_oracle_decision(env, oracle_backend))
        row = {
            "width": width,
            "n_nodes": env.graph.n_nodes,
            "n_edges": env.graph.n_edges,
            "bilevel_seconds": float(np.median(bilevel)),
            "oracle_seconds": float(np.median(oracle)),
        }
        row["ratio"] = row["oracle_seconds"] / max(row["bilevel_seconds"], 1e-12)
        rows.append(row)
        logger.info("width %d: bi-level %.4fs, oracle %.4fs per decision", width,
                    row["bilevel_seconds"], row["oracle_seconds"])

    frame = pd.DataFrame(rows, columns=TIMING_COLUMNS)
    if path is not None:
        frame.to_csv(path, index=False)
    return frame
