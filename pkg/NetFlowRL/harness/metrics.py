"""
Evaluation metrics: percentage of oracle performance and episode summaries.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Optional

import numpy as np
import pandas as pd

_DEGENERATE = 1e-12

EPISODE_COLUMNS = [
    "episode", "seed", "policy", "total_reward", "steps", "fallbacks", "served", "requests", "success",
    "seconds_per_decision",
]


def pct_of_oracle(reward: float, random_reward: float, oracle_reward: float) -> Dict[str, Optional[float]]:
    """
    Percentage of oracle performance in both conventions.

    ``normalized`` places the random policy at 0% and the oracle at 100%;
    ``raw`` is the plain ratio to the oracle reward. A convention whose
    denominator vanishes is reported as None.

    Returns:
        dict with keys ``normalized`` and ``raw``
    """
    span = oracle_reward - random_reward
    normalized = None if abs(span) < _DEGENERATE else 100.0 * (reward - random_reward) / span
    raw = None if abs(oracle_reward) < _DEGENERATE else 100.0 * reward / oracle_reward
    return {"normalized": normalized, "raw": raw}


@dataclass
class EvalSummary:
    """
    Aggregate of E evaluation episodes.

    ``pct_normalized`` and ``pct_raw`` are None when no reference rewards
    were computed or the convention is undefined.
    """

    env: str
    policy: str
    episodes: int
    mean_reward: float
    std_reward: float
    mean_served: float
    served_rate: float
    success_rate: float
    fallbacks: int
    seconds_per_decision: float
    random_reward: float = None
    oracle_reward: float = None
    pct_normalized: float = None
    pct_raw: float = None

    def to_dict(self):
        return asdict(self)


def summarize(env, policy, records, random_records=None, oracle_records=None):
    """
    Build an EvalSummary from EpisodeRecords (references on the same seeds).
    """
    rewards = np.array([r.total_reward for r in records], dtype=float)
    served = np.array([r.served for r in records], dtype=float)
    requests = float(sum(r.requests for r in records))
    decisions = [s for r in records for s in r.decision_seconds]
    summary = EvalSummary(
        env=env,
        policy=policy,
        episodes=len(records),
        mean_reward=float(rewards.mean()),
        std_reward=float(rewards.std()),
        mean_served=float(served.mean()),
        served_rate=float(served.sum() / requests) if requests > 0 else 0.0,
        success_rate=float(np.mean([r.success for r in records])),
        fallbacks=int(sum(r.fallbacks for r in records)),
        seconds_per_decision=float(np.mean(decisions)) if decisions else 0.0,
    )
    if random_records and oracle_records:
        summary.random_reward = float(np.mean([r.total_reward for r in random_records]))
        summary.oracle_reward = float(np.mean([r.total_reward for r in oracle_records]))
        pct = pct_of_oracle(summary.mean_reward, summary.random_reward, summary.oracle_reward)
        summary.pct_normalized, summary.pct_raw = pct["normalized"], pct["raw"]
    return summary


def episode_frame(policy, records):
    """Per-episode rows of one policy, ordered by episode index."""
    rows = [{
        "episode": i,
        "seed": r.seed,
        "policy": policy,
        "total_reward": r.total_reward,
        "steps": r.steps,
        "fallbacks": r.fallbacks,
        "served": r.served,
        "requests": r.requests,
        "success": r.success,
        "seconds_per_decision": r.mean_decision_seconds,
    } for i, r in enumerate(records)]
    return pd.DataFrame(rows, columns=EPISODE_COLUMNS)
