"""
Experiment configuration: environment, policy, training and evaluation
settings in one JSON document.
"""

import json
import logging
from dataclasses import dataclass, field, fields

from ..envs import ENVIRONMENTS, env_config_from_dict, mcf_topology
from ..exceptions import ConfigError
from ..nn import PolicyConfig
from ..rl import TrainConfig
from ..rl.config import BACKENDS

logger = logging.getLogger(__name__)

POLICIES = ("graph_rl", "random", "s_type", "equally_balanced", "greedy", "oracle")

_MESSAGE_DIRECTION = {"mcf": "reverse", "scim": "both", "dvr": "both"}


def default_policy_fields(env_name, env_config):
    """Message-passing depth and direction matching the environment."""
    if env_name == "mcf":
        layers = mcf_topology(env_config.variant, env_config.width).hops
    elif env_name == "scim":
        layers = 2
    else:
        layers = 1
    return {"layers": layers, "direction": _MESSAGE_DIRECTION[env_name]}


@dataclass
class ExperimentConfig:
    """
    One experiment.

    Attributes:
        env: environment name
        env_config: McfConfig, ScimConfig or DvrConfig
        policy: evaluated policy name
        policy_config: PolicyConfig of the graph policy
        train: TrainConfig
        eval_episodes: evaluation episodes E
        seed: base seed; evaluation episode ``i`` uses ``seed + i``
        out_dir: directory receiving every artifact
        penalty_weight: control-problem weight at evaluation (default: the
            final training weight)
        backend: LP backend of the control problems
        oracle_backend: LP backend of the oracle
        oracle_horizon: planning window of the oracle in steps; None plans
            the whole episode at once
        s_type: order-up-to levels ``{"warehouse": w, "store": s}`` for the
            ``s_type`` policy
        sweep: level grid ``{"warehouse_levels": [...], "store_levels": [...]}``
        timing: ``{"widths": [...], "decisions": n}`` of the timing benchmark
        workers: evaluation worker processes
    """

    env: str = "mcf"
    env_config: object = None
    policy: str = "graph_rl"
    policy_config: PolicyConfig = None
    train: TrainConfig = field(default_factory=TrainConfig)
    eval_episodes: int = 10
    seed: int = 0
    out_dir: str = "runs"
    penalty_weight: float = None
    backend: str = "simplex"
    oracle_backend: str = "highs"
    oracle_horizon: int = None
    s_type: dict = None
    sweep: dict = None
    timing: dict = None
    workers: int = 1

    def __post_init__(self):
        if self.env in ENVIRONMENTS and self.env_config is None:
            self.env_config = ENVIRONMENTS[self.env][1]()
        if self.env in ENVIRONMENTS and self.policy_config is None:
            self.policy_config = PolicyConfig(**default_policy_fields(self.env, self.env_config))

    @property
    def eval_penalty_weight(self):
        return self.train.penalty_weight if self.penalty_weight is None else self.penalty_weight

    @property
    def seeds(self):
        return [self.seed + i for i in range(self.eval_episodes)]

    def validate(self):
        if self.env not in ENVIRONMENTS:
            raise ConfigError("env", f"must be one of {sorted(ENVIRONMENTS)}")
        if self.policy not in POLICIES:
            raise ConfigError("policy", f"must be one of {POLICIES}")
        if self.eval_episodes < 1:
            raise ConfigError("eval_episodes", "must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if self.penalty_weight is not None and self.penalty_weight < 0:
            raise ConfigError("penalty_weight", "must be >= 0")
        if self.oracle_horizon is not None and self.oracle_horizon < 1:
            raise ConfigError("oracle_horizon", "must be >= 1")
        for name in ("backend", "oracle_backend"):
            if getattr(self, name) not in BACKENDS:
                raise ConfigError(name, f"must be one of {BACKENDS}")
        if self.policy == "s_type" and self.env != "scim":
            raise ConfigError("policy", "the s_type policy needs the scim environment")
        if self.policy == "equally_balanced" and self.env != "dvr":
            raise ConfigError("policy", "the equally_balanced policy needs the dvr environment")
        if self.policy == "s_type":
            levels = self.s_type or {}
            if set(levels) != {"warehouse", "store"}:
                raise ConfigError("s_type", "needs exactly the keys 'warehouse' and 'store'")
        if self.sweep is not None and set(self.sweep) - {"warehouse_levels", "store_levels"}:
            raise ConfigError("sweep", "unknown keys; expected warehouse_levels and store_levels")
        if self.timing is not None and set(self.timing) - {"widths", "decisions"}:
            raise ConfigError("timing", "unknown keys; expected widths and decisions")
        self.env_config.validate("env_config")
        self.policy_config.validate("policy_config")
        self.train.validate("train")
        return self

    def to_dict(self):
        return {
            "env": self.env,
            "env_config": self.env_config.to_dict(),
            "policy": self.policy,
            "policy_config": self.policy_config.to_dict(),
            "train": self.train.to_dict(),
            "eval_episodes": self.eval_episodes,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "penalty_weight": self.penalty_weight,
            "backend": self.backend,
            "oracle_backend": self.oracle_backend,
            "oracle_horizon": self.oracle_horizon,
            "s_type": self.s_type,
            "sweep": self.sweep,
            "timing": self.timing,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        data = dict(data)
        env = data.get("env", "mcf")
        env_config = env_config_from_dict(env, data.pop("env_config", None), "env_config")
        policy_data = default_policy_fields(env, env_config)
        policy_data.update(data.pop("policy_config", None) or {})
        policy_config = PolicyConfig.from_dict(policy_data, "policy_config")
        train = TrainConfig.from_dict(data.pop("train", None) or {}, "train")
        return cls(env_config=env_config, policy_config=policy_config, train=train, **data).validate()


def load_config(path):
    """Read and validate an experiment config JSON file."""
    with open(path, "r") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} must hold a JSON object")
    config = ExperimentConfig.from_dict(data)
    logger.debug("loaded %s experiment config from %s", config.env, path)
    return config


def save_config(config, path):
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2)
    return path
