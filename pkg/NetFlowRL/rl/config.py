"""
Training configuration and the penalty-weight schedule.
"""

from dataclasses import asdict, dataclass, fields

from ..exceptions import ConfigError, DomainError

BACKENDS = ("simplex", "highs")


@dataclass
class PenaltySchedule:
    """
    Linear ramp of the control-problem penalty weight.

    Attributes:
        start: weight at update 0
        final: weight once the ramp is over
        ramp_steps: number of updates the ramp takes (0 = constant ``final``)
    """

    start: float
    final: float
    ramp_steps: int = 0

    def __post_init__(self):
        if self.start < 0 or self.final < 0:
            raise DomainError("penalty weights must be >= 0")
        if self.ramp_steps < 0:
            raise DomainError(f"ramp steps must be >= 0, got {self.ramp_steps}")

    @classmethod
    def default(cls, final, total_steps):
        """Start at 10% of ``final`` and reach it after the first 10% of the updates."""
        return cls(0.1 * final, final, max(int(round(0.1 * total_steps)), 0))


def penalty_weight(schedule: "PenaltySchedule", global_step: int) -> float:
    """Penalty weight of update ``global_step``."""
    if global_step < 0:
        raise DomainError(f"step must be >= 0, got {global_step}")
    if schedule.ramp_steps == 0 or global_step >= schedule.ramp_steps:
        return float(schedule.final)
    frac = global_step / schedule.ramp_steps
    return float(schedule.start + frac * (schedule.final - schedule.start))


@dataclass
class TrainConfig:
    """
    A2C hyper-parameters.

    ``penalty_start`` and ``ramp_steps`` left as ``None`` take the default
    schedule (10% of ``penalty_weight``, ramped over the first 10% of the
    updates). ``rollout_length`` of ``None`` runs whole episodes.
    """

    gamma: float = 0.97
    learning_rate: float = 1e-3
    value_weight: float = 0.5
    entropy_weight: float = 0.0
    updates: int = 200
    episodes_per_update: int = 1
    rollout_length: int = None
    penalty_weight: float = 10.0
    penalty_start: float = None
    ramp_steps: int = None
    grad_clip: float = 10.0
    normalize_advantages: bool = True
    backend: str = "simplex"
    checkpoint_every: int = 0
    eval_every: int = 0
    eval_episodes: int = 2
    seed: int = 0

    def validate(self, path="train"):
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"{path}.gamma", "must lie in (0, 1]")
        if self.learning_rate <= 0:
            raise ConfigError(f"{path}.learning_rate", "must be > 0")
        if self.value_weight < 0:
            raise ConfigError(f"{path}.value_weight", "must be >= 0")
        if self.entropy_weight < 0:
            raise ConfigError(f"{path}.entropy_weight", "must be >= 0")
        if self.updates < 0:
            raise ConfigError(f"{path}.updates", "must be >= 0")
        if self.episodes_per_update < 1:
            raise ConfigError(f"{path}.episodes_per_update", "must be >= 1")
        if self.rollout_length is not None and self.rollout_length < 1:
            raise ConfigError(f"{path}.rollout_length", "must be >= 1")
        if self.penalty_weight < 0:
            raise ConfigError(f"{path}.penalty_weight", "must be >= 0")
        if self.penalty_start is not None and self.penalty_start < 0:
            raise ConfigError(f"{path}.penalty_start", "must be >= 0")
        if self.ramp_steps is not None and self.ramp_steps < 0:
            raise ConfigError(f"{path}.ramp_steps", "must be >= 0")
        if self.grad_clip is not None and self.grad_clip <= 0:
            raise ConfigError(f"{path}.grad_clip", "must be > 0")
        if self.backend not in BACKENDS:
            raise ConfigError(f"{path}.backend", f"must be one of {BACKENDS}")
        if self.checkpoint_every < 0 or self.eval_every < 0:
            raise ConfigError(f"{path}.checkpoint_every", "intervals must be >= 0")
        if self.eval_episodes < 1:
            raise ConfigError(f"{path}.eval_episodes", "must be >= 1")
        return self

    def schedule(self):
        default = PenaltySchedule.default(self.penalty_weight, self.updates)
        start = default.start if self.penalty_start is None else self.penalty_start
        ramp = default.ramp_steps if self.ramp_steps is None else self.ramp_steps
        return PenaltySchedule(start, self.penalty_weight, ramp)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data, path="train"):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown field")
        return cls(**data).validate(path)
