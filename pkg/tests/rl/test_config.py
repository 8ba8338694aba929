"""
Tests for the training configuration and the penalty schedule.
"""
import pytest

from NetFlowRL.exceptions import ConfigError, DomainError
from NetFlowRL.rl import PenaltySchedule, TrainConfig, penalty_weight


def test_default_schedule():
    schedule = PenaltySchedule.default(10.0, 200)
    assert schedule.start == pytest.approx(1.0)
    assert schedule.ramp_steps == 20
    assert penalty_weight(schedule, 0) == pytest.approx(1.0)
    assert penalty_weight(schedule, 10) == pytest.approx(5.5)
    assert penalty_weight(schedule, 20) == 10.0
    assert penalty_weight(schedule, 500) == 10.0


def test_constant_schedule():
    schedule = PenaltySchedule(3.0, 3.0, 0)
    assert penalty_weight(schedule, 0) == 3.0
    assert PenaltySchedule.default(10.0, 4).ramp_steps == 0


def test_schedule_errors():
    with pytest.raises(DomainError):
        PenaltySchedule(-1.0, 1.0)
    with pytest.raises(DomainError, match="ramp"):
        PenaltySchedule(0.0, 1.0, -2)
    with pytest.raises(DomainError, match="step"):
        penalty_weight(PenaltySchedule(0.0, 1.0), -1)


def test_config_schedule_overrides():
    cfg = TrainConfig(updates=50, penalty_weight=4.0)
    schedule = cfg.schedule()
    assert schedule.start == pytest.approx(0.4)
    assert (schedule.final, schedule.ramp_steps) == (4.0, 5)
    cfg = TrainConfig(updates=50, penalty_weight=4.0, penalty_start=0.0, ramp_steps=2)
    assert [penalty_weight(cfg.schedule(), s) for s in range(3)] == [0.0, 2.0, 4.0]


def test_config_dict_round_trip():
    cfg = TrainConfig(gamma=0.9, updates=3, backend="highs")
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("field, value", [
    ("gamma", 0.0),
    ("gamma", 1.5),
    ("learning_rate", 0.0),
    ("episodes_per_update", 0),
    ("rollout_length", 0),
    ("penalty_weight", -1.0),
    ("grad_clip", 0.0),
    ("backend", "cplex"),
    ("eval_episodes", 0),
])
def test_config_errors(field, value):
    with pytest.raises(ConfigError, match=f"train.{field}"):
        TrainConfig(**{field: value}).validate()


def test_unknown_field():
    with pytest.raises(ConfigError, match="train.epochs"):
        TrainConfig.from_dict({"epochs": 3})
