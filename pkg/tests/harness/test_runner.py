"""
Tests for experiment orchestration and the timing benchmark.
"""
import json

import pandas as pd
import pytest

from NetFlowRL.exceptions import ConfigError, DomainError
from NetFlowRL.harness import (
    EPISODE_COLUMNS,
    TIMING_COLUMNS,
    ExperimentConfig,
    build_controller,
    build_env,
    default_level_grid,
    evaluate_policy,
    run_eval,
    run_sweep,
    run_train,
    timing_benchmark,
)


def test_eval_with_references(flow_experiment, tmp_path):
    config = ExperimentConfig.from_dict(flow_experiment)
    summary = run_eval(config)
    assert summary.policy == "greedy"
    assert summary.episodes == 2
    assert summary.oracle_reward >= summary.mean_reward - 1e-6
    assert summary.pct_raw is not None
    episodes = pd.read_csv(tmp_path / "out" / "episodes.csv")
    assert list(episodes.columns) == EPISODE_COLUMNS
    assert sorted(set(episodes["policy"])) == ["greedy", "oracle", "random"]
    assert len(episodes) == 6
    doc = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert set(doc["pct_conventions"]) == {"normalized", "raw"}
    assert doc["mean_reward"] == pytest.approx(summary.mean_reward)


def test_eval_without_references(flow_experiment):
    summary = run_eval(ExperimentConfig.from_dict(flow_experiment), references=False)
    assert summary.random_reward is None
    assert summary.pct_normalized is None


def test_worker_processes_match_serial_evaluation(flow_experiment):
    flow_experiment["policy"] = "random"
    serial = evaluate_policy(ExperimentConfig.from_dict(flow_experiment), "random")
    parallel = evaluate_policy(ExperimentConfig.from_dict(dict(flow_experiment, workers=2)), "random")
    assert [r.seed for r in parallel] == [0, 1]
    assert [r.rewards for r in parallel] == [r.rewards for r in serial]


def test_train_then_evaluate_checkpoint(bandit_experiment, tmp_path):
    config = ExperimentConfig.from_dict(bandit_experiment)
    trainer = run_train(config)
    assert trainer.update == 2
    out = tmp_path / "out"
    for name in ("config.json", "checkpoint.json", "train_log.csv"):
        assert (out / name).exists()
    summary = run_eval(config, checkpoint=str(out / "checkpoint.json"), references=False)
    assert summary.policy == "graph_rl"
    assert summary.episodes == 1


def test_resume_continues_the_count(bandit_experiment, tmp_path):
    config = ExperimentConfig.from_dict(bandit_experiment)
    run_train(config)
    config.train.updates = 3
    trainer = run_train(config, resume=str(tmp_path / "out" / "checkpoint.json"))
    assert trainer.update == 3
    assert list(trainer.log_frame()["step"]) == [0, 1, 2]


def test_graph_policy_needs_a_checkpoint(flow_experiment):
    config = ExperimentConfig.from_dict(dict(flow_experiment, policy="graph_rl"))
    with pytest.raises(ConfigError) as info:
        build_controller(config)
    assert info.value.field == "checkpoint"


def test_sweep(tmp_path):
    config = ExperimentConfig.from_dict({
        "env": "scim", "env_config": {"episode_length": 4}, "eval_episodes": 1,
        "sweep": {"warehouse_levels": [0, 10], "store_levels": [0, 5]}, "out_dir": str(tmp_path / "out"),
    })
    result = run_sweep(config)
    assert len(result.surface) == 4
    assert (tmp_path / "out" / "s_type_surface.csv").exists()


def test_sweep_needs_supply_chain(flow_experiment):
    with pytest.raises(ConfigError, match="scim"):
        run_sweep(ExperimentConfig.from_dict(flow_experiment))


def test_default_level_grid():
    env = build_env(ExperimentConfig.from_dict({"env": "scim"}))
    warehouse, store = default_level_grid(env)
    assert warehouse == [0, 4, 8, 12, 16, 20]
    assert store == [0, 2, 5, 7, 10, 12]


def test_timing_benchmark(tmp_path):
    path = tmp_path / "timing.csv"
    frame = timing_benchmark(widths=[2, 1], decisions=1, path=path)
    assert list(frame.columns) == TIMING_COLUMNS
    assert list(frame["width"]) == [1, 2]
    assert list(frame["n_nodes"]) == [4, 6]
    assert (frame["bilevel_seconds"] > 0).all()
    assert (frame["oracle_seconds"] > 0).all()
    assert pd.read_csv(path).shape == (2, len(TIMING_COLUMNS))


def test_timing_arguments():
    with pytest.raises(DomainError, match="widths"):
        timing_benchmark(widths=[0])
    with pytest.raises(DomainError, match="decision"):
        timing_benchmark(widths=[1], decisions=0)


@pytest.mark.slow
def test_oracle_cost_grows_faster_than_bilevel():
    frame = timing_benchmark(widths=[1, 2, 4, 8], decisions=20)
    assert list(frame["width"]) == [1, 2, 4, 8]
    assert (frame["ratio"].diff().dropna() > 0).all()
