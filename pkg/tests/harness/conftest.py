import json

import pytest


@pytest.fixture
def write_config(tmp_path):
    """Write an experiment document to ``tmp_path`` and return its path."""

    def write(data, name="exp.json"):
        data = dict(data)
        data.setdefault("out_dir", str(tmp_path / "out"))
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path

    return write


@pytest.fixture
def flow_experiment(tmp_path):
    return {
        "env": "mcf",
        "env_config": {"variant": "2hop", "episode_length": 4},
        "policy": "greedy",
        "eval_episodes": 2,
        "out_dir": str(tmp_path / "out"),
    }


@pytest.fixture
def bandit_experiment(tmp_path):
    return {
        "env": "mcf",
        "env_config": {"variant": "bandit", "episode_length": 3, "demand_spread": 0},
        "policy_config": {"hidden": 8},
        "train": {"updates": 2, "learning_rate": 0.01},
        "eval_episodes": 1,
        "out_dir": str(tmp_path / "out"),
    }
