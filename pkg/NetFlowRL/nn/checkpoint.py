"""
Named parameter collections and their JSON checkpoints.
"""

import json
import logging
import os

import numpy as np

from ..exceptions import CheckpointError
from .autograd import Tensor

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


class PolicyParams:
    """
    Ordered mapping from parameter name to trainable Tensor.
    """

    def __init__(self, tensors=None):
        self._tensors = dict(tensors or {})

    def __getitem__(self, name):
        return self._tensors[name]

    def __contains__(self, name):
        return name in self._tensors

    def __iter__(self):
        return iter(self._tensors.values())

    def __len__(self):
        return len(self._tensors)

    def update(self, tensors):
        self._tensors.update(tensors)

    def names(self):
        return list(self._tensors)

    def items(self):
        return self._tensors.items()

    def zero_grad(self):
        for t in self._tensors.values():
            t.zero_grad()

    def grad_norm(self):
        return float(np.sqrt(sum(float(np.sum(t.grad ** 2)) for t in self._tensors.values())))

    def state(self):
        """Copy of every parameter value."""
        return {name: t.data.copy() for name, t in self._tensors.items()}

    def load_state(self, state):
        """Overwrite values from a name -> array mapping; shapes must match exactly."""
        missing = [n for n in self._tensors if n not in state]
        extra = [n for n in state if n not in self._tensors]
        if missing or extra:
            raise CheckpointError(f"parameter names differ (missing {missing}, unexpected {extra})")
        for name, t in self._tensors.items():
            value = np.asarray(state[name], dtype=float)
            if value.shape != t.data.shape:
                raise CheckpointError(f"{name}: checkpoint shape {value.shape} != policy shape {t.data.shape}")
        for name, t in self._tensors.items():
            t.data = np.array(state[name], dtype=float)
            t.zero_grad()

    def to_dict(self):
        return {
            "version": CHECKPOINT_VERSION,
            "tensors": [
                {"name": name, "shape": list(t.data.shape), "values": t.data.ravel().tolist()}
                for name, t in self._tensors.items()
            ],
        }

    @classmethod
    def from_dict(cls, data):
        return cls({
            name: Tensor(value, requires_grad=True, name=name)
            for name, value in state_from_dict(data).items()
        })


def state_from_dict(data):
    if data.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {data.get('version')!r}")
    state = {}
    for record in data.get("tensors", []):
        try:
            values = np.asarray(record["values"], dtype=float)
            state[record["name"]] = values.reshape(record["shape"])
        except (KeyError, ValueError) as exc:
            raise CheckpointError(f"malformed tensor record: {exc}") from exc
    return state


def save_checkpoint(params, path, metadata=None):
    """Write parameters (and optional JSON-able metadata) to ``path``."""
    doc = params.to_dict()
    doc["metadata"] = metadata or {}
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh)
    os.replace(tmp, path)
    logger.debug("saved %d tensors to %s", len(params), path)
    return path


def load_checkpoint(path):
    """
    Read a checkpoint.

    Returns:
        tuple: (name -> array mapping, metadata dict)
    """
    try:
        with open(path, "r") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path} is not a checkpoint: {exc}") from exc
    return state_from_dict(doc), doc.get("metadata", {})
