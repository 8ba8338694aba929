"""
Benchmark environments: minimum-cost flow, supply chain and vehicle routing.
"""

from ..exceptions import ConfigError
from .base import EnvAction, NetworkEnv, Observation, StepResult, extract_features
from .dvr import DvrConfig, DvrEnv, DvrFuture, dvr_match_passengers, grid_stations, hop_matrix, synthetic_rates
from .mcf import McfConfig, McfEnv, McfFuture, Topology, delay_of, mcf_topology, widened_three_hop
from .scim import (
    SCIM_PRESETS,
    ScimConfig,
    ScimEnv,
    ScimFuture,
    average_production,
    expected_demand,
    expected_floor,
    scim_demand,
    seasonal_demand,
)
from .trips import TRIP_COLUMNS, TripDemand, load_trip_records, make_synthetic_trips

ENVIRONMENTS = {
    "mcf": (McfEnv, McfConfig),
    "scim": (ScimEnv, ScimConfig),
    "dvr": (DvrEnv, DvrConfig),
}


def env_config_from_dict(name, data, path="env"):
    """Validated environment config of kind ``name``."""
    if name not in ENVIRONMENTS:
        raise ConfigError(f"{path}.name", f"unknown environment {name!r}; expected one of {sorted(ENVIRONMENTS)}")
    return ENVIRONMENTS[name][1].from_dict(data or {}, path)


def make_env(name, config=None):
    """
    Build an environment by name.

    Args:
        name: one of ``mcf``, ``scim``, ``dvr``
        config: matching config dataclass, a dict, or None for the defaults
    """
    if name not in ENVIRONMENTS:
        raise ConfigError("env.name", f"unknown environment {name!r}; expected one of {sorted(ENVIRONMENTS)}")
    env_cls, config_cls = ENVIRONMENTS[name]
    if isinstance(config, dict):
        config = config_cls.from_dict(config)
    return env_cls(config)


__all__ = [
    "Observation",
    "EnvAction",
    "StepResult",
    "NetworkEnv",
    "extract_features",
    "McfConfig",
    "McfEnv",
    "McfFuture",
    "Topology",
    "mcf_topology",
    "widened_three_hop",
    "delay_of",
    "ScimConfig",
    "ScimEnv",
    "ScimFuture",
    "SCIM_PRESETS",
    "scim_demand",
    "seasonal_demand",
    "expected_floor",
    "expected_demand",
    "average_production",
    "DvrConfig",
    "DvrEnv",
    "DvrFuture",
    "grid_stations",
    "hop_matrix",
    "synthetic_rates",
    "dvr_match_passengers",
    "TRIP_COLUMNS",
    "TripDemand",
    "load_trip_records",
    "make_synthetic_trips",
    "ENVIRONMENTS",
    "make_env",
    "env_config_from_dict",
]
