"""
NetFlowRL: Bi-level Graph Reinforcement Learning for Network Control

This package couples a graph-neural-network policy with linear control
problems to operate flows on dynamic networks. The policy proposes a desired
next state of the network; a small linear program turns it into the cheapest
feasible flows. It provides:

- A graph-flow simulation core with delayed arrivals and exact feasibility checks
- An embedded two-phase simplex solver (with a HiGHS backend for large programs)
- Linear control problems for minimum-cost flow, supply-chain inventory and
  vehicle rebalancing
- A numpy autodiff with message-passing and graph-convolution layers,
  Dirichlet and Gaussian policy heads
- Advantage actor-critic training, comparison policies and a
  perfect-information oracle

Experiments are driven through the ``netflowrl`` command line.
"""
from NetFlowRL.envs import DvrEnv, McfEnv, ScimEnv, make_env
from NetFlowRL.graph import CommodityState, Edge, FlowAction, Graph, step_state
from NetFlowRL.harness import ExperimentConfig, pct_of_oracle, run_eval, run_train
from NetFlowRL.lcp import DesiredState, round_to_integer, solve_lcp
from NetFlowRL.lp import LinearProgram, TwoPhaseSimplex, solve
from NetFlowRL.nn import GraphPolicy, PolicyConfig
from NetFlowRL.rl import TrainConfig, Trainer, a2c_update, rollout

__version__ = "0.1.0"
__all__ = [
    "Graph",
    "Edge",
    "CommodityState",
    "FlowAction",
    "step_state",
    "LinearProgram",
    "TwoPhaseSimplex",
    "solve",
    "DesiredState",
    "solve_lcp",
    "round_to_integer",
    "McfEnv",
    "ScimEnv",
    "DvrEnv",
    "make_env",
    "GraphPolicy",
    "PolicyConfig",
    "TrainConfig",
    "Trainer",
    "rollout",
    "a2c_update",
    "ExperimentConfig",
    "run_train",
    "run_eval",
    "pct_of_oracle",
]
