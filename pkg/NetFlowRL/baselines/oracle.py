"""
Perfect-information planner.

With the realised randomness of the rest of the episode revealed, the whole
remaining episode is a single linear program over a time-expanded copy of the
network: one set of flow (and production or passenger) variables per step,
stock variables linking consecutive steps through delayed arrivals, and the
sum of the step rewards as objective. The plan is solved once and executed
step by step, or, with a finite horizon, re-solved over the next few steps
before every action.
"""

import logging
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from ..envs.base import EnvAction, NetworkEnv
from ..exceptions import DomainError, SolverError
from ..graph import FlowAction
from ..lp import LpBuilder, solve
from .base import Controller

logger = logging.getLogger(__name__)


@dataclass
class OraclePlan:
    """
    Attributes:
        actions: one EnvAction per remaining step
        objective: planned total reward
        start_step: environment step the plan starts at
        n_vars: size of the time-expanded program
    """

    actions: list = field(default_factory=list)
    objective: float = 0.0
    start_step: int = 0
    n_vars: int = 0


def _existing_arrivals(state, horizon, t0):
    """(horizon, n, k) in-transit mass credited at the end of each planned step."""
    out = np.zeros((horizon,) + state.quantities.shape)
    for s in state.in_transit:
        h = max(s.arrival_step - t0 - 1, 0)
        if h < horizon:
            out[h, s.node, s.commodity] += s.amount
    return out


def _add(expr, j, a):
    expr[j] = expr.get(j, 0.0) + a


def _mcf_program(env, future):
    t0 = env.t
    H = len(future.graphs)
    n, K = env.state.quantities.shape
    sinks = set(env.all_sink_pos)
    arrivals = _existing_arrivals(env.state, H, t0)
    lam = env.config.lam
    b = LpBuilder()

    flow = []
    for h, g in enumerate(future.graphs):
        idx = -np.ones((g.n_edges, K), dtype=int)
        for e in np.flatnonzero(g.active_edge_mask()):
            dst = g.dst_index[e]
            for k in range(K):
                own = dst in env.sink_pos[k]
                idx[e, k] = b.add_variable(f"f[{h},{g.edges[e].src},{g.edges[e].dst},{k}]",
                                           cost=g.costs[e] - (lam if own else 0.0))
        flow.append(idx)

    # stock[h] maps (pos, k) -> (variable or None, constant)
    stock = {(pos, k): (None, env.state.quantities[pos, k]) for pos in range(n) for k in range(K)}
    stocks = [stock]
    for h in range(1, H):
        stocks.append({
            (pos, k): (b.add_variable(f"x[{h},{env.graph.nodes[pos]},{k}]"), 0.0)
            for pos in range(n) for k in range(K) if pos not in sinks
        })

    for h, g in enumerate(future.graphs):
        idx = flow[h]
        for pos in range(n):
            if pos in sinks:
                continue
            out_edges = np.flatnonzero((idx[:, 0] >= 0) & (g.src_index == pos))
            for k in range(K):
                var, const = stocks[h][(pos, k)]
                if out_edges.size:
                    row = {int(idx[e, k]): 1.0 for e in out_edges}
                    if var is not None:
                        _add(row, var, -1.0)
                    b.add_constraint(row, "<=", const)
                if h + 1 >= H:
                    continue
                # x[h+1] = x[h] - out[h] + arrivals + injection
                nxt, _ = stocks[h + 1][(pos, k)]
                row = {nxt: 1.0}
                if var is not None:
                    _add(row, var, -1.0)
                for e in out_edges:
                    _add(row, int(idx[e, k]), 1.0)
                for hp in range(h + 1):
                    gp = future.graphs[hp]
                    delays = gp.travel_times
                    for e in np.flatnonzero((flow[hp][:, k] >= 0) & (gp.dst_index == pos)):
                        if hp + delays[e] == h + 1:
                            _add(row, int(flow[hp][e, k]), -1.0)
                rhs = const + arrivals[h, pos, k]
                if pos == env.source_pos:
                    rhs += future.injection[h + 1, k]
                b.add_constraint(row, "==", rhs)

    if env.config.variant == "capacity":
        remaining = future.remaining_capacity
        for e in np.flatnonzero(np.isfinite(remaining)):
            row = {int(flow[h][e, k]): 1.0 for h in range(H) for k in range(K) if flow[h][e, k] >= 0}
            if row:
                b.add_constraint(row, "<=", max(remaining[e], 0.0))

    def decode(x):
        actions = []
        for h, g in enumerate(future.graphs):
            f = np.zeros((g.n_edges, K))
            present = flow[h] >= 0
            f[present] = np.maximum(x[flow[h][present]], 0.0)
            actions.append(EnvAction(FlowAction(f)))
        return actions

    return b, 0.0, decode


def _scim_program(env, future):
    cfg = env.config
    t0 = env.t
    H = future.demand.shape[0]
    g = env.graph
    n = g.n_nodes
    w_pos, s_pos = list(env.w_pos), list(env.s_pos)
    demand = future.demand
    arrivals = _existing_arrivals(env.state, H, t0)[:, :, 0]
    b = LpBuilder()

    flow = np.array([[b.add_variable(f"f[{h},{e.src},{e.dst}]", cost=e.cost) for e in g.edges]
                     for h in range(H)], dtype=int).reshape(H, g.n_edges)
    prod = np.array([[b.add_variable(f"w[{h},{g.nodes[p]}]", cost=cfg.production_cost) for p in w_pos]
                     for h in range(H)], dtype=int).reshape(H, len(w_pos))

    # start-of-step stock q[h] for h >= 1 (h = H is the end of the episode)
    q = {}
    for h in range(1, H + 1):
        for pos in range(n):
            lo = 0.0 if pos in w_pos else -np.inf
            q[h, pos] = b.add_variable(f"q[{h},{g.nodes[pos]}]", lo=lo, hi=env.capacity[pos])

    q0 = env.state.quantities[:, 0]
    constant = 0.0
    for h in range(H):
        for pos in range(n):
            if h == 0:
                stock_plus = max(q0[pos], 0.0)
                constant += env.storage_cost[pos] * stock_plus
                if pos in s_pos:
                    constant -= cfg.price * min(demand[0, pos], stock_plus)
                    constant += cfg.backorder_cost * max(-q0[pos], 0.0)
                continue
            if pos in w_pos:
                b.add_cost(q[h, pos], env.storage_cost[pos])
                continue
            # q = q+ - q-, sales <= min(d, q+)
            plus = b.add_variable(f"q+[{h},{g.nodes[pos]}]", cost=env.storage_cost[pos])
            minus = b.add_variable(f"q-[{h},{g.nodes[pos]}]", cost=cfg.backorder_cost)
            sales = b.add_variable(f"s[{h},{g.nodes[pos]}]", hi=demand[h, pos], cost=-cfg.price)
            b.add_constraint({q[h, pos]: 1.0, plus: -1.0, minus: 1.0}, "==", 0.0)
            b.add_constraint({sales: 1.0, plus: -1.0}, "<=", 0.0)

    times = g.travel_times
    for h in range(H):
        for i, pos in enumerate(w_pos):
            out = {int(flow[h, e]): 1.0 for e in np.flatnonzero(g.src_index == pos)}
            if out:
                if h == 0:
                    b.add_constraint(out, "<=", max(q0[pos], 0.0))
                else:
                    b.add_constraint({**out, q[h, pos]: -1.0}, "<=", 0.0)
        for pos in range(n):
            # q[h+1] = q[h] - out[h] + arrivals - d[h]
            row = {q[h + 1, pos]: 1.0}
            rhs = arrivals[h, pos] - demand[h, pos]
            if h == 0:
                rhs += q0[pos]
            else:
                _add(row, q[h, pos], -1.0)
            for e in np.flatnonzero(g.src_index == pos):
                _add(row, int(flow[h, e]), 1.0)
            for e in np.flatnonzero(g.dst_index == pos):
                hp = h + 1 - int(times[e])
                if 0 <= hp < H:
                    _add(row, int(flow[hp, e]), -1.0)
            if pos in w_pos:
                hp = h + 1 - cfg.production_time
                if 0 <= hp < H:
                    _add(row, int(prod[hp, w_pos.index(pos)]), -1.0)
            b.add_constraint(row, "==", rhs)

    def decode(x):
        return [
            EnvAction(FlowAction(np.maximum(x[flow[h]], 0.0)[:, None]), np.maximum(x[prod[h]], 0.0))
            for h in range(H)
        ]

    return b, constant, decode


def _dvr_program(env, future):
    t0 = env.t
    H = future.requests.shape[0]
    g = env.graph
    n = g.n_nodes
    arrivals = _existing_arrivals(env.state, H, t0)[:, :, 0]
    margin = future.price - future.trip_cost
    trip_steps = future.trip_steps
    b = LpBuilder()

    rebalance = np.array([[b.add_variable(f"r[{h},{e.src},{e.dst}]", cost=e.cost) for e in g.edges]
                          for h in range(H)], dtype=int).reshape(H, g.n_edges)
    passengers = []
    for h in range(H):
        served = {}
        for o, d in zip(*np.nonzero(future.requests[h] > 0)):
            served[o, d] = b.add_variable(f"p[{h},{g.nodes[o]},{g.nodes[d]}]",
                                          hi=future.requests[h, o, d], cost=-margin[o, d])
        passengers.append(served)
    idle = {(h, pos): b.add_variable(f"q[{h},{g.nodes[pos]}]") for h in range(1, H) for pos in range(n)}
    avail = {(h, pos): b.add_variable(f"a[{h},{g.nodes[pos]}]") for h in range(H) for pos in range(n)}

    q0 = env.state.quantities[:, 0]
    times = g.travel_times
    for h in range(H):
        for pos in range(n):
            out_edges = np.flatnonzero(g.src_index == pos)
            out = {int(rebalance[h, e]): 1.0 for e in out_edges}
            if out:
                if h == 0:
                    b.add_constraint(out, "<=", max(q0[pos], 0.0))
                else:
                    b.add_constraint({**out, idle[h, pos]: -1.0}, "<=", 0.0)
            # a[h] = q[h] - out[h] + arrivals before the matching after step h
            row = {avail[h, pos]: 1.0}
            rhs = arrivals[h, pos]
            if h == 0:
                rhs += q0[pos]
            else:
                _add(row, idle[h, pos], -1.0)
            for j in out:
                _add(row, j, 1.0)
            for e in np.flatnonzero(g.dst_index == pos):
                hp = h + 1 - int(times[e])
                if 0 <= hp < H:
                    _add(row, int(rebalance[hp, e]), -1.0)
            for hp in range(h):
                for (o, d), j in passengers[hp].items():
                    if d == pos and hp + int(trip_steps[o, d]) == h:
                        _add(row, j, -1.0)
            b.add_constraint(row, "==", rhs)

            departing = {j: 1.0 for (o, d), j in passengers[h].items() if o == pos}
            if h + 1 < H:
                # q[h+1] = a[h] - passengers leaving after step h
                nxt = {idle[h + 1, pos]: 1.0, avail[h, pos]: -1.0}
                nxt.update(departing)
                b.add_constraint(nxt, "==", 0.0)
            elif departing:
                b.add_constraint({**departing, avail[h, pos]: -1.0}, "<=", 0.0)

    constant = -env.pending_reward

    def decode(x):
        actions = []
        for h in range(H):
            served = np.zeros((n, n))
            for (o, d), j in passengers[h].items():
                served[o, d] = max(x[j], 0.0)
            r = np.maximum(x[rebalance[h]], 0.0)[:, None]
            actions.append(EnvAction(FlowAction(r), passenger_flows=served))
        return actions

    return b, constant, decode


_PROGRAMS = {"mcf": _mcf_program, "scim": _scim_program, "dvr": _dvr_program}


def mpc_oracle(
    env: NetworkEnv,
    backend: Literal["simplex", "highs"] = "highs",
    horizon: Optional[int] = None,
) -> OraclePlan:
    """
    Plan the rest of the episode with the realised future revealed.

    Args:
        env: environment after ``reset`` (and possibly some steps)
        backend: LP backend ("highs" or "simplex")
        horizon: number of steps to plan; None plans to the end of the episode

    Returns:
        OraclePlan

    Raises:
        SolverError: the time-expanded program has no optimal solution
    """
    future = env.reveal_future()
    if horizon is not None:
        if horizon < 1:
            raise DomainError(f"oracle horizon must be >= 1, got {horizon}")
        future = future.head(int(horizon))
    builder, constant, decode = _PROGRAMS[env.kind](env, future)
    program = builder.build()
    logger.debug("%s oracle program: %d variables, %d rows", env.kind, program.n_vars, program.n_rows)
    solution = solve(program, backend=backend)
    if not solution.is_optimal:
        raise SolverError(f"{env.kind} oracle program is {solution.status.value}")
    objective = -(solution.objective + constant)
    return OraclePlan(decode(solution.x), objective, env.t, program.n_vars)


def fit_to_stock(action, env):
    """Scale planned departures down where they exceed the stock by round-off."""
    graph = env.graph
    flows = action.flows.flows.copy()
    outflow = action.flows.outflow(graph)
    stock = np.maximum(env.state.quantities, 0.0)
    mask = np.ones(graph.n_nodes, dtype=bool)
    if hasattr(env, "nonnegative_mask"):
        mask = env.nonnegative_mask()
    for pos, k in zip(*np.nonzero((outflow > stock) & mask[:, None])):
        scale = stock[pos, k] / outflow[pos, k]
        flows[graph.src_index == pos, k] *= scale
    return EnvAction(FlowAction(flows), action.production, action.passenger_flows)


class OracleController(Controller):
    """
    Perfect-information controller.

    Without a horizon one plan covers the whole episode; with a horizon the
    program is re-solved over the next ``horizon`` steps before every action.
    """

    name = "oracle"

    def __init__(self, backend="highs", horizon=None):
        self.backend = backend
        self.horizon = horizon
        self.plan = None

    def reset(self, env):
        self.plan = mpc_oracle(env, self.backend) if self.horizon is None else None

    def act(self, env, rng):
        if self.horizon is not None:
            self.plan = mpc_oracle(env, self.backend, self.horizon)
        h = env.t - self.plan.start_step
        return fit_to_stock(self.plan.actions[h], env), {"fallback": False}
