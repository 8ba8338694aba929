"""
Tests for the embedded two-phase simplex, the program builder and LP dumps.
"""
import itertools
import math
from typing import get_type_hints

import numpy as np
import pytest
from scipy.optimize import linprog

from NetFlowRL.exceptions import DomainError, SolverError
from NetFlowRL.lp import (
    LinearProgram,
    LpBuilder,
    LpSolution,
    LpStatus,
    TwoPhaseSimplex,
    solve,
    to_lp_text,
    write_lp,
)


def test_single_lower_bound():
    b = LpBuilder()
    x = b.add_variable("x", cost=1.0)
    b.add_constraint({x: 1.0}, ">=", 3.0)
    sol = solve(b.build())
    assert sol.status is LpStatus.OPTIMAL
    assert sol.x[x] == pytest.approx(3.0)
    assert sol.objective == pytest.approx(3.0)


def test_triangle():
    lp = LinearProgram(c=[-1.0, -1.0], A_ub=[[1.0, 1.0]], b_ub=[1.0])
    sol = solve(lp)
    assert sol.is_optimal
    assert sol.objective == pytest.approx(-1.0)
    assert sol.x.sum() == pytest.approx(1.0)


def test_infeasible():
    sol = solve(LinearProgram(c=[1.0], A_ub=[[1.0]], b_ub=[-1.0]))
    assert sol.status is LpStatus.INFEASIBLE
    assert not sol.is_optimal


def test_unbounded():
    sol = solve(LinearProgram(c=[-1.0, 0.0], A_ub=[[-1.0, 1.0]], b_ub=[2.0]))
    assert sol.status is LpStatus.UNBOUNDED


def test_equality_rows():
    lp = LinearProgram(c=[1.0, 2.0, 3.0], A_eq=[[1.0, 1.0, 1.0]], b_eq=[6.0], hi=[2.0, 2.0, 10.0])
    sol = solve(lp)
    np.testing.assert_allclose(sol.x, [2.0, 2.0, 2.0], atol=1e-9)
    assert sol.objective == pytest.approx(12.0)


def test_free_and_negative_bounds():
    b = LpBuilder()
    x = b.add_variable("x", lo=-5.0, hi=-2.0, cost=1.0)
    y = b.add_variable("y", lo=-math.inf, hi=4.0, cost=-1.0)
    z = b.add_variable("z", lo=-math.inf, cost=0.0)
    b.add_constraint({z: 1.0, x: 1.0}, "==", 0.0)
    sol = solve(b.build())
    assert sol.x[x] == pytest.approx(-5.0)
    assert sol.x[y] == pytest.approx(4.0)
    assert sol.x[z] == pytest.approx(5.0)


def test_bland_rule_terminates_on_cycling_example():
    # degenerate program on which the largest-coefficient rule cycles
    c = [-0.75, 20.0, -0.5, 6.0]
    A = [[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]]
    sol = solve(LinearProgram(c, A_ub=A, b_ub=[0.0, 0.0, 1.0]))
    assert sol.is_optimal
    assert sol.objective == pytest.approx(-1.25)


def test_deterministic_vertex():
    # every point on the face x + y = 1 is optimal; the pivot rule fixes which vertex comes back
    lp = LinearProgram(c=[-1.0, -1.0], A_ub=[[1.0, 1.0]], b_ub=[1.0])
    first = solve(lp).x
    for _ in range(3):
        np.testing.assert_array_equal(solve(lp).x, first)


def test_iteration_limit():
    solver = TwoPhaseSimplex()
    solver.set_max_iterations(0)
    with pytest.raises(SolverError, match="pivots"):
        solver.solve(LinearProgram(c=[-1.0, -1.0], A_ub=[[1.0, 1.0]], b_ub=[1.0]))


def test_iteration_count():
    solver = TwoPhaseSimplex()
    solver.solve(LinearProgram(c=[-1.0, -2.0], A_ub=[[1.0, 1.0], [1.0, 3.0]], b_ub=[4.0, 6.0]))
    assert solver.get_iteration_count() > 0


def test_rejects_non_programs():
    with pytest.raises(DomainError):
        TwoPhaseSimplex().solve({"c": [1.0]})
    with pytest.raises(DomainError, match="backend"):
        solve(LinearProgram(c=[1.0]), backend="glpk")


@pytest.mark.parametrize("seed", range(8))
def test_matches_highs(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(2, 7), rng.integers(2, 8)
    A_ub = rng.uniform(-1.0, 3.0, (m, n))
    b_ub = rng.uniform(1.0, 10.0, m)
    A_eq = rng.uniform(0.0, 1.0, (1, n))
    b_eq = np.array([A_eq.sum() * 0.5])
    c = rng.normal(size=n)
    lp = LinearProgram(c, A_ub, b_ub, A_eq, b_eq, hi=np.full(n, 5.0))
    ours = solve(lp, backend="simplex")
    ref = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=[(0, 5)] * n, method="highs")
    if ref.status == 2:
        assert ours.status is LpStatus.INFEASIBLE
    else:
        assert ours.is_optimal
        assert ours.objective == pytest.approx(ref.fun, abs=1e-6)
        assert lp.violation(ours.x) <= 1e-7


def _vertices(G, h, E=None, f=None):
    """Basic feasible points of ``G z <= h, E z == f`` by brute force over active row sets."""
    n = G.shape[1]
    E = np.zeros((0, n)) if E is None else E
    f = np.zeros(0) if f is None else f
    points = []
    for rows in itertools.combinations(range(G.shape[0]), n - E.shape[0]):
        M = np.vstack([G[list(rows)], E])
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        z = np.linalg.solve(M, np.concatenate([h[list(rows)], f]))
        if np.all(G @ z <= h + 1e-9):
            points.append(z)
    return points


def _enumerated_optimum(c, A, b):
    """Status and optimum of ``min c x, A x <= b, x >= 0`` from vertices and extreme rays."""
    n = len(c)
    G = np.vstack([A, -np.eye(n)])
    vertices = _vertices(G, np.concatenate([b, np.zeros(n)]))
    if not vertices:
        return LpStatus.INFEASIBLE, None
    # the recession cone is pointed, so its rays are the vertices of the cone cut by sum(d) == 1
    rays = _vertices(G, np.zeros(len(G)), np.ones((1, n)), np.ones(1))
    if any(c @ d < -1e-9 for d in rays):
        return LpStatus.UNBOUNDED, None
    return LpStatus.OPTIMAL, min(float(c @ v) for v in vertices)


@pytest.mark.parametrize("seed", range(200))
def test_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    n, m = rng.integers(1, 5), rng.integers(1, 7)
    A = rng.integers(-3, 4, (m, n)).astype(float)
    b = rng.integers(-3, 4, m).astype(float)
    c = rng.integers(-3, 4, n).astype(float)
    status, best = _enumerated_optimum(c, A, b)
    ours = solve(LinearProgram(c, A, b))
    assert ours.status is status
    if status is LpStatus.OPTIMAL:
        assert ours.objective == pytest.approx(best, abs=1e-7)
        assert LinearProgram(c, A, b).violation(ours.x) <= 1e-7


def test_highs_backend():
    sol = solve(LinearProgram(c=[-1.0, -1.0], A_ub=[[1.0, 1.0]], b_ub=[1.0]), backend="highs")
    assert sol.is_optimal
    assert sol.objective == pytest.approx(-1.0)
    assert solve(LinearProgram(c=[1.0], A_ub=[[1.0]], b_ub=[-1.0]), backend="highs").status is LpStatus.INFEASIBLE


class TestProgram:

    def test_shape_checks(self):
        with pytest.raises(DomainError, match="columns"):
            LinearProgram(c=[1.0, 1.0], A_ub=[[1.0]], b_ub=[1.0])
        with pytest.raises(DomainError, match="length"):
            LinearProgram(c=[1.0], A_ub=[[1.0]], b_ub=[1.0, 2.0])
        with pytest.raises(DomainError, match="finite"):
            LinearProgram(c=[np.nan])
        with pytest.raises(DomainError, match="bounds"):
            LinearProgram(c=[1.0], lo=[np.inf])

    def test_scaled_objective(self):
        lp = LinearProgram(c=[1.0, -2.0], hi=[1.0, 1.0])
        assert solve(lp.scaled(3.0)).objective == pytest.approx(3.0 * solve(lp).objective)


class TestAbsPenalty:
    """``weight * |expression + constant|`` through a pair of slack variables."""

    def test_free_variable_hits_target(self):
        b = LpBuilder()
        x = b.add_variable("x", lo=-math.inf)
        b.add_abs_penalty({x: 1.0}, weight=1.0, constant=-5.0)
        sol = solve(b.build())
        assert sol.x[x] == pytest.approx(5.0)
        assert sol.objective == pytest.approx(0.0)

    def test_forced_slack(self):
        b = LpBuilder()
        x = b.add_variable("x", lo=-math.inf, hi=3.0)
        b.add_abs_penalty({x: 1.0}, weight=1.0, constant=-5.0)
        sol = solve(b.build())
        assert sol.x[x] == pytest.approx(3.0)
        assert sol.objective == pytest.approx(2.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_distance_to_box(self, seed):
        rng = np.random.default_rng(seed)
        lo, hi = sorted(rng.uniform(-10.0, 10.0, 2))
        target = rng.uniform(-20.0, 20.0)
        weight = rng.uniform(0.5, 3.0)
        b = LpBuilder()
        x = b.add_variable("x", lo=lo, hi=hi)
        b.add_abs_penalty({x: 1.0}, weight=weight, constant=-target)
        sol = solve(b.build())
        gap = max(lo - target, 0.0, target - hi)
        assert sol.objective == pytest.approx(weight * gap, abs=1e-7)

    def test_nonpositive_weight(self):
        b = LpBuilder()
        x = b.add_variable("x")
        with pytest.raises(DomainError, match="positive"):
            b.add_abs_penalty({x: 1.0}, weight=0.0)


def test_builder_errors():
    b = LpBuilder()
    with pytest.raises(DomainError, match="exceeds"):
        b.add_variable("x", lo=2.0, hi=1.0)
    x = b.add_variable("x")
    with pytest.raises(DomainError, match="unknown variable"):
        b.add_constraint({x + 1: 1.0}, "<=", 1.0)
    with pytest.raises(DomainError, match="sense"):
        b.add_constraint({x: 1.0}, "<", 1.0)


def test_lp_text(tmp_path):
    b = LpBuilder()
    x = b.add_variable("f[0,1]", cost=2.0)
    y = b.add_variable("y", lo=-math.inf)
    b.add_constraint({x: 1.0, y: -1.0}, "<=", 4.0)
    b.add_constraint({x: 1.0}, "==", 1.0)
    lp = b.build()
    text = to_lp_text(lp)
    assert text.startswith("\\ generated by NetFlowRL")
    for section in ("Minimize", "Subject To", "Bounds", "End"):
        assert section in text
    assert "f_0_1__0" in text
    assert "y_1 free" in text
    path = write_lp(lp, tmp_path / "model.lp")
    assert (tmp_path / "model.lp").read_text() == text
    assert path == tmp_path / "model.lp"


def test_solver_signatures():
    hints = get_type_hints(solve)
    assert hints["lp"] is LinearProgram
    assert hints["return"] is LpSolution
    assert get_type_hints(TwoPhaseSimplex.solve)["return"] is LpSolution
