"""
Dense two-phase primal simplex.

This module provides the solver used for every linear program the package
emits:

- BaseSolver: the common interface (verbosity, iteration limit, solve)
- TwoPhaseSimplex: tableau simplex with Bland's anti-cycling rule
- solve: convenience entry point, optionally delegating to scipy's HiGHS

Programs are first rewritten over non-negative variables (shifting finite
lower bounds, mirroring variables with only an upper bound, splitting free
variables and turning finite ranges into rows). Phase one minimises the sum of
artificial variables; phase two optimises the real objective from the
feasible basis found. Entering variables are the lowest-index columns with a
negative reduced cost; leaving rows break ratio ties by the lowest basic
variable index, so results are fully deterministic.
"""

import logging
from typing import Literal, Optional

import numpy as np
from scipy.optimize import linprog

from ..exceptions import DomainError, SolverError
from .base import LinearProgram, LpSolution, LpStatus

logger = logging.getLogger(__name__)


class BaseSolver:
    """
    Base class for LP solvers
    """

    def set_verbose(self, flag):
        """Set verbose output flag"""
        pass

    def set_max_iterations(self, max_iterations):
        """Set maximum iterations"""
        pass

    def get_iteration_count(self):
        """Get the number of pivots of the last solve"""
        pass

    def solve(self, lp: LinearProgram) -> LpSolution:
        """Solve a LinearProgram and return an LpSolution"""
        raise NotImplementedError


class TwoPhaseSimplex(BaseSolver):
    """
    Tableau simplex with Bland's rule.

    Args:
        feasibility_tol: absolute tolerance on constraint satisfaction
        pivot_tol: column entries at or below this magnitude are never pivots
        optimality_tol: reduced costs above ``-optimality_tol`` count as non-negative
        max_iterations: pivot budget shared by both phases
    """

    def __init__(self, feasibility_tol=1e-7, pivot_tol=1e-11, optimality_tol=1e-9, max_iterations=50_000):
        self.feasibility_tol = feasibility_tol
        self.pivot_tol = pivot_tol
        self.optimality_tol = optimality_tol
        self.max_iterations = max_iterations
        self.iteration_count = 0
        self.verbose = False

    def set_verbose(self, flag):
        """Set verbose output flag"""
        self.verbose = flag

    def set_max_iterations(self, max_iterations):
        """Set maximum iterations"""
        self.max_iterations = max_iterations

    def get_iteration_count(self):
        """Get the number of pivots of the last solve"""
        return self.iteration_count

    @staticmethod
    def _standard_form(lp):
        """Map z = offset + M @ y with y >= 0 and rewrite the program over y."""
        n = lp.n_vars
        offset = np.zeros(n)
        columns = []
        range_rows = []
        for j in range(n):
            lo, hi = lp.lo[j], lp.hi[j]
            if np.isfinite(lo):
                offset[j] = lo
                columns.append((j, 1.0))
                if np.isfinite(hi):
                    range_rows.append((len(columns) - 1, hi - lo))
            elif np.isfinite(hi):
                offset[j] = hi
                columns.append((j, -1.0))
            else:
                columns.append((j, 1.0))
                columns.append((j, -1.0))

        M = np.zeros((n, len(columns)))
        for col, (j, sign) in enumerate(columns):
            M[j, col] = sign

        A_ub = lp.A_ub @ M
        b_ub = lp.b_ub - lp.A_ub @ offset
        if range_rows:
            extra = np.zeros((len(range_rows), len(columns)))
            for r, (col, width) in enumerate(range_rows):
                extra[r, col] = 1.0
            A_ub = np.vstack([A_ub, extra])
            b_ub = np.concatenate([b_ub, [w for _, w in range_rows]])
        A_eq = lp.A_eq @ M
        b_eq = lp.b_eq - lp.A_eq @ offset
        return M, offset, A_ub, b_ub, A_eq, b_eq, lp.c @ M

    def _pivot(self, T, row, col):
        T[row] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row])
        T[:, col] = 0.0
        T[row, col] = 1.0
        rhs = T[:-1, -1]
        rhs[np.abs(rhs) < 1e-13] = 0.0

    def _enter(self, T, n_cols):
        negative = np.flatnonzero(T[-1, :n_cols] < -self.optimality_tol)
        return int(negative[0]) if negative.size else -1

    def _leave(self, T, col, basis):
        column = T[:-1, col]
        rows = np.flatnonzero(column > self.pivot_tol)
        if rows.size == 0:
            return -1
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        return int(min(ties, key=lambda r: basis[r]))

    def _run(self, T, basis, n_cols, phase):
        while True:
            col = self._enter(T, n_cols)
            if col < 0:
                return LpStatus.OPTIMAL
            row = self._leave(T, col, basis)
            if row < 0:
                return LpStatus.UNBOUNDED
            if self.verbose:
                logger.debug("phase %d pivot %d: enter %d leave %d (basis %d)",
                             phase, self.iteration_count, col, row, basis[row])
            self._pivot(T, row, col)
            basis[row] = col
            self.iteration_count += 1
            if self.iteration_count > self.max_iterations:
                raise SolverError(f"simplex exceeded {self.max_iterations} pivots")
            if not np.isfinite(T[-1, -1]):
                raise SolverError("non-finite value in the simplex tableau")

    def solve(self, lp: LinearProgram) -> LpSolution:
        """
        Solve a linear program.

        Args:
            lp: LinearProgram

        Returns:
            LpSolution: status, primal point, objective value, pivot count

        Raises:
            SolverError: iteration limit or numerical breakdown
        """
        if not isinstance(lp, LinearProgram):
            raise DomainError("solve expects a LinearProgram")
        self.iteration_count = 0
        M, offset, A_ub, b_ub, A_eq, b_eq, c = self._standard_form(lp)
        n = c.shape[0]

        rows = [(A_ub[i].copy(), b_ub[i], "<=") for i in range(A_ub.shape[0])]
        rows += [(A_eq[i].copy(), b_eq[i], "=") for i in range(A_eq.shape[0])]
        for k, (a, b, sense) in enumerate(rows):
            if b < 0:
                rows[k] = (-a, -b, {"<=": ">=", "=": "="}[sense])

        m = len(rows)
        n_slack = sum(1 for _, _, s in rows if s != "=")
        n_art = sum(1 for _, _, s in rows if s != "<=")
        art_start = n + n_slack
        width = art_start + n_art
        T = np.zeros((m + 1, width + 1))
        basis = []
        slack = n
        art = art_start
        for i, (a, b, sense) in enumerate(rows):
            T[i, :n] = a
            T[i, -1] = b
            if sense == "<=":
                T[i, slack] = 1.0
                basis.append(slack)
                slack += 1
            else:
                if sense == ">=":
                    T[i, slack] = -1.0
                    slack += 1
                T[i, art] = 1.0
                basis.append(art)
                art += 1

        # phase one: minimise the sum of artificials
        if n_art:
            T[-1, art_start:width] = 1.0
            for i, col in enumerate(basis):
                if col >= art_start:
                    T[-1] -= T[i]
            self._run(T, basis, width, phase=1)
            if -T[-1, -1] > self.feasibility_tol:
                logger.debug("phase one ended with infeasibility %.3g", -T[-1, -1])
                return LpSolution(LpStatus.INFEASIBLE, iterations=self.iteration_count)

            redundant = []
            for i, col in enumerate(basis):
                if col < art_start:
                    continue
                candidates = np.flatnonzero(np.abs(T[i, :art_start]) > 1e-9)
                if candidates.size:
                    self._pivot(T, i, int(candidates[0]))
                    basis[i] = int(candidates[0])
                else:
                    redundant.append(i)
            keep_rows = [i for i in range(m) if i not in redundant] + [m]
            keep_cols = list(range(art_start)) + [width]
            T = T[np.ix_(keep_rows, keep_cols)]
            basis = [basis[i] for i in range(m) if i not in redundant]
            width = art_start

        # phase two
        T[-1] = 0.0
        T[-1, :n] = c
        for i, col in enumerate(basis):
            if col < n and c[col] != 0.0:
                T[-1] -= c[col] * T[i]
        status = self._run(T, basis, width, phase=2)
        if status is LpStatus.UNBOUNDED:
            return LpSolution(LpStatus.UNBOUNDED, iterations=self.iteration_count)

        y = np.zeros(width)
        for i, col in enumerate(basis):
            y[col] = T[i, -1]
        z = offset + M @ y[:n]
        breach = lp.violation(z)
        if breach > self.feasibility_tol:
            raise SolverError(f"numerical breakdown: solution violates constraints by {breach:.3g}")
        z = np.clip(z, lp.lo, lp.hi)
        return LpSolution(LpStatus.OPTIMAL, z, float(lp.c @ z), self.iteration_count)


def _solve_highs(lp):
    bounds = [(None if np.isinf(lo) else lo, None if np.isinf(hi) else hi) for lo, hi in zip(lp.lo, lp.hi)]
    res = linprog(
        lp.c,
        A_ub=lp.A_ub if lp.A_ub.shape[0] else None,
        b_ub=lp.b_ub if lp.A_ub.shape[0] else None,
        A_eq=lp.A_eq if lp.A_eq.shape[0] else None,
        b_eq=lp.b_eq if lp.A_eq.shape[0] else None,
        bounds=bounds,
        method="highs",
    )
    if res.status == 0:
        z = np.clip(res.x, lp.lo, lp.hi)
        return LpSolution(LpStatus.OPTIMAL, z, float(lp.c @ z), int(getattr(res, "nit", 0)))
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED)
    raise SolverError(f"HiGHS failed: {res.message}")


def solve(
    lp: LinearProgram,
    backend: Literal["simplex", "highs"] = "simplex",
    solver: Optional["TwoPhaseSimplex"] = None,
) -> LpSolution:
    """
    Solve a linear program.

    Args:
        lp: LinearProgram
        backend: "simplex" for the embedded solver, "highs" for scipy's HiGHS
        solver: optional configured TwoPhaseSimplex to reuse

    Returns:
        LpSolution
    """
    if backend == "simplex":
        return (solver or TwoPhaseSimplex()).solve(lp)
    if backend == "highs":
        return _solve_highs(lp)
    raise DomainError(f"unknown LP backend {backend!r}")
