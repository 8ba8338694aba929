"""
Incremental construction of linear programs.

Expressions are plain ``{variable index: coefficient}`` dictionaries so the
builders in ``NetFlowRL.lcp`` can assemble rows edge by edge.
"""

import math

import numpy as np

from ..exceptions import DomainError
from .base import LinearProgram


class LpBuilder:
    """
    Collects variables, rows and objective terms, then emits a LinearProgram.

    Example:
        >>> b = LpBuilder()
        >>> x = b.add_variable("x", lo=-math.inf)
        >>> b.add_abs_penalty({x: 1.0}, weight=1.0, constant=-5.0)
        >>> lp = b.build()
    """

    def __init__(self):
        self.names = []
        self.lo = []
        self.hi = []
        self.cost = []
        self._ub_rows = []
        self._eq_rows = []

    @property
    def n_vars(self):
        return len(self.names)

    def add_variable(self, name, lo=0.0, hi=math.inf, cost=0.0):
        """Add a variable and return its index."""
        if lo > hi:
            raise DomainError(f"variable {name}: lower bound {lo} exceeds upper bound {hi}")
        self.names.append(name)
        self.lo.append(float(lo))
        self.hi.append(float(hi))
        self.cost.append(float(cost))
        return len(self.names) - 1

    def add_cost(self, index, coefficient):
        self.cost[index] += float(coefficient)
        return self

    def _check(self, expression):
        for j in expression:
            if not 0 <= j < self.n_vars:
                raise DomainError(f"expression references unknown variable {j}")

    def add_constraint(self, expression, sense, rhs):
        """
        Add ``expression (sense) rhs`` with sense one of "<=", ">=", "==".
        """
        self._check(expression)
        if sense == "<=":
            self._ub_rows.append((dict(expression), float(rhs)))
        elif sense == ">=":
            self._ub_rows.append(({j: -a for j, a in expression.items()}, -float(rhs)))
        elif sense == "==":
            self._eq_rows.append((dict(expression), float(rhs)))
        else:
            raise DomainError(f"unknown constraint sense {sense!r}")
        return self

    def add_abs_penalty(self, expression, weight, constant=0.0, name="eps"):
        """
        Penalise ``weight * |expression + constant|``.

        Adds ``eps_plus, eps_minus >= 0`` with
        ``expression + constant == eps_plus - eps_minus`` and charges
        ``weight * (eps_plus + eps_minus)``; at an optimum one of the two is zero.

        Returns:
            tuple: indices of (eps_plus, eps_minus)
        """
        if not weight > 0:
            raise DomainError(f"penalty weight must be positive, got {weight}")
        self._check(expression)
        plus = self.add_variable(f"{name}+", cost=weight)
        minus = self.add_variable(f"{name}-", cost=weight)
        row = dict(expression)
        row[plus] = row.get(plus, 0.0) - 1.0
        row[minus] = row.get(minus, 0.0) + 1.0
        self._eq_rows.append((row, -float(constant)))
        return plus, minus

    @staticmethod
    def _dense(rows, n):
        A = np.zeros((len(rows), n))
        b = np.zeros(len(rows))
        for i, (expr, rhs) in enumerate(rows):
            for j, a in expr.items():
                A[i, j] += a
            b[i] = rhs
        return A, b

    def build(self):
        n = self.n_vars
        A_ub, b_ub = self._dense(self._ub_rows, n)
        A_eq, b_eq = self._dense(self._eq_rows, n)
        return LinearProgram(
            np.array(self.cost), A_ub, b_ub, A_eq, b_eq,
            np.array(self.lo), np.array(self.hi), list(self.names),
        )


def add_abs_penalty(builder, expression, weight, constant=0.0, name="eps"):
    """Functional form of ``LpBuilder.add_abs_penalty``; returns the builder."""
    builder.add_abs_penalty(expression, weight, constant, name)
    return builder
