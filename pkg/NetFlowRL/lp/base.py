"""Linear program container and solver result types."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..exceptions import DomainError


class LpStatus(Enum):
    """Outcome of a solve."""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _matrix(a, n_cols, name):
    if a is None:
        return np.zeros((0, n_cols))
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else np.zeros((0, n_cols))
    if a.ndim != 2 or a.shape[1] != n_cols:
        raise DomainError(f"{name} must have {n_cols} columns, got shape {a.shape}")
    return a


def _vector(b, size, name):
    if b is None:
        return np.zeros(size)
    b = np.asarray(b, dtype=float).ravel()
    if b.shape != (size,):
        raise DomainError(f"{name} must have length {size}, got {b.shape[0]}")
    return b


@dataclass
class LinearProgram:
    """
    Minimise ``c @ z`` subject to ``A_ub @ z <= b_ub``, ``A_eq @ z == b_eq``
    and ``lo <= z <= hi``.

    ``lo`` may hold ``-inf`` and ``hi`` may hold ``+inf``; bounds default to
    ``[0, +inf)``. ``names`` optionally labels the variables for text dumps.
    """

    c: np.ndarray
    A_ub: np.ndarray = None
    b_ub: np.ndarray = None
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    lo: np.ndarray = None
    hi: np.ndarray = None
    names: list = field(default=None)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.shape[0]
        self.A_ub = _matrix(self.A_ub, n, "A_ub")
        self.b_ub = _vector(self.b_ub, self.A_ub.shape[0], "b_ub")
        self.A_eq = _matrix(self.A_eq, n, "A_eq")
        self.b_eq = _vector(self.b_eq, self.A_eq.shape[0], "b_eq")
        self.lo = np.zeros(n) if self.lo is None else _vector(self.lo, n, "lo")
        self.hi = np.full(n, np.inf) if self.hi is None else _vector(self.hi, n, "hi")
        if self.names is None:
            self.names = [f"z{j}" for j in range(n)]
        elif len(self.names) != n:
            raise DomainError(f"names must have length {n}")

        finite = [self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq]
        if not all(np.all(np.isfinite(a)) for a in finite):
            raise DomainError("program coefficients must be finite")
        if np.any(np.isnan(self.lo)) or np.any(np.isnan(self.hi)):
            raise DomainError("bounds must not be NaN")
        if np.any(self.lo == np.inf) or np.any(self.hi == -np.inf):
            raise DomainError("bounds must leave the variable a finite value")

    @property
    def n_vars(self):
        return self.c.shape[0]

    @property
    def n_rows(self):
        return self.A_ub.shape[0] + self.A_eq.shape[0]

    def scaled(self, alpha):
        """Copy with the objective multiplied by ``alpha``."""
        return LinearProgram(alpha * self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq,
                             self.lo, self.hi, list(self.names))

    def violation(self, z):
        """Largest absolute constraint or bound violation of a point."""
        z = np.asarray(z, dtype=float)
        worst = 0.0
        if self.A_ub.shape[0]:
            worst = max(worst, float(np.max(self.A_ub @ z - self.b_ub)))
        if self.A_eq.shape[0]:
            worst = max(worst, float(np.max(np.abs(self.A_eq @ z - self.b_eq))))
        worst = max(worst, float(np.max(self.lo - z, initial=0.0)), float(np.max(z - self.hi, initial=0.0)))
        return worst


@dataclass
class LpSolution:
    """Solver result; ``x`` and ``objective`` are only meaningful when optimal."""

    status: LpStatus
    x: np.ndarray = None
    objective: float = float("nan")
    iterations: int = 0

    @property
    def is_optimal(self):
        return self.status is LpStatus.OPTIMAL
