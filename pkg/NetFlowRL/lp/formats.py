"""
Text dumps of linear programs in CPLEX LP format, for cross-checking with
external solvers.
"""

import logging
import re

import numpy as np

logger = logging.getLogger(__name__)


def _clean(name):
    return re.sub(r"[^A-Za-z0-9_.]", "_", name)


def _terms(row, names):
    parts = []
    for j in np.flatnonzero(row):
        a = row[j]
        sign = "-" if a < 0 else "+"
        parts.append(f"{sign} {abs(a):.12g} {names[j]}")
    if not parts:
        return "0 " + names[0] if names else "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp_text(lp):
    """Render a LinearProgram as CPLEX LP text."""
    names = [f"{_clean(n)}_{j}" for j, n in enumerate(lp.names)]
    lines = ["\\ generated by NetFlowRL", "Minimize", f" obj: {_terms(lp.c, names)}", "Subject To"]
    for i in range(lp.A_ub.shape[0]):
        lines.append(f" ub{i}: {_terms(lp.A_ub[i], names)} <= {lp.b_ub[i]:.12g}")
    for i in range(lp.A_eq.shape[0]):
        lines.append(f" eq{i}: {_terms(lp.A_eq[i], names)} = {lp.b_eq[i]:.12g}")
    lines.append("Bounds")
    for j, name in enumerate(names):
        lo, hi = lp.lo[j], lp.hi[j]
        if np.isinf(lo) and np.isinf(hi):
            lines.append(f" {name} free")
        elif np.isinf(lo):
            lines.append(f" -inf <= {name} <= {hi:.12g}")
        elif np.isinf(hi):
            if lo != 0.0:
                lines.append(f" {name} >= {lo:.12g}")
        else:
            lines.append(f" {lo:.12g} <= {name} <= {hi:.12g}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(lp, path):
    """Write the LP text of a program to ``path``."""
    with open(path, "w") as fh:
        fh.write(to_lp_text(lp))
    logger.debug("wrote LP dump with %d variables to %s", lp.n_vars, path)
    return path
