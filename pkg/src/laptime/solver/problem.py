"""Solver-facing problem and solution containers.

``NlpProblem`` is the backend-agnostic contract: callbacks for objective,
gradient, constraints and sparse Jacobian, plus variable bounds ``lb <= y <=
ub`` and constraint bounds ``cl <= c(y) <= cu`` (rows with ``cl == cu`` are
equalities).  Any solver that consumes this structure and returns an
``NlpSolution`` can replace the in-repo reference solver without touching the
transcription layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

__all__ = ["NlpProblem", "NlpSolution", "dense_jacobian"]


@dataclass
class NlpProblem:
    n: int
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    constraints: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], sp.spmatrix]
    lb: np.ndarray
    ub: np.ndarray
    cl: np.ndarray
    cu: np.ndarray
    x0: np.ndarray
    name: str = "nlp"
    # columns of the Jacobian that are structurally dense (kept out of the
    # solver's sparse factorization); optional
    dense_columns: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.cl.size

    def __post_init__(self):
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        self.cl = np.asarray(self.cl, dtype=float)
        self.cu = np.asarray(self.cu, dtype=float)
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.lb.shape != (self.n,) or self.ub.shape != (self.n,):
            raise ValueError("variable bounds must have length n")
        if self.cl.shape != self.cu.shape:
            raise ValueError("constraint bounds must match")
        if np.any(self.lb > self.ub) or np.any(self.cl > self.cu):
            raise ValueError("lower bounds exceed upper bounds")

    def violation(self, y: np.ndarray) -> float:
        """Infinity-norm constraint violation including variable bounds."""
        v = 0.0
        if self.m:
            c = np.asarray(self.constraints(y), dtype=float)
            v = max(
                v,
                float(np.max(np.maximum(self.cl - c, 0.0), initial=0.0)),
                float(np.max(np.maximum(c - self.cu, 0.0), initial=0.0)),
            )
        v = max(v, float(np.max(np.maximum(self.lb - y, 0.0), initial=0.0)))
        v = max(v, float(np.max(np.maximum(y - self.ub, 0.0), initial=0.0)))
        return v


@dataclass
class NlpSolution:
    x: np.ndarray
    objective: float
    violation: float
    status: str  # optimal | acceptable | max-iterations | infeasible | error
    multipliers: np.ndarray
    bound_multipliers_lower: np.ndarray
    bound_multipliers_upper: np.ndarray
    iterations: int
    message: str = ""
    log: list[dict] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status in ("optimal", "acceptable")

    def log_csv(self) -> str:
        """Iteration log rendered as CSV text."""
        if not self.log:
            return ""
        keys = list(self.log[0].keys())
        lines = [",".join(keys)]
        for row in self.log:
            lines.append(",".join(f"{row[k]:.9g}" if isinstance(row[k], float) else str(row[k]) for k in keys))
        return "\n".join(lines)


def dense_jacobian(fun: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], sp.spmatrix]:
    """Wrap a dense-array Jacobian callback into the sparse contract."""

    def jac(y):
        return sp.csr_matrix(np.atleast_2d(np.asarray(fun(y), dtype=float)))

    return jac
