"""Independent first-order optimality recheck.

Recomputes stationarity, complementarity and primal violation of a solution
directly from the problem callbacks, without reusing any solver-internal
bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import NlpProblem, NlpSolution

__all__ = ["KktReport", "check_kkt"]


@dataclass(frozen=True)
class KktReport:
    stationarity: float      # || grad f + J' lam - zL + zU ||_inf, scaled
    complementarity: float   # max over bounds and constraint windows
    primal_violation: float  # infinity norm of bound/constraint violation
    scaling: float           # multiplier magnitude normalization used

    def satisfied(self, tol: float, viol_tol: float) -> bool:
        return self.stationarity <= tol and self.primal_violation <= viol_tol


def check_kkt(problem: NlpProblem, solution: NlpSolution) -> KktReport:
    y = solution.x
    grad = np.asarray(problem.gradient(y), dtype=float)
    lam = solution.multipliers
    zl = solution.bound_multipliers_lower
    zu = solution.bound_multipliers_upper

    grad_l = grad.copy()
    if problem.m:
        jac = problem.jacobian(y)
        grad_l = grad_l + jac.T @ lam
    grad_l = grad_l - zl + zu

    smax = 100.0
    mult_sum = float(np.sum(np.abs(lam)) + np.sum(np.abs(zl)) + np.sum(np.abs(zu)))
    n_mult = lam.size + zl.size + zu.size
    sd = max(smax, mult_sum / max(n_mult, 1)) / smax
    stationarity = float(np.max(np.abs(grad_l))) / sd

    comp = 0.0
    finite_lb = np.isfinite(problem.lb)
    finite_ub = np.isfinite(problem.ub)
    if np.any(finite_lb):
        comp = max(comp, float(np.max(np.abs(zl[finite_lb] * (y - problem.lb)[finite_lb]))))
    if np.any(finite_ub):
        comp = max(comp, float(np.max(np.abs(zu[finite_ub] * (problem.ub - y)[finite_ub]))))
    if problem.m:
        c = np.asarray(problem.constraints(y), dtype=float)
        window = problem.cu - problem.cl
        ineq = window > 0
        # multiplier times the distance to the nearer active side
        gap = np.minimum(np.abs(c - problem.cl), np.abs(problem.cu - c))
        if np.any(ineq):
            comp = max(comp, float(np.max(np.abs(lam[ineq]) * gap[ineq])))

    return KktReport(
        stationarity=stationarity,
        complementarity=comp / sd,
        primal_violation=problem.violation(y),
        scaling=sd,
    )
