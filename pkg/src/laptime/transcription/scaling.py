"""Affine variable scaling and constraint row scaling.

Every decision variable maps onto [-1, 1] from its (mandatory, finite)
bounds; constraint rows are divided by their Jacobian row infinity-norm at
the initial guess, floored at one.  The inverse map restores physical units
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["VariableScaling"]


@dataclass(frozen=True)
class VariableScaling:
    mid: np.ndarray
    half: np.ndarray

    @classmethod
    def from_bounds(cls, lb: np.ndarray, ub: np.ndarray) -> "VariableScaling":
        lb = np.asarray(lb, dtype=float)
        ub = np.asarray(ub, dtype=float)
        if not (np.all(np.isfinite(lb)) and np.all(np.isfinite(ub))):
            raise ValueError("variable scaling requires finite bounds on every entry")
        if np.any(ub <= lb):
            raise ValueError("upper bounds must exceed lower bounds")
        return cls(mid=0.5 * (ub + lb), half=0.5 * (ub - lb))

    def to_physical(self, y_scaled: np.ndarray) -> np.ndarray:
        return self.mid + self.half * np.asarray(y_scaled, dtype=float)

    def to_scaled(self, y: np.ndarray) -> np.ndarray:
        return (np.asarray(y, dtype=float) - self.mid) / self.half


def row_scale_from_jacobian(jac) -> np.ndarray:
    """1 / max(1, row infinity norm)."""
    j = abs(jac).tocsr() if hasattr(jac, "tocsr") else np.abs(np.asarray(jac))
    if hasattr(j, "max"):
        row_max = np.asarray(j.max(axis=1).todense()).ravel() if hasattr(j, "todense") else j.max(axis=1)
    else:
        row_max = j.max(axis=1)
    return 1.0 / np.maximum(1.0, row_max)
