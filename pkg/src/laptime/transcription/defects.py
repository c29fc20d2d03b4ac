"""Trapezoidal collocation defects.

With a uniform step ``h = t_f / (N - 1)`` the defect of interval k is::

    zeta_k = x_{k+1} - x_k - h/2 (f_k + f_{k+1})

evaluated here in matrix form over all nodes at once; the equivalent stencil
matrices (pairwise difference and pairwise sum) are exposed for the
row-by-row equivalence test.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = ["trapezoid_defects", "difference_stencil", "sum_stencil"]


def difference_stencil(n_nodes: int) -> sp.csr_matrix:
    """(N-1) x N matrix mapping node values to successive differences."""
    rows = np.repeat(np.arange(n_nodes - 1), 2)
    cols = np.empty(2 * (n_nodes - 1), dtype=int)
    cols[0::2] = np.arange(n_nodes - 1)
    cols[1::2] = np.arange(1, n_nodes)
    data = np.tile([-1.0, 1.0], n_nodes - 1)
    return sp.csr_matrix((data, (rows, cols)), shape=(n_nodes - 1, n_nodes))


def sum_stencil(n_nodes: int) -> sp.csr_matrix:
    """(N-1) x N matrix mapping node values to pairwise sums."""
    rows = np.repeat(np.arange(n_nodes - 1), 2)
    cols = np.empty(2 * (n_nodes - 1), dtype=int)
    cols[0::2] = np.arange(n_nodes - 1)
    cols[1::2] = np.arange(1, n_nodes)
    data = np.ones(2 * (n_nodes - 1))
    return sp.csr_matrix((data, (rows, cols)), shape=(n_nodes - 1, n_nodes))


def trapezoid_defects(states, f_values, t_f: float) -> np.ndarray:
    """Defect matrix ((N-1) x n_x) from node states and node dynamics."""
    states = np.asarray(states, dtype=float)
    f_values = np.asarray(f_values, dtype=float)
    n_nodes = states.shape[0]
    if n_nodes < 2:
        raise ValueError("need at least two nodes")
    h = t_f / (n_nodes - 1)
    return states[1:] - states[:-1] - 0.5 * h * (f_values[1:] + f_values[:-1])
