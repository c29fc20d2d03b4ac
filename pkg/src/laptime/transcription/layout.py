"""Decision-vector layout for the transcribed problem.

The vector interleaves node states and controls, then appends the final time
and the design entries::

    y = [x_1, u_1, x_2, u_2, ..., x_N, u_N, t_f, p]

``pack``/``unpack`` are exact inverses on their declared shapes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["VariableLayout"]


@dataclass(frozen=True)
class VariableLayout:
    n_nodes: int
    n_states: int
    n_controls: int
    n_design: int

    @property
    def node_width(self) -> int:
        return self.n_states + self.n_controls

    @property
    def size(self) -> int:
        return self.n_nodes * self.node_width + 1 + self.n_design

    @property
    def tf_index(self) -> int:
        return self.n_nodes * self.node_width

    @property
    def design_slice(self) -> slice:
        return slice(self.tf_index + 1, self.size)

    def state_indices(self) -> np.ndarray:
        """(n_nodes, n_states) index matrix into y."""
        base = np.arange(self.n_nodes)[:, None] * self.node_width
        return base + np.arange(self.n_states)[None, :]

    def control_indices(self) -> np.ndarray:
        base = np.arange(self.n_nodes)[:, None] * self.node_width
        return base + self.n_states + np.arange(self.n_controls)[None, :]

    def pack(self, states, controls, t_f, design) -> np.ndarray:
        states = np.asarray(states, dtype=float)
        controls = np.asarray(controls, dtype=float)
        design = np.asarray(design, dtype=float)
        if states.shape != (self.n_nodes, self.n_states):
            raise ValueError(f"states must be {(self.n_nodes, self.n_states)}")
        if controls.shape != (self.n_nodes, self.n_controls):
            raise ValueError(f"controls must be {(self.n_nodes, self.n_controls)}")
        if design.shape != (self.n_design,):
            raise ValueError(f"design must have {self.n_design} entries")
        y = np.empty(self.size)
        node = np.hstack([states, controls])
        y[: self.tf_index] = node.ravel()
        y[self.tf_index] = float(t_f)
        y[self.design_slice] = design
        return y

    def unpack(self, y: np.ndarray):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.size,):
            raise ValueError(f"y must have length {self.size}")
        node = y[: self.tf_index].reshape(self.n_nodes, self.node_width)
        states = node[:, : self.n_states]
        controls = node[:, self.n_states :]
        return states, controls, float(y[self.tf_index]), y[self.design_slice]
