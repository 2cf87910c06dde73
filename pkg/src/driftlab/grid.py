"""Staggered Lagrangian mass grid and its two-point difference operators.

Scalars (c, Q, stresses) live at cell centers ``(j + 1/2) dx``; the velocity
lives at nodes ``j dx``.  Node 0 is the vacuum end and owns the half cell
``[0, dx/2]``; node N is the wall.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class MassGrid:
    n_cells: int
    dx: float = field(init=False)
    cell_centers: np.ndarray = field(init=False)
    nodes: np.ndarray = field(init=False)
    node_weights: np.ndarray = field(init=False)

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 8:
            raise ValueError(f"n_cells must be an integer >= 8, got {self.n_cells}")
        n = int(self.n_cells)
        dx = 1.0 / n
        object.__setattr__(self, "n_cells", n)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "cell_centers", (np.arange(n) + 0.5) * dx)
        object.__setattr__(self, "nodes", np.arange(n + 1) * dx)
        # trapezoid weights; they sum to one
        w = np.full(n + 1, dx)
        w[0] = w[-1] = 0.5 * dx
        object.__setattr__(self, "node_weights", w)


def _check_len(a, n, what):
    if a.ndim != 1 or a.shape[0] != n:
        raise ValueError(f"{what} must have {n} entries, got shape {a.shape}")


def cell_gradient_of_node_field(u, grid: MassGrid) -> np.ndarray:
    """u_x at cell centers from node values."""
    u = np.asarray(u, dtype=float)
    _check_len(u, grid.n_cells + 1, "node field")
    return np.diff(u) / grid.dx


def node_divergence_of_cell_field(sigma, grid: MassGrid, left_boundary_value: float = 0.0) -> np.ndarray:
    """sigma_x at nodes 0..N-1.

    Node 0 differences against the boundary value at ``x = 0`` across its
    half cell, so a field linear in x gives its exact slope everywhere.
    """
    sigma = np.asarray(sigma, dtype=float)
    _check_len(sigma, grid.n_cells, "cell field")
    out = np.empty(grid.n_cells)
    out[0] = (sigma[0] - left_boundary_value) / (0.5 * grid.dx)
    out[1:] = np.diff(sigma) / grid.dx
    return out


def cell_average_of_node_field(u, grid: MassGrid) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    _check_len(u, grid.n_cells + 1, "node field")
    return 0.5 * (u[1:] + u[:-1])
