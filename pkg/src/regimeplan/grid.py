"""Tensor-lattice discretization of the ball and the second-order stencils.

The lattice is uniform over [-R, R]^N with the same node count per axis;
interior nodes are those strictly inside the ball.  The curved boundary is
treated staircase-fashion: any stencil arm whose neighbor lattice point is
not interior reads a constant boundary value.  This keeps the discrete
operator an M-matrix, which the monotone iteration's ordering argument
needs; for N=1 the two end nodes lie exactly on the sphere so the boundary
is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model import ProblemInstance

MIN_NODES_PER_AXIS = 17


@dataclass(frozen=True, eq=False)
class BallGrid:
    """Uniform lattice over [-R, R]^N restricted to the open ball.

    ``interior_mask`` flags interior lattice points on the full box;
    ``boundary_arms`` counts, per interior node, how many of its 2N stencil
    arms leave the interior (these arms read the boundary constant).
    """

    n_dim: int
    radius: float
    nodes_per_axis: int
    h: float
    axis: np.ndarray                 # (nodes_per_axis,) lattice coordinates
    interior_mask: np.ndarray        # bool, box-shaped
    boundary_arms: np.ndarray        # int, flat over interior nodes

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(self.interior_mask))

    @property
    def box_shape(self) -> tuple[int, ...]:
        return (self.nodes_per_axis,) * self.n_dim

    def points(self) -> np.ndarray:
        """(n_interior, N) coordinates of the interior nodes, C-order."""
        grids = np.meshgrid(*([self.axis] * self.n_dim), indexing="ij")
        stacked = np.stack([g[self.interior_mask] for g in grids], axis=-1)
        return stacked

    def embed(self, values: np.ndarray, fill: float) -> np.ndarray:
        """Scatter a flat interior vector onto the full box, ``fill`` elsewhere."""
        box = np.full(self.box_shape, fill, dtype=float)
        box[self.interior_mask] = values
        return box


@dataclass(frozen=True, eq=False)
class GridField:
    """Scalar field: one value per interior node plus a boundary constant."""

    grid: BallGrid
    values: np.ndarray
    boundary_value: float = 0.0

    def box(self) -> np.ndarray:
        return self.grid.embed(self.values, self.boundary_value)


def build_grid(instance: ProblemInstance, nodes_per_axis: int) -> BallGrid:
    """Lattice over [-R, R]^N for the instance's ball."""
    return make_grid(instance.n_dim, instance.radius, nodes_per_axis)


def make_grid(n_dim: int, radius: float, nodes_per_axis: int) -> BallGrid:
    if nodes_per_axis < MIN_NODES_PER_AXIS:
        raise InputError(f"nodes_per_axis must be >= {MIN_NODES_PER_AXIS}, "
                         f"got {nodes_per_axis}")
    axis = np.linspace(-radius, radius, nodes_per_axis)
    h = 2.0 * radius / (nodes_per_axis - 1)
    grids = np.meshgrid(*([axis] * n_dim), indexing="ij")
    rr = np.zeros((nodes_per_axis,) * n_dim)
    for g in grids:
        rr += g * g
    mask = rr < radius ** 2
    # Arms leaving the interior, per interior node: pad the mask with False
    # so box-edge neighbors count as exterior.
    padded = np.pad(mask, 1, constant_values=False)
    arms = np.zeros_like(rr, dtype=int)
    core = (slice(1, -1),) * n_dim
    for ax in range(n_dim):
        for side in (-1, 1):
            sl = list(core)
            sl[ax] = slice(1 + side, padded.shape[ax] - 1 + side)
            arms += ~padded[tuple(sl)]
    return BallGrid(n_dim=n_dim, radius=radius, nodes_per_axis=nodes_per_axis,
                    h=h, axis=axis, interior_mask=mask,
                    boundary_arms=arms[mask].astype(int))


def _box_laplacian(grid: BallGrid, box: np.ndarray) -> np.ndarray:
    """Central second-difference of a box array, at inner box nodes."""
    h2 = grid.h ** 2
    out = np.zeros_like(box)
    n = grid.nodes_per_axis
    core = (slice(1, -1),) * grid.n_dim
    padded = np.pad(box, 1, mode="edge")  # edge rows never read at interior nodes
    center = padded[(slice(1, -1),) * grid.n_dim]
    for ax in range(grid.n_dim):
        lo = list((slice(1, -1),) * grid.n_dim)
        hi = list((slice(1, -1),) * grid.n_dim)
        lo[ax] = slice(0, n)
        hi[ax] = slice(2, n + 2)
        out += padded[tuple(lo)] + padded[tuple(hi)]
    out -= 2 * grid.n_dim * center
    return out / h2


def apply_laplacian(field: GridField) -> GridField:
    """Standard 2N+1-point Laplacian; exterior arms read the boundary value.

    Exact on quadratics whose boundary trace matches ``boundary_value``.
    """
    grid = field.grid
    box = field.box()
    # Interior nodes never sit on the box edge (the ball is strictly inside),
    # so the edge padding above is never consumed.
    lap = _box_laplacian(grid, box)
    return GridField(grid=grid, values=lap[grid.interior_mask], boundary_value=0.0)


def laplacian_interior(grid: BallGrid, values: np.ndarray) -> np.ndarray:
    """Laplacian of a flat interior vector with zero boundary arms."""
    box = grid.embed(values, 0.0)
    return _box_laplacian(grid, box)[grid.interior_mask]


def boundary_source(grid: BallGrid, boundary_value: float) -> np.ndarray:
    """Contribution of constant-boundary arms to the Laplacian, flat."""
    return grid.boundary_arms * (boundary_value / grid.h ** 2)


def central_gradient_box(grid: BallGrid, box: np.ndarray) -> np.ndarray:
    """Gradient of a box array: central inside, one-sided 2nd order at box edges.

    Returns shape ``box_shape + (N,)``.  Interior ball nodes always use the
    central formula (their axis neighbors exist on the box).
    """
    n = grid.nodes_per_axis
    out = np.zeros(box.shape + (grid.n_dim,))
    two_h = 2.0 * grid.h
    for ax in range(grid.n_dim):
        g = np.zeros_like(box)
        mid = [slice(None)] * grid.n_dim
        lo = [slice(None)] * grid.n_dim
        hi = [slice(None)] * grid.n_dim
        mid[ax] = slice(1, -1)
        lo[ax] = slice(0, -2)
        hi[ax] = slice(2, None)
        g[tuple(mid)] = (box[tuple(hi)] - box[tuple(lo)]) / two_h
        first = [slice(None)] * grid.n_dim
        first[ax] = 0
        s1 = [slice(None)] * grid.n_dim
        s1[ax] = 1
        s2 = [slice(None)] * grid.n_dim
        s2[ax] = 2
        g[tuple(first)] = (-3 * box[tuple(first)] + 4 * box[tuple(s1)]
                           - box[tuple(s2)]) / two_h
        last = [slice(None)] * grid.n_dim
        last[ax] = n - 1
        p1 = [slice(None)] * grid.n_dim
        p1[ax] = n - 2
        p2 = [slice(None)] * grid.n_dim
        p2[ax] = n - 3
        g[tuple(last)] = (3 * box[tuple(last)] - 4 * box[tuple(p1)]
                          + box[tuple(p2)]) / two_h
        out[..., ax] = g
    return out


def central_gradient(field: GridField) -> np.ndarray:
    """(n_interior, N) central gradient; exterior arms read the boundary value."""
    grid = field.grid
    g = central_gradient_box(grid, field.box())
    return g[grid.interior_mask]
