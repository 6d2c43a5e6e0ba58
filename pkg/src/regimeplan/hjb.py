"""Value functions, optimality condition, and feedback policy extraction.

The transformed solves return u_j; the value functions are recovered by
z_j = -2 sigma_j^2 ln u_j (zero on the sphere).  The pointwise infimum of
``p . grad z + |p|^2`` over unconstrained p is ``-|grad z|^2 / 4`` attained
at ``p = -grad z / 2``, which is the feedback production policy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError
from .grid import (BallGrid, GridField, apply_laplacian, central_gradient,
                   central_gradient_box)
from .model import ProblemInstance


@dataclass(frozen=True, eq=False)
class ValueFields:
    """Discounted cost-to-go per regime with nodal gradients.

    z fields carry boundary value 0; gradients are central with the known
    zero boundary closing the stencil.
    """

    instance: ProblemInstance
    grid: BallGrid
    z1: GridField
    z2: GridField
    grad1: np.ndarray          # (n_interior, N)
    grad2: np.ndarray

    def z_at_origin_regime(self, regime: int) -> GridField:
        return self.z1 if regime == 1 else self.z2

    def z_at(self, x, regime: int) -> float:
        """Multilinear interpolation of z_regime at a ball point."""
        zfield = self.z1 if regime == 1 else self.z2
        box = zfield.box()
        return float(_multilinear(self.grid, box[..., None], np.asarray(x, float))[0])


def transform_to_z(u1: GridField, u2: GridField,
                   instance: ProblemInstance) -> ValueFields:
    """Map transformed solutions back to value functions with gradients."""
    if np.any(u1.values <= 0) or np.any(u2.values <= 0):
        raise DomainError("u values must be positive to take logarithms")
    s1 = instance.regimes.sigma1
    s2 = instance.regimes.sigma2
    z1 = GridField(grid=u1.grid, values=-2.0 * s1 ** 2 * np.log(u1.values),
                   boundary_value=0.0)
    z2 = GridField(grid=u2.grid, values=-2.0 * s2 ** 2 * np.log(u2.values),
                   boundary_value=0.0)
    return ValueFields(instance=instance, grid=u1.grid, z1=z1, z2=z2,
                       grad1=central_gradient(z1), grad2=central_gradient(z2))


def foc_infimum(grad) -> tuple[float, np.ndarray]:
    """Exact infimum of p . grad + |p|^2 over all p, with its argmin.

    Completing the square: the expression equals |p + grad/2|^2 - |grad|^2/4,
    so the value is -|grad|^2/4 at p* = -grad/2.
    """
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise InputError("gradient must be finite")
    p_star = -0.5 * grad
    value = -0.25 * float(grad @ grad)
    return value, p_star


def hjb_residual(values: ValueFields) -> tuple[GridField, GridField]:
    """Residual of the coupled value-function system under the discrete operators.

    r1 = -a1 z2 + (a1+alpha1) z1 - (sigma1^2/2) lap z1 - f1 + |grad z1|^2/4,
    symmetrically for r2.  For the converged discrete solution this measures
    pure discretization error and decays at second order in h.
    """
    inst = values.instance
    r = inst.regimes
    pts = values.grid.points()
    f1_vals = np.asarray(inst.f1(pts), dtype=float)
    f2_vals = np.asarray(inst.f2(pts), dtype=float)
    lap1 = apply_laplacian(values.z1).values
    lap2 = apply_laplacian(values.z2).values
    gsq1 = np.sum(values.grad1 ** 2, axis=1)
    gsq2 = np.sum(values.grad2 ** 2, axis=1)
    z1 = values.z1.values
    z2 = values.z2.values
    r1 = (-r.a1 * z2 + (r.a1 + r.alpha1) * z1 - 0.5 * r.sigma1 ** 2 * lap1
          - f1_vals + 0.25 * gsq1)
    r2 = (-r.a2 * z1 + (r.a2 + r.alpha2) * z2 - 0.5 * r.sigma2 ** 2 * lap2
          - f2_vals + 0.25 * gsq2)
    return (GridField(grid=values.grid, values=r1),
            GridField(grid=values.grid, values=r2))


def _multilinear(grid: BallGrid, box_vec: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a box-shaped vector field at one point."""
    n = grid.nodes_per_axis
    u = (x - (-grid.radius)) / grid.h
    i0 = np.clip(np.floor(u).astype(int), 0, n - 2)
    frac = u - i0
    ncomp = box_vec.shape[-1]
    out = np.zeros(ncomp)
    for corner in range(1 << grid.n_dim):
        w = 1.0
        idx = []
        for ax in range(grid.n_dim):
            bit = (corner >> ax) & 1
            idx.append(i0[ax] + bit)
            w *= frac[ax] if bit else 1.0 - frac[ax]
        out += w * box_vec[tuple(idx)]
    return out


@dataclass(frozen=True, eq=False)
class PolicyField:
    """Feedback production policy p(x, regime) = -grad z_regime(x) / 2.

    ``box1``/``box2`` hold nodal policy vectors on the full lattice (shape
    ``box_shape + (N,)``): interior nodes carry exactly -grad z / 2 as the
    value fields computed it; non-interior nodes extend the same stencil with
    z = 0 outside the ball, which pins the interpolation near the sphere.
    Off-grid queries are multilinear (bounded between node values) and must
    lie in the closed ball.
    """

    grid: BallGrid
    box1: np.ndarray
    box2: np.ndarray

    def evaluate(self, x, regime: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if float(np.sqrt(x @ x)) > self.grid.radius * (1 + 1e-12):
            raise DomainError("policy query outside the closed ball")
        box = self.box1 if regime == 1 else self.box2
        return _multilinear(self.grid, box, x)

    def at_nodes(self, regime: int) -> np.ndarray:
        """(n_interior, N) policy vectors at the interior nodes."""
        box = self.box1 if regime == 1 else self.box2
        return box[self.grid.interior_mask]


def extract_policy(values: ValueFields) -> PolicyField:
    """Nodewise p = -grad z / 2 on the full lattice, per regime."""
    grid = values.grid
    g1 = central_gradient_box(grid, values.z1.box())
    g2 = central_gradient_box(grid, values.z2.box())
    return PolicyField(grid=grid, box1=-0.5 * g1, box2=-0.5 * g2)
