"""Shifted Helmholtz solves and the monotone Picard iteration.

Each sweep solves, for frozen previous iterates,

    (lap + Lambda_j) u_j^k = g_j(x, u1^{k-1}, u2^{k-1}) + Lambda_j u_j^{k-1}

with boundary value 1.  With Lambda_j < 0 the negated discrete operator is
symmetric positive definite and an M-matrix, so each solve is well posed and
the comparison argument applies: starting from the certified sub-solution
pair the iterates increase nodewise and stay below the constant
super-solution 1, squeezing onto the unique fixed point of the discretized
system.

For N=1 the lattice end nodes lie exactly on the sphere and the discrete
ordering holds to rounding at every sweep.  For N >= 2 the staircase
boundary breaks the very first comparison in a thin ring next to the sphere
(the continuous sub-solution exceeds 1 just outside the ball, but exterior
arms read 1), so early sweeps can dip below the sampled sub-solution there;
the trace records this honestly and convergence is unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .certificates import SubSuperCertificate, coupling_coefficients
from .errors import ConvergenceError, InputError
from .grid import BallGrid, GridField, boundary_source, laplacian_interior
from .model import ProblemInstance

#: Relative residual target of the inner conjugate-gradient solves.
CG_RTOL = 1e-10

#: Each warm-started inner solve must also shrink its incoming residual by
#: this factor.  Near the fixed point the sweep updates fall far below
#: ``CG_RTOL * ||rhs||``; without the reduction requirement the linear-solve
#: error would be of the same size as the updates and contaminate the
#: nodewise ordering at the 1e-12 scale the invariants are checked at.
CG_REDUCTION = 2e-3

#: The nonlinear stop also requires the fixed-point residual below
#: ``RESIDUAL_FACTOR * tol`` plus the linear-solver budget; the sup-norm
#: update alone understates the residual by the shift magnitude.
RESIDUAL_FACTOR = 10.0


@dataclass
class IterationTrace:
    """Per-sweep diagnostics of the monotone iteration.

    ``min_ordering_slack`` is the smallest nodewise increment of the sweep
    (negative values mean the ordering was violated); ``sandwich_lo`` the
    smallest nodewise gap above the sampled sub-solution and ``sandwich_hi``
    the largest field value, so the bracket can be checked at every sweep.
    """

    max_update: list[float] = field(default_factory=list)
    min_ordering_slack: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    sandwich_lo: list[float] = field(default_factory=list)
    sandwich_hi: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "max_update": self.max_update,
            "min_ordering_slack": self.min_ordering_slack,
            "residual": self.residual,
            "sandwich_lo": self.sandwich_lo,
            "sandwich_hi": self.sandwich_hi,
        }


def solve_shifted(grid: BallGrid, shift: float, rhs, boundary_value: float,
                  x0=None, rtol: float = CG_RTOL) -> GridField:
    """Solve (lap + shift) u = rhs with constant Dirichlet data.

    ``shift`` must be negative.  Preconditioned conjugate gradients on the
    negated SPD system, matrix-free; the substitution v = u - bc removes the
    1/h^2 boundary terms from the right-hand side, so the residual target
    ``rtol * ||rhs||_inf`` is meaningful even for small right-hand sides.
    Raises :class:`ConvergenceError` if the iteration cap is hit.
    """
    if not shift < 0:
        raise InputError(f"shift must be negative, got {shift}")
    rhs = rhs.values if isinstance(rhs, GridField) else np.asarray(rhs, dtype=float)
    # v = u - bc has zero boundary: (lap0 + shift) v = rhs - shift*bc  - lap(bc)
    # and lap of the constant-bc field vanishes identically.
    b = rhs - shift * boundary_value
    rhs_norm = float(np.max(np.abs(rhs))) if rhs.size else 0.0

    def neg_op(v):
        return -(laplacian_interior(grid, v) + shift * v)

    v = (x0.values - boundary_value if isinstance(x0, GridField)
         else np.zeros_like(rhs))
    r = -b - neg_op(v)
    diag = 2.0 * grid.n_dim / grid.h ** 2 - shift
    # Floor at the evaluation noise of the residual itself, so the loop can
    # always terminate; below it the computed residual is rounding.
    b_norm = float(np.max(np.abs(b), initial=0.0))
    v_bound = max(1.0, b_norm / (-shift))
    floor = 20 * np.finfo(float).eps * (diag * v_bound + b_norm)
    r0 = float(np.max(np.abs(r), initial=0.0))
    target = max(floor, min(rtol * rhs_norm, CG_REDUCTION * r0)
                 if rhs_norm > 0 else CG_REDUCTION * r0)
    z = r / diag
    p = z.copy()
    rz = float(r @ z)
    max_iter = 20 * grid.n_interior + 50
    for _ in range(max_iter):
        res_inf = float(np.max(np.abs(r), initial=0.0))
        if res_inf <= target:
            break
        ap = neg_op(p)
        alpha = rz / float(p @ ap)
        v += alpha * p
        r -= alpha * ap
        z = r / diag
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    else:
        raise ConvergenceError(
            f"conjugate gradients stalled at residual {res_inf:.3e} "
            f"(target {target:.3e})", residual=res_inf)
    return GridField(grid=grid, values=v + boundary_value,
                     boundary_value=boundary_value)


def coupling_terms(instance: ProblemInstance, cert: SubSuperCertificate,
                   f1_vals: np.ndarray, f2_vals: np.ndarray,
                   u1: np.ndarray, u2: np.ndarray):
    """(g1, g2) of the transformed system at nodal values.

    Iterates provably stay inside the bracket box, so the log arguments are
    clamped to it: rounding-level dips below the sub-solution would otherwise
    feed ``log`` out-of-box values without changing the limit.
    """
    r = instance.regimes
    c1, c2, d1, d2 = coupling_coefficients(instance)
    rad2 = instance.radius ** 2
    lo1 = np.exp(cert.k1 * rad2)
    lo2 = np.exp(cert.k2 * rad2)
    t = np.clip(u1, lo1, 1.0)
    s = np.clip(u2, lo2, 1.0)
    log_t = np.log(t)
    log_s = np.log(s)
    g1 = (f1_vals / r.sigma1 ** 4) * t + c1 * t * log_t - d1 * t * log_s
    g2 = (f2_vals / r.sigma2 ** 4) * s + c2 * s * log_s - d2 * s * log_t
    return g1, g2


def monotone_iterate(instance: ProblemInstance, cert: SubSuperCertificate,
                     grid: BallGrid, tol: float = 1e-9,
                     max_iter: int = 10000):
    """Run the monotone Picard sweep from the sub-solution pair.

    Returns ``(u1, u2, trace)`` with u_j field values in (0, 1].  Stops when
    the sup-norm update drops below ``tol`` *and* the fixed-point residual of
    the transformed system is within ``RESIDUAL_FACTOR * tol`` plus the
    linear-solve budget.  Raises :class:`ConvergenceError` (carrying the
    trace) when ``max_iter`` sweeps are exhausted.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    pts = grid.points()
    sq = np.sum(pts * pts, axis=1)
    rad2 = instance.radius ** 2
    f1_vals = np.asarray(instance.f1(pts), dtype=float)
    f2_vals = np.asarray(instance.f2(pts), dtype=float)
    u1 = np.exp(cert.k1 * (rad2 - sq))
    u2 = np.exp(cert.k2 * (rad2 - sq))
    sub1, sub2 = u1.copy(), u2.copy()
    lam1, lam2 = cert.lambda1, cert.lambda2
    trace = IterationTrace()
    field1 = GridField(grid=grid, values=u1, boundary_value=1.0)
    field2 = GridField(grid=grid, values=u2, boundary_value=1.0)
    bc_arm = boundary_source(grid, 1.0)

    def nonlinear_residual(v1, v2):
        g1, g2 = coupling_terms(instance, cert, f1_vals, f2_vals, v1, v2)
        r1 = laplacian_interior(grid, v1) + bc_arm - g1
        r2 = laplacian_interior(grid, v2) + bc_arm - g2
        return max(float(np.max(np.abs(r1))), float(np.max(np.abs(r2))))

    for k in range(1, max_iter + 1):
        g1, g2 = coupling_terms(instance, cert, f1_vals, f2_vals, u1, u2)
        rhs1 = g1 + lam1 * u1
        rhs2 = g2 + lam2 * u2
        new1 = solve_shifted(grid, lam1, rhs1, 1.0, x0=field1)
        new2 = solve_shifted(grid, lam2, rhs2, 1.0, x0=field2)
        d1 = new1.values - u1
        d2 = new2.values - u2
        upd = max(float(np.max(np.abs(d1))), float(np.max(np.abs(d2))))
        slack = min(float(np.min(d1)), float(np.min(d2)))
        u1, u2 = new1.values, new2.values
        field1, field2 = new1, new2
        res = nonlinear_residual(u1, u2)
        trace.max_update.append(upd)
        trace.min_ordering_slack.append(slack)
        trace.residual.append(res)
        trace.sandwich_lo.append(min(float(np.min(u1 - sub1)),
                                     float(np.min(u2 - sub2))))
        trace.sandwich_hi.append(max(float(np.max(u1)), float(np.max(u2))))
        trace.iterations = k
        lin_budget = CG_RTOL * max(float(np.max(np.abs(rhs1))),
                                   float(np.max(np.abs(rhs2))))
        if upd <= tol and res <= RESIDUAL_FACTOR * tol + lin_budget:
            trace.converged = True
            return field1, field2, trace
    raise ConvergenceError(
        f"monotone iteration did not converge in {max_iter} sweeps "
        f"(last update {upd:.3e}, residual {res:.3e})",
        residual=res, trace=trace)
