"""Independent oracles for the test suite.

Everything here deliberately avoids the package's solver path: matrices are
assembled directly with scipy.sparse, Newton steps are damped in
log-variables, and the scan is plain vectorized arithmetic.  The oracles
share only the *discretization* (same second-order stencil on the same
lattice), which is what the comparisons are about.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from regimeplan.certificates import coupling_coefficients, ineq_margins
from regimeplan.model import ProblemInstance


def _lattice(n: int, radius: float):
    x = np.linspace(-radius, radius, n)
    h = 2.0 * radius / (n - 1)
    return x[1:-1], h


def _dirichlet_laplacian(m: int, h: float):
    main = -2.0 * np.ones(m) / h ** 2
    off = np.ones(m - 1) / h ** 2
    T = sp.diags([off, main, off], [-1, 0, 1], format="csr")
    bc = np.zeros(m)
    bc[0] = 1.0 / h ** 2
    bc[-1] = 1.0 / h ** 2
    return T, bc


def newton_coupled(instance: ProblemInstance, nodes: int,
                   tol_sup: float = 1e-8, max_iter: int = 80):
    """Damped Newton (in w = ln u) for the coupled 1-D discrete system.

    Returns (x_interior, u1, u2).  Same stencil, independent solution path.
    """
    assert instance.n_dim == 1
    r = instance.regimes
    c1, c2, d1, d2 = coupling_coefficients(instance)
    xi, h = _lattice(nodes, instance.radius)
    m = xi.size
    f1 = np.asarray(instance.f1(xi[:, None]), dtype=float)
    f2 = np.asarray(instance.f2(xi[:, None]), dtype=float)
    T, bc = _dirichlet_laplacian(m, h)

    def residual(w1, w2):
        u1 = np.exp(w1)
        u2 = np.exp(w2)
        g1 = f1 / r.sigma1 ** 4 + c1 * w1 - d1 * w2
        g2 = f2 / r.sigma2 ** 4 + c2 * w2 - d2 * w1
        return T @ u1 + bc - u1 * g1, T @ u2 + bc - u2 * g2, u1, u2, g1, g2

    w1 = np.zeros(m)
    w2 = np.zeros(m)
    for _ in range(max_iter):
        F1, F2, u1, u2, g1, g2 = residual(w1, w2)
        fnorm = np.sqrt(np.sum(F1 ** 2 + F2 ** 2))
        if max(np.max(np.abs(F1)), np.max(np.abs(F2))) <= tol_sup:
            return xi, u1, u2
        J = sp.bmat([
            [T @ sp.diags(u1) - sp.diags(u1 * (g1 + c1)), sp.diags(d1 * u1)],
            [sp.diags(d2 * u2), T @ sp.diags(u2) - sp.diags(u2 * (g2 + c2))],
        ], format="csc")
        step = spla.spsolve(J, -np.concatenate([F1, F2]))
        lam = 1.0
        for _ in range(60):
            v1 = w1 + lam * step[:m]
            v2 = w2 + lam * step[m:]
            G1, G2, *_ = residual(v1, v2)
            gnorm = np.sqrt(np.sum(G1 ** 2 + G2 ** 2))
            if np.isfinite(gnorm) and gnorm < (1 - 1e-4 * lam) * fnorm:
                break
            lam *= 0.5
        w1, w2 = v1, v2
    raise AssertionError("coupled Newton oracle did not converge")


def newton_scalar(sigma: float, alpha: float, a: float, cost_fn, radius: float,
                  nodes: int, tol_sup: float = 1e-10, max_iter: int = 80):
    """Scalar two-point BVP oracle: lap v = v (f/sigma^4 + c ln v), v(+-R) = 1."""
    c = 2.0 * (a + alpha) / sigma ** 2
    xi, h = _lattice(nodes, radius)
    m = xi.size
    f = np.asarray(cost_fn(xi[:, None]), dtype=float)
    T, bc = _dirichlet_laplacian(m, h)

    def residual(w):
        u = np.exp(w)
        g = f / sigma ** 4 + c * w
        return T @ u + bc - u * g, u, g

    w = np.zeros(m)
    for _ in range(max_iter):
        F, u, g = residual(w)
        fnorm = np.sqrt(np.sum(F ** 2))
        if np.max(np.abs(F)) <= tol_sup:
            return xi, u
        J = (T @ sp.diags(u) - sp.diags(u * (g + c))).tocsc()
        step = spla.spsolve(J, -F)
        lam = 1.0
        for _ in range(60):
            v = w + lam * step
            G, *_ = residual(v)
            gnorm = np.sqrt(np.sum(G ** 2))
            if np.isfinite(gnorm) and gnorm < (1 - 1e-4 * lam) * fnorm:
                break
            lam *= 0.5
        w = v
    raise AssertionError("scalar Newton oracle did not converge")


def exit_cost_ode(sigma: float, cost_fn, radius: float, nodes: int = 4097):
    """Expected undiscounted cost to exit for the zero policy, single regime.

    Solves -(sigma^2/2) v'' = f(x), v(+-R) = 0 on a fine lattice; returns a
    callable interpolant.  For f = x^2 the closed form is
    (R^4 - x^4) / (6 sigma^2).
    """
    xi, h = _lattice(nodes, radius)
    f = np.asarray(cost_fn(xi[:, None]), dtype=float)
    T, _ = _dirichlet_laplacian(xi.size, h)
    v = spla.spsolve((-0.5 * sigma ** 2 * T).tocsc(), f)
    xs = np.concatenate([[-radius], xi, [radius]])
    vs = np.concatenate([[0.0], v, [0.0]])
    return lambda x: float(np.interp(x, xs, vs))


def feasibility_scan(instance: ProblemInstance, deepest: float = -50.0,
                     resolution: float = 1e-2) -> bool:
    """Brute-force scan of (K1, K2) for a feasible point of the four inequalities."""
    k = -np.arange(resolution, -deepest + 1e-12, resolution)
    k1 = k[:, None]
    for k2 in k:
        m1, m2, m3, m4 = ineq_margins(instance, k1, np.array([[k2]]))
        if np.any((m1 >= 0) & (m2 >= 0) & (m3 >= 0) & (m4 >= 0)):
            return True
    return False
