"""Sub/super-solution certificates for the transformed elliptic system.

The transformed unknowns u_j = exp(-z_j / (2 sigma_j^2)) satisfy

    lap u1 = u1 [ f1/sigma1^4 + c1 ln u1 - d1 ln u2 ],   u1 = 1 on the sphere,
    lap u2 = u2 [ f2/sigma2^4 + c2 ln u2 - d2 ln u1 ],   u2 = 1 on the sphere,

with c_j = 2(a_j + alpha_j)/sigma_j^2 and d_1 = 2 a1 sigma2^2 / sigma1^4
(d_2 symmetric).  The pair (exp(K1(R^2-|x|^2)), exp(K2(R^2-|x|^2))) with
sufficiently negative K1, K2 is a sub-solution, the constant pair (1, 1) a
super-solution.  Certifying the exponents amounts to four scalar inequalities
(quadratic in K for the |x|^2 coefficients, linear for the constant terms);
this module selects admissible (K1, K2), the Helmholtz shifts (Lambda1,
Lambda2) that make the Picard sweep monotone, and evaluates both bracket
fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CertificationError, DomainError
from .model import ProblemInstance, require_valid

#: Relative nudge above the admissible interval's lower endpoint for -K1 so
#: the third inequality margin is strictly positive in floating point (the
#: exact endpoint makes it zero up to rounding, of either sign).
_ENDPOINT_NUDGE = 1e-9

#: Safety factor applied to the Lipschitz suprema when choosing the shifts.
_SHIFT_SAFETY = 1.1

#: Floor for -Lambda so the shifts stay strictly negative even when the
#: coupling slopes are all favourable.
_SHIFT_FLOOR = 1e-6

_MAX_DEEPENINGS = 60


@dataclass(frozen=True)
class SubSuperCertificate:
    """Certified constants for the monotone iteration.

    ``k1``/``k2`` are the (negative) sub-solution exponents, ``lambda1``/
    ``lambda2`` the (negative) Helmholtz shifts.  ``ineq_margins`` holds the
    four inequality left-hand sides at the chosen point (all >= 0 when
    certified); ``lipschitz_bounds`` the coupling-slope suprema the shifts
    dominate.
    """

    k1: float
    k2: float
    lambda1: float
    lambda2: float
    ineq_margins: tuple[float, float, float, float]
    lipschitz_bounds: tuple[float, float]

    def box_lo(self, instance: ProblemInstance, regime: int) -> float:
        """Lower endpoint exp(K_j R^2) of the bracket box for regime j."""
        k = self.k1 if regime == 1 else self.k2
        return math.exp(k * instance.radius ** 2)

    def to_dict(self) -> dict:
        return {
            "k1": self.k1,
            "k2": self.k2,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "ineq_margins": list(self.ineq_margins),
            "lipschitz_bounds": list(self.lipschitz_bounds),
        }


def coupling_coefficients(instance: ProblemInstance):
    """(c1, c2, d1, d2) of the transformed system."""
    r = instance.regimes
    c1 = 2.0 * (r.a1 + r.alpha1) / r.sigma1 ** 2
    c2 = 2.0 * (r.a2 + r.alpha2) / r.sigma2 ** 2
    d1 = 2.0 * r.a1 * r.sigma2 ** 2 / r.sigma1 ** 4
    d2 = 2.0 * r.a2 * r.sigma1 ** 2 / r.sigma2 ** 4
    return c1, c2, d1, d2


def ineq_margins(instance: ProblemInstance, k1, k2):
    """Left-hand sides of the four certifying inequalities at (k1, k2).

    Rows 1-2 bound the |x|^2 coefficients, rows 3-4 the constant terms, of
    the sub-solution's differential inequalities.  All four >= 0 certifies
    the exponent pair.  Vectorized over k1/k2.
    """
    n, rad = instance.n_dim, instance.radius
    r = instance.regimes
    c1, c2, d1, d2 = coupling_coefficients(instance)
    m1 = instance.f1.bound
    m2 = instance.f2.bound
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    return (
        4 * k1 ** 2 + c1 * k1 - m1 / r.sigma1 ** 4 - d1 * k2,
        4 * k2 ** 2 + c2 * k2 - m2 / r.sigma2 ** 4 - d2 * k1,
        -(c1 * rad ** 2 + 2 * n) * k1 + d1 * rad ** 2 * k2,
        -(c2 * rad ** 2 + 2 * n) * k2 + d2 * rad ** 2 * k1,
    )


def quadratic_root(a: float, alpha: float, bound: float, sigma: float) -> float:
    """Positive root kappa of 4 kappa^2 - (2(a+alpha)/sigma^2) kappa - M/sigma^4.

    -K_j >= this root makes the regime-j quadratic inequality hold on its own
    (before the helpful cross term).
    """
    return (alpha + a + math.sqrt((alpha + a) ** 2 + 4.0 * bound)) / (4.0 * sigma ** 2)


def product_inequality_holds(instance: ProblemInstance) -> bool:
    """Nonemptiness guarantee for the -K1 interval.

    [c2 R^2 + 2N][c1 R^2 + 2N] >= (d1 R^2)(d2 R^2) holds for every valid
    instance (the alphas only widen the gap); re-verified numerically here.
    """
    n, rad = instance.n_dim, instance.radius
    c1, c2, d1, d2 = coupling_coefficients(instance)
    lhs = (c2 * rad ** 2 + 2 * n) * (c1 * rad ** 2 + 2 * n)
    rhs = (d1 * rad ** 2) * (d2 * rad ** 2)
    return lhs >= rhs


def k1_interval(instance: ProblemInstance, k2: float) -> tuple[float, float]:
    """Admissible interval for -K1 given K2 (from the two linear inequalities)."""
    n, rad = instance.n_dim, instance.radius
    c1, c2, d1, d2 = coupling_coefficients(instance)
    lo = d1 * rad ** 2 * (-k2) / (c1 * rad ** 2 + 2 * n)
    hi = (c2 * rad ** 2 + 2 * n) * (-k2) / (d2 * rad ** 2)
    return lo, hi


def choose_shifts(instance: ProblemInstance, k1: float, k2: float):
    """Helmholtz shifts dominating the own-variable slopes of the couplings.

    The coupling g1(x, t, s) = f1(x) t / sigma1^4 + c1 t ln t - d1 t ln s has

        dg1/dt = f1(x)/sigma1^4 + c1 (ln t + 1) - d1 ln s,

    monotone in each of f1, t, s separately, so its extrema over the bracket
    box [exp(K1 R^2), 1] x [exp(K2 R^2), 1] and the ball are attained at
    corners (f1 bounded below by 0).  -Lambda1 is the safety-scaled supremum
    of |dg1/dt| over the corners, floored strictly above zero; symmetrically
    for Lambda2 with dg2/ds.

    Dominating the absolute slope (not just the decreasing side) is what the
    sweep's comparison argument needs: with -Lambda >= sup dg/d(own), the map
    u -> g(x, u) + Lambda u is nonincreasing in its own variable, and the
    negative inverse of (lap + Lambda) turns that into a monotone update.
    Shifts that only dominate the decreasing side make weakly-coupled
    instances oscillate instead of converging.

    Returns ``(lambda1, lambda2, lipschitz_bounds)``.
    """
    r = instance.regimes
    rad = instance.radius
    c1, c2, d1, d2 = coupling_coefficients(instance)
    f1_hi = instance.f1.bound * rad ** 2
    f2_hi = instance.f2.bound * rad ** 2
    log_lo1 = k1 * rad ** 2          # ln of the box lower endpoints
    log_lo2 = k2 * rad ** 2

    def corner_sup_abs(c, d, f_hi, own_lo, other_lo, sigma4):
        best = 0.0
        for f in (0.0, f_hi):
            for log_own in (own_lo, 0.0):
                for log_other in (other_lo, 0.0):
                    val = f / sigma4 + c * (log_own + 1.0) - d * log_other
                    best = max(best, abs(val))
        return best

    sup1 = corner_sup_abs(c1, d1, f1_hi, log_lo1, log_lo2, r.sigma1 ** 4)
    sup2 = corner_sup_abs(c2, d2, f2_hi, log_lo2, log_lo1, r.sigma2 ** 4)
    lam1 = -max(_SHIFT_SAFETY * sup1, _SHIFT_FLOOR)
    lam2 = -max(_SHIFT_SAFETY * sup2, _SHIFT_FLOOR)
    return lam1, lam2, (sup1, sup2)


def choose_constants(instance: ProblemInstance) -> SubSuperCertificate:
    """Select certified (K1, K2, Lambda1, Lambda2) for a valid instance.

    Two-stage selection: K2 starts at minus its standalone quadratic root and
    is geometrically deepened until the joint system certifies; -K1 is the
    smallest admissible magnitude, i.e. the interval's lower endpoint (nudged
    strictly inside) or the regime-1 quadratic root, whichever is larger.
    Existence is guaranteed, so failure after the deepening cap is an
    internal error reporting the violated inequality.
    """
    require_valid(instance)
    r = instance.regimes
    neg_k2 = quadratic_root(r.a2, r.alpha2, instance.f2.bound, r.sigma2)
    neg_k1_root = quadratic_root(r.a1, r.alpha1, instance.f1.bound, r.sigma1)
    if not product_inequality_holds(instance):
        raise CertificationError(
            "interval nonemptiness product inequality failed numerically", -1)
    worst = None
    for _ in range(_MAX_DEEPENINGS):
        k2 = -neg_k2
        lo, hi = k1_interval(instance, k2)
        neg_k1 = max(lo * (1.0 + _ENDPOINT_NUDGE), neg_k1_root)
        k1 = -neg_k1
        margins = tuple(float(m) for m in ineq_margins(instance, k1, k2))
        if neg_k1 <= hi and min(margins) >= 0.0:
            lam1, lam2, lips = choose_shifts(instance, k1, k2)
            return SubSuperCertificate(
                k1=k1, k2=k2, lambda1=lam1, lambda2=lam2,
                ineq_margins=margins, lipschitz_bounds=lips)
        worst = margins
        neg_k2 *= 2.0
    idx = int(np.argmin(worst)) if worst is not None else -1
    raise CertificationError(
        f"failed to certify after {_MAX_DEEPENINGS} deepenings; worst "
        f"inequality index {idx} with margin {min(worst):.3e}", idx)


def _check_ball(x: np.ndarray, radius: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    norms = np.sqrt(np.sum(np.atleast_2d(x) * np.atleast_2d(x), axis=-1))
    if np.any(norms > radius * (1 + 1e-12)):
        raise DomainError(f"point outside the closed ball of radius {radius}")
    return x


def eval_subsolution(cert: SubSuperCertificate, instance: ProblemInstance,
                     regime: int, x) -> np.ndarray | float:
    """exp(K_j (R^2 - |x|^2)) on the closed ball; equals 1 exactly on the sphere."""
    x = _check_ball(x, instance.radius)
    k = cert.k1 if regime == 1 else cert.k2
    sq = np.sum(np.atleast_2d(x) ** 2, axis=-1)
    vals = np.exp(k * (instance.radius ** 2 - sq))
    return float(vals[0]) if vals.size == 1 else vals


def eval_supersolution(regime: int, x) -> float:
    """The constant super-solution; 1 in either regime."""
    return 1.0
