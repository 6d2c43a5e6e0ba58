"""Problem data for the two-regime production planning model.

The controlled state is an N-dimensional demand-adjusted inventory driven by
``dy_i = p_i dt + sigma(regime) dw_i`` inside the ball of radius R; production
stops the first time |y| reaches R.  Running cost is ``|p|^2 + f_regime(y)``
discounted at the accumulated rate ``exp(-int_0^t alpha(regime_s) ds)``.  A
two-state Markov chain with rates a1 (leave regime 1) and a2 (leave regime 2)
drives the switching.

This module holds the immutable parameter types, the standing-assumption
validator, and cost-function evaluation.  Everything downstream (certificates,
elliptic solves, simulation) consumes a validated :class:`ProblemInstance`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InputError

# Cost function kinds accepted by the model.
RADIAL_QUADRATIC = "radial-quadratic"
QUADRATIC_DIAGONAL = "quadratic-diagonal"
TABULATED_CONVEX = "tabulated-convex"

#: Points sampled by ``validate`` when spot-checking cost bounds, in addition
#: to the origin and the axis points on the sphere.  Fixed seed keeps
#: ``validate`` pure.
_VALIDATE_SAMPLES = 128
_VALIDATE_SEED = 1830


@dataclass(frozen=True)
class RegimeParams:
    """Regime-dependent rates: switching, discounting, diffusion.

    ``a1``/``a2`` are the rates of leaving regime 1/2 (both must be positive
    so the chain actually switches), ``alpha1``/``alpha2`` the nonnegative
    discount rates, ``sigma1``/``sigma2`` the nonzero diffusion coefficients
    (stored as positive magnitudes; only sigma^2 enters the equations).
    """

    a1: float
    a2: float
    alpha1: float
    alpha2: float
    sigma1: float
    sigma2: float


@dataclass(frozen=True)
class CostFunction:
    """Nonnegative convex running cost with a known quadratic bound.

    ``bound`` is the constant M with ``f(x) <= M |x|^2`` on the closed ball.
    For the two quadratic kinds M is known analytically; ``tabulated-convex``
    wraps an arbitrary callable and requires a caller-supplied bound, which
    ``validate`` spot-checks by sampling.
    """

    kind: str
    coefficient: float = 0.0                      # m for radial-quadratic
    coefficients: tuple[float, ...] = ()          # c_i for quadratic-diagonal
    func: Callable[[np.ndarray], float] | None = field(default=None, compare=False)
    bound: float = 0.0

    @staticmethod
    def radial_quadratic(m: float) -> "CostFunction":
        """f(x) = m |x|^2, bound M = m."""
        return CostFunction(kind=RADIAL_QUADRATIC, coefficient=float(m), bound=float(m))

    @staticmethod
    def quadratic_diagonal(c: Sequence[float]) -> "CostFunction":
        """f(x) = sum_i c_i x_i^2, bound M = max_i c_i."""
        cs = tuple(float(v) for v in c)
        return CostFunction(kind=QUADRATIC_DIAGONAL, coefficients=cs,
                            bound=max(cs) if cs else 0.0)

    @staticmethod
    def tabulated(func: Callable[[np.ndarray], float], bound: float) -> "CostFunction":
        """Arbitrary convex cost; the quadratic bound must be supplied."""
        return CostFunction(kind=TABULATED_CONVEX, func=func, bound=float(bound))

    def __call__(self, x: np.ndarray) -> np.ndarray | float:
        """Evaluate pointwise; ``x`` has shape (..., N).  No domain check."""
        x = np.asarray(x, dtype=float)
        if self.kind == RADIAL_QUADRATIC:
            return self.coefficient * np.sum(x * x, axis=-1)
        if self.kind == QUADRATIC_DIAGONAL:
            c = np.asarray(self.coefficients)
            return np.sum(c * x * x, axis=-1)
        if self.kind == TABULATED_CONVEX:
            if x.ndim == 1:
                return float(self.func(x))
            return np.apply_along_axis(self.func, -1, x)
        raise InputError(f"unknown cost kind {self.kind!r}")


@dataclass(frozen=True)
class ProblemInstance:
    """Full parameter set: dimensions, regimes, costs, domain, start state."""

    n_dim: int
    radius: float
    regimes: RegimeParams
    f1: CostFunction
    f2: CostFunction
    y0: tuple[float, ...]
    eps0: int

    def cost(self, regime: int) -> CostFunction:
        return self.f1 if regime == 1 else self.f2

    def sigma(self, regime: int) -> float:
        return self.regimes.sigma1 if regime == 1 else self.regimes.sigma2

    def alpha(self, regime: int) -> float:
        return self.regimes.alpha1 if regime == 1 else self.regimes.alpha2

    def switch_rate(self, regime: int) -> float:
        return self.regimes.a1 if regime == 1 else self.regimes.a2

    def y0_array(self) -> np.ndarray:
        return np.asarray(self.y0, dtype=float)


def make_instance(n=1, radius=1.0, a1=1.0, a2=1.0, alpha1=0.0, alpha2=0.0,
                  sigma1=1.0, sigma2=1.0, f1=None, f2=None, y0=None,
                  eps0=1) -> ProblemInstance:
    """Convenience constructor with scalar defaults (costs default to zero)."""
    if f1 is None:
        f1 = CostFunction.radial_quadratic(0.0)
    if f2 is None:
        f2 = CostFunction.radial_quadratic(0.0)
    if y0 is None:
        y0 = (0.0,) * n
    return ProblemInstance(
        n_dim=int(n), radius=float(radius),
        regimes=RegimeParams(a1=float(a1), a2=float(a2), alpha1=float(alpha1),
                             alpha2=float(alpha2), sigma1=float(abs(sigma1)),
                             sigma2=float(abs(sigma2))),
        f1=f1, f2=f2, y0=tuple(float(v) for v in y0), eps0=int(eps0))


def inst_a() -> ProblemInstance:
    """Canonical test instance used across the test suite.

    N=1, R=1, a1=1, a2=2, alpha1=0.05, alpha2=0.10, sigma1=0.4, sigma2=0.6,
    f1 = |x|^2, f2 = 2|x|^2, start at the origin in regime 1.  Deliberately
    asymmetric across regimes so the coupling terms are exercised.
    """
    return make_instance(n=1, radius=1.0, a1=1.0, a2=2.0, alpha1=0.05,
                         alpha2=0.10, sigma1=0.4, sigma2=0.6,
                         f1=CostFunction.radial_quadratic(1.0),
                         f2=CostFunction.radial_quadratic(2.0),
                         y0=(0.0,), eps0=1)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the standing-assumption checks; empty list means valid."""

    violations: tuple[str, ...]

    @property
    def valid(self) -> bool:
        return not self.violations


def _ball_samples(n_dim: int, radius: float) -> np.ndarray:
    """Deterministic sample of the closed ball: origin, +-R e_i, interior points."""
    pts = [np.zeros(n_dim)]
    for ax in range(n_dim):
        e = np.zeros(n_dim)
        e[ax] = radius
        pts.append(e.copy())
        pts.append(-e)
    rng = np.random.default_rng(_VALIDATE_SEED)
    raw = rng.standard_normal((_VALIDATE_SAMPLES, n_dim))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    radii = radius * rng.random((_VALIDATE_SAMPLES, 1)) ** (1.0 / n_dim)
    pts.extend(raw / norms * radii)
    return np.asarray(pts)


def _check_cost(name: str, f: CostFunction, n_dim: int, radius: float,
                out: list[str]) -> None:
    if f.kind not in (RADIAL_QUADRATIC, QUADRATIC_DIAGONAL, TABULATED_CONVEX):
        out.append(f"{name}: unknown cost kind {f.kind!r}")
        return
    if f.kind == RADIAL_QUADRATIC and f.coefficient < 0:
        out.append(f"{name}: radial coefficient must be >= 0")
    if f.kind == QUADRATIC_DIAGONAL:
        if len(f.coefficients) != n_dim:
            out.append(f"{name}: needs {n_dim} diagonal coefficients, "
                       f"got {len(f.coefficients)}")
            return
        if any(c < 0 for c in f.coefficients):
            out.append(f"{name}: diagonal coefficients must be >= 0")
    if f.kind == TABULATED_CONVEX and f.func is None:
        out.append(f"{name}: tabulated cost needs a callable")
        return
    if not np.isfinite(f.bound) or f.bound < 0:
        out.append(f"{name}: quadratic bound M must be finite and >= 0")
        return
    pts = _ball_samples(n_dim, radius)
    vals = np.asarray([float(f(p)) for p in pts])
    if np.any(vals < -1e-15):
        i = int(np.argmin(vals))
        out.append(f"{name}: f(x) >= 0 violated at x={pts[i].tolist()} "
                   f"(f={vals[i]:.6g})")
    quad = f.bound * np.sum(pts * pts, axis=1)
    bad = vals > quad * (1 + 1e-12) + 1e-15
    if np.any(bad):
        i = int(np.argmax(vals - quad))
        out.append(f"{name}: quadratic bound violated: f(x)={vals[i]:.6g} > "
                   f"M|x|^2={quad[i]:.6g} at sampled x={pts[i].tolist()}")


def validate(instance: ProblemInstance) -> ValidationReport:
    """Check every standing assumption; returns the list of violations.

    Report-style: never raises.  Each message names the assumption it breaks.
    Pure: identical instances give identical reports (cost sampling is
    fixed-seed).
    """
    v: list[str] = []
    r = instance.regimes
    if not (instance.n_dim >= 1 and instance.n_dim <= 3):
        v.append(f"1 <= N <= 3 violated (N={instance.n_dim}); tensor-grid "
                 "solves are desk-scale only up to 3 dimensions")
    if not (instance.radius > 0 and np.isfinite(instance.radius)):
        v.append(f"R > 0 violated (R={instance.radius})")
    if not (r.a1 > 0 and np.isfinite(r.a1)):
        v.append(f"a1 > 0 violated (a1={r.a1}); the chain must leave regime 1")
    if not (r.a2 > 0 and np.isfinite(r.a2)):
        v.append(f"a2 > 0 violated (a2={r.a2}); the chain must leave regime 2")
    for nm, val in (("alpha1", r.alpha1), ("alpha2", r.alpha2)):
        if not (np.isfinite(val) and val >= 0):
            v.append(f"{nm} >= 0 violated ({nm}={val})")
    for nm, val in (("sigma1", r.sigma1), ("sigma2", r.sigma2)):
        if not (np.isfinite(val) and val != 0):
            v.append(f"{nm} != 0 violated ({nm}={val})")
        elif val < 0:
            v.append(f"{nm} must be stored as a positive magnitude "
                     f"({nm}={val})")
    if instance.eps0 not in (1, 2):
        v.append(f"eps0 in {{1, 2}} violated (eps0={instance.eps0})")
    y0 = instance.y0_array()
    if len(instance.y0) != instance.n_dim:
        v.append(f"y0 must have N={instance.n_dim} components, "
                 f"got {len(instance.y0)}")
    elif not np.all(np.isfinite(y0)) or np.linalg.norm(y0) >= instance.radius:
        v.append(f"|y0| < R violated (|y0|={np.linalg.norm(y0):.6g}, "
                 f"R={instance.radius}); the start must be interior")
    if instance.n_dim in (1, 2, 3) and instance.radius > 0:
        _check_cost("f1", instance.f1, instance.n_dim, instance.radius, v)
        _check_cost("f2", instance.f2, instance.n_dim, instance.radius, v)
    return ValidationReport(violations=tuple(v))


def require_valid(instance: ProblemInstance) -> None:
    """Raise :class:`InputError` listing all violations, if any."""
    report = validate(instance)
    if not report.valid:
        raise InputError("invalid instance: " + "; ".join(report.violations))


def eval_cost(f: CostFunction, x, radius: float) -> float:
    """Evaluate a cost at a single point of the closed ball.

    Raises :class:`DomainError` when |x| > R.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.linalg.norm(x) > radius * (1 + 1e-12):
        raise DomainError(f"point with |x|={np.linalg.norm(x):.6g} lies "
                          f"outside the closed ball of radius {radius}")
    return float(f(x))
