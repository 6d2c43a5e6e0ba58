"""Monte Carlo simulation of the controlled inventory and policy verification.

Paths follow the regime-switching Euler-Maruyama scheme of
``_pathkernel.run_path``: coefficients frozen between jumps, steps split at
jump times, accumulated discounting, first-exit stopping at |y| >= R with a
horizon cap.  Every path draws from its own substream spawned from the
master seed, so estimates are bit-reproducible for a fixed seed and path
count regardless of how paths would be scheduled; sums reduce in path order.

``verify_optimality`` runs the optimality experiment: the simulated cost of
the extracted feedback policy must match the value function at the start
state within statistical and discretization allowances, and every challenger
policy must not beat it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._pathkernel import python_path, run_path
from .errors import InputError, SimulationError
from .hjb import PolicyField, ValueFields
from .model import (QUADRATIC_DIAGONAL, RADIAL_QUADRATIC, ProblemInstance,
                    require_valid)

#: Exit-bias coefficient of the verification band: five times the
#: Broadie-Glasserman boundary-offset constant 0.5826.  The Euler scheme
#: detects exits at step ends only, which behaves like inflating the stopping
#: radius by ~0.5826 sigma sqrt(dt); the cost functional's radial sensitivity
#: is of order |z(y0)|/R times a small multiple, absorbed in the factor 5.
EXIT_BIAS_COEFF = 5 * 0.5826


def default_dt(instance: ProblemInstance) -> float:
    """Default Euler step: 1e-3 R^2 / sigma_max^2 (diffusion time scale)."""
    smax = max(instance.regimes.sigma1, instance.regimes.sigma2)
    return 1e-3 * instance.radius ** 2 / smax ** 2


def default_horizon(instance: ProblemInstance) -> float:
    """Cap beyond which the discounted tail is negligible.

    With zero discounting there is no tail argument; the exit time is still
    almost surely finite, so the cap is dropped (infinity).
    """
    r = instance.regimes
    rate = min(r.alpha1, r.alpha2, 0.01)
    return 50.0 / rate if rate > 0 else math.inf


@dataclass(frozen=True)
class SimConfig:
    """Simulation controls.  Discounting is always accumulated along the path."""

    dt: float
    n_paths: int
    horizon_cap: float
    seed: int = 42

    @staticmethod
    def for_instance(instance: ProblemInstance, n_paths: int = 200_000,
                     dt: float | None = None, seed: int = 42,
                     horizon_cap: float | None = None) -> "SimConfig":
        cfg = SimConfig(dt=dt if dt is not None else default_dt(instance),
                        n_paths=n_paths,
                        horizon_cap=(horizon_cap if horizon_cap is not None
                                     else default_horizon(instance)),
                        seed=seed)
        if cfg.dt <= 0 or cfg.n_paths < 1 or cfg.horizon_cap <= 0:
            raise InputError("dt, n_paths, horizon_cap must be positive")
        return cfg


@dataclass(frozen=True)
class RegimePath:
    """Jump skeleton of the switching chain on [0, horizon].

    ``states[k]`` rules on [times[k], times[k+1]) with times[0] = 0 and the
    last interval closed by the horizon.
    """

    times: np.ndarray
    states: np.ndarray
    horizon: float


def sample_regime_path(a1: float, a2: float, eps0: int, horizon: float,
                       rng: np.random.Generator) -> RegimePath:
    """Exponential holding times: rate a1 in regime 1, a2 in regime 2."""
    if horizon <= 0:
        raise InputError("horizon must be positive")
    times = [0.0]
    states = [int(eps0)]
    t = 0.0
    reg = int(eps0)
    while True:
        rate = a1 if reg == 1 else a2
        t = t + rng.standard_exponential() / rate
        if t >= horizon:
            break
        reg = 3 - reg
        times.append(t)
        states.append(reg)
    return RegimePath(times=np.asarray(times), states=np.asarray(states),
                      horizon=horizon)


@dataclass(frozen=True)
class PolicyChoice:
    """A policy to simulate: a gridded field, optionally scaled or with the
    two regimes' policies swapped; ``field=None`` is the zero policy."""

    field: PolicyField | None
    scale: float = 1.0
    swap_regimes: bool = False
    name: str = "optimal"


def zero_policy() -> PolicyChoice:
    return PolicyChoice(field=None, scale=0.0, name="zero")


def default_challengers(policy: PolicyField) -> list[PolicyChoice]:
    """Zero, under- and over-production scalings, and regime misreading."""
    return [
        zero_policy(),
        PolicyChoice(field=policy, scale=0.5, name="scaled_0.5"),
        PolicyChoice(field=policy, scale=1.5, name="scaled_1.5"),
        PolicyChoice(field=policy, swap_regimes=True, name="regime_swapped"),
    ]


@dataclass(frozen=True)
class CostEstimate:
    """Monte Carlo estimate of the discounted cost to first exit."""

    mean: float
    stderr: float
    n_paths: int
    truncation_fraction: float
    mean_exit_time: float
    max_exit_norm: float

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n_paths": self.n_paths,
            "truncation_fraction": self.truncation_fraction,
            "mean_exit_time": self.mean_exit_time,
            "max_exit_norm": self.max_exit_norm,
        }


def _coerce_policy(policy) -> PolicyChoice:
    if isinstance(policy, PolicyChoice):
        return policy
    if isinstance(policy, PolicyField):
        return PolicyChoice(field=policy)
    if policy is None or policy == "zero":
        return zero_policy()
    raise InputError(f"unsupported policy spec {policy!r}")


def _cost_kernel_params(instance: ProblemInstance):
    """Kernel encoding of the two costs, or None if a cost is not quadratic."""
    params = []
    for f in (instance.f1, instance.f2):
        if f.kind == RADIAL_QUADRATIC:
            coef = np.zeros(instance.n_dim)
            coef[0] = f.coefficient
            params.append((0, coef))
        elif f.kind == QUADRATIC_DIAGONAL:
            params.append((1, np.asarray(f.coefficients, dtype=float)))
        else:
            return None
    return params


def _policy_kernel_arrays(choice: PolicyChoice, instance: ProblemInstance):
    if choice.field is None or choice.scale == 0.0:
        empty = np.zeros(1)
        return False, empty, empty, 2, -instance.radius, instance.radius
    grid = choice.field.grid
    pol1 = np.ascontiguousarray(choice.field.box1.reshape(-1))
    pol2 = np.ascontiguousarray(choice.field.box2.reshape(-1))
    return True, pol1, pol2, grid.nodes_per_axis, -grid.radius, grid.h


@dataclass(frozen=True)
class PathRecord:
    """Recorded rows of one path: (t, regime, y..., discount, running cost)."""

    path_index: int
    rows: np.ndarray


def simulate_cost(instance: ProblemInstance, policy, config: SimConfig,
                  record_paths: int = 0):
    """Estimate the discounted cost to first exit under a policy.

    Returns ``(estimate, records)``; ``records`` holds the first
    ``record_paths`` paths replayed step-by-step (identical substreams).
    Uses the jit kernel when both costs are quadratic kinds, the Python
    stepper otherwise (tabulated costs; keep ``n_paths`` modest there).
    """
    require_valid(instance)
    choice = _coerce_policy(policy)
    r = instance.regimes
    kernel_costs = _cost_kernel_params(instance)
    use_pol, pol1, pol2, npts, xlo, h = _policy_kernel_arrays(choice, instance)
    children = np.random.SeedSequence(config.seed).spawn(config.n_paths)
    costs = np.empty(config.n_paths)
    exits = np.empty(config.n_paths)
    norms = np.empty(config.n_paths)
    truncated = 0
    y0 = instance.y0_array()
    rec_dummy = np.zeros((0, 4 + instance.n_dim))
    swap = bool(choice.swap_regimes)

    def policy_eval(y, regime):
        return choice.field.evaluate(y, regime)

    for i in range(config.n_paths):
        gen = np.random.default_rng(children[i])
        y = y0.copy()
        if kernel_costs is not None:
            (k1, coef1), (k2, coef2) = kernel_costs
            cost, tau, trunc, ynorm, _ = run_path(
                gen, y, instance.eps0, instance.radius,
                r.a1, r.a2, r.alpha1, r.alpha2, r.sigma1, r.sigma2,
                k1, coef1, k2, coef2, config.dt, config.horizon_cap,
                use_pol, pol1, pol2, npts, xlo, h, choice.scale, swap,
                rec_dummy, 0)
        else:
            cost, tau, trunc, ynorm = python_path(
                gen, y, instance.eps0, instance.radius,
                r.a1, r.a2, r.alpha1, r.alpha2, r.sigma1, r.sigma2,
                instance.f1, instance.f2, config.dt, config.horizon_cap,
                policy_eval if use_pol else None, choice.scale, swap)
        if not (math.isfinite(cost) and math.isfinite(tau)):
            raise SimulationError(
                f"nonfinite state simulating policy {choice.name!r}",
                path_index=i)
        costs[i] = cost
        exits[i] = tau
        norms[i] = ynorm
        truncated += int(trunc)

    records = []
    for i in range(min(record_paths, config.n_paths)):
        gen = np.random.default_rng(children[i])
        rows: list = []
        python_path(gen, y0.copy(), instance.eps0, instance.radius,
                    r.a1, r.a2, r.alpha1, r.alpha2, r.sigma1, r.sigma2,
                    instance.f1, instance.f2, config.dt, config.horizon_cap,
                    policy_eval if use_pol else None, choice.scale, swap,
                    record=rows)
        packed = np.asarray([
            [t, reg, *y, disc, cost] for (t, reg, y, disc, cost) in rows])
        records.append(PathRecord(path_index=i, rows=packed))

    stderr = (float(np.std(costs, ddof=1)) / math.sqrt(config.n_paths)
              if config.n_paths > 1 else 0.0)
    estimate = CostEstimate(
        mean=float(np.sum(costs) / config.n_paths),
        stderr=stderr,
        n_paths=config.n_paths,
        truncation_fraction=truncated / config.n_paths,
        mean_exit_time=float(np.mean(exits)),
        max_exit_norm=float(np.max(norms)),
    )
    return estimate, records


@dataclass(frozen=True)
class PolicyCheck:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of the optimality experiment for one instance."""

    reference_regime: int
    reference_value: float
    disc_margin: float
    disc_margin_parts: dict
    estimates: dict
    checks: tuple
    records: list = field(default_factory=list, compare=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "reference": {"regime": self.reference_regime,
                          "value": self.reference_value},
            "disc_margin": self.disc_margin,
            "disc_margin_parts": self.disc_margin_parts,
            "policies": {k: v.to_dict() for k, v in self.estimates.items()},
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
        }


def discretization_margin(instance: ProblemInstance, dt: float,
                          reference_value: float,
                          pde_error: float = 0.0) -> tuple[float, dict]:
    """Documented O(h^2) + O(sqrt(dt)) allowance for the verification band.

    ``pde_error`` should be a Richardson estimate of the value-function
    discretization error at the start state (three times it enters the
    band); the sqrt(dt) term models the step-end exit detection bias.
    """
    smax = max(instance.regimes.sigma1, instance.regimes.sigma2)
    exit_term = (EXIT_BIAS_COEFF * smax * math.sqrt(dt)
                 * abs(reference_value) / instance.radius)
    parts = {"pde_term": 3.0 * pde_error, "exit_term": exit_term}
    return parts["pde_term"] + exit_term, parts


def verify_optimality(instance: ProblemInstance, values: ValueFields,
                      policy: PolicyField, challengers, config: SimConfig,
                      pde_error: float = 0.0,
                      record_paths: int = 0) -> VerificationReport:
    """Run the optimality checks against the value function.

    (a) |J_hat(p*) - z_eps0(y0)| <= 3 stderr + disc_margin;
    (b) for each challenger q: J_hat(q) + 3 stderr(q) >= J_hat(p*) - 3 stderr.
    Report-style: never raises on a failed check.
    """
    if not challengers:
        raise InputError("challenger list must be nonempty")
    z_ref = values.z_at(instance.y0_array(), instance.eps0)
    margin, parts = discretization_margin(instance, config.dt, z_ref, pde_error)
    est_opt, records = simulate_cost(instance, policy, config,
                                     record_paths=record_paths)
    estimates = {"optimal": est_opt}
    checks = []
    dev = abs(est_opt.mean - z_ref)
    band = 3.0 * est_opt.stderr + margin
    checks.append(PolicyCheck(
        name="optimal_matches_value",
        passed=bool(dev <= band),
        detail=f"|J(p*) - z|={dev:.6g} vs 3*stderr+disc_margin={band:.6g}"))
    for ch in challengers:
        ch = _coerce_policy(ch)
        est, _ = simulate_cost(instance, ch, config)
        estimates[ch.name] = est
        lhs = est.mean + 3.0 * est.stderr
        rhs = est_opt.mean - 3.0 * est_opt.stderr
        checks.append(PolicyCheck(
            name=f"challenger_{ch.name}_not_better",
            passed=bool(lhs >= rhs),
            detail=f"J({ch.name})+3se={lhs:.6g} >= J(p*)-3se={rhs:.6g}"))
    return VerificationReport(
        reference_regime=instance.eps0, reference_value=z_ref,
        disc_margin=margin, disc_margin_parts=parts,
        estimates=estimates, checks=tuple(checks), records=records)
