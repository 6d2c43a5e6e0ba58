"""Pydantic documents: the instance file schema and service request/response models.

The instance document (``"schema": 1``) mirrors the problem parameters::

    {
      "schema": 1, "n": 1, "radius": 1.0,
      "a1": 1.0, "a2": 2.0, "alpha1": 0.05, "alpha2": 0.10,
      "sigma1": 0.4, "sigma2": 0.6,
      "f1": {"kind": "radial-quadratic", "m": 1.0},
      "f2": {"kind": "quadratic-diagonal", "c": [1.0]},
      "y0": [0.0], "eps0": 1
    }

Cost documents cover the two quadratic kinds; tabulated costs carry a
callable and exist only on the Python API.  Semantic validation (positivity,
interior start, quadratic bounds) is the model validator's job; the schema
layer checks types and presence only.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .model import (QUADRATIC_DIAGONAL, RADIAL_QUADRATIC, CostFunction,
                    ProblemInstance, RegimeParams)

SCHEMA_VERSION = 1


class CostDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["radial-quadratic", "quadratic-diagonal"]
    m: Optional[float] = None
    c: Optional[list[float]] = None
    bound: Optional[float] = None

    def to_cost(self) -> CostFunction:
        if self.kind == RADIAL_QUADRATIC:
            m = self.m if self.m is not None else 0.0
            f = CostFunction.radial_quadratic(m)
        else:
            f = CostFunction.quadratic_diagonal(self.c or ())
        if self.bound is not None:
            f = CostFunction(kind=f.kind, coefficient=f.coefficient,
                             coefficients=f.coefficients, bound=float(self.bound))
        return f

    @staticmethod
    def from_cost(f: CostFunction) -> "CostDoc":
        if f.kind == RADIAL_QUADRATIC:
            return CostDoc(kind=f.kind, m=f.coefficient, bound=f.bound)
        if f.kind == QUADRATIC_DIAGONAL:
            return CostDoc(kind=f.kind, c=list(f.coefficients), bound=f.bound)
        raise ValueError("tabulated costs are not serializable to documents")


class InstanceDoc(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    schema_version: int = Field(default=SCHEMA_VERSION, alias="schema")
    n: int
    radius: float
    a1: float
    a2: float
    alpha1: float
    alpha2: float
    sigma1: float
    sigma2: float
    f1: CostDoc
    f2: CostDoc
    y0: list[float]
    eps0: int

    def to_instance(self) -> ProblemInstance:
        return ProblemInstance(
            n_dim=self.n, radius=self.radius,
            regimes=RegimeParams(a1=self.a1, a2=self.a2, alpha1=self.alpha1,
                                 alpha2=self.alpha2, sigma1=abs(self.sigma1),
                                 sigma2=abs(self.sigma2)),
            f1=self.f1.to_cost(), f2=self.f2.to_cost(),
            y0=tuple(self.y0), eps0=self.eps0)

    @staticmethod
    def from_instance(inst: ProblemInstance) -> "InstanceDoc":
        r = inst.regimes
        return InstanceDoc(
            n=inst.n_dim, radius=inst.radius, a1=r.a1, a2=r.a2,
            alpha1=r.alpha1, alpha2=r.alpha2, sigma1=r.sigma1, sigma2=r.sigma2,
            f1=CostDoc.from_cost(inst.f1), f2=CostDoc.from_cost(inst.f2),
            y0=list(inst.y0), eps0=inst.eps0)


# ---------------------------------------------------------------------------
# Request options

class SolveOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid: Optional[int] = None          # nodes per axis; default by dimension
    tol: float = 1e-9
    max_iter: int = 10000


class VerifyOptions(SolveOptions):
    paths: int = 200_000
    dt: Optional[float] = None
    seed: int = 42
    record_paths: int = 100


class SweepOptions(VerifyOptions):
    param: str
    values: list[float]


class CertifyRequest(BaseModel):
    instance: InstanceDoc


class SolveRequest(BaseModel):
    instance: InstanceDoc
    options: SolveOptions = SolveOptions()


class VerifyRequest(BaseModel):
    instance: InstanceDoc
    options: VerifyOptions = VerifyOptions()


class SweepRequest(BaseModel):
    instance: InstanceDoc
    options: SweepOptions


# ---------------------------------------------------------------------------
# Responses.  ``artifacts`` maps output file names to their full text content
# so a thin client can persist byte-identical files locally.

class CertificateDoc(BaseModel):
    k1: float
    k2: float
    lambda1: float
    lambda2: float
    ineq_margins: list[float]
    lipschitz_bounds: list[float]


class CertifyResponse(BaseModel):
    exit_code: int
    valid: bool
    violations: list[str] = []
    error: Optional[str] = None
    certificate: Optional[CertificateDoc] = None
    artifacts: dict[str, str] = {}


class SolveResponse(BaseModel):
    exit_code: int
    converged: bool
    iterations: int
    grid_nodes_per_axis: int
    n_interior: int
    tol: float
    final_update: float
    final_residual: float
    min_ordering_slack: float
    z_at_y0: list[float]                # [z1(y0), z2(y0)]
    certificate: CertificateDoc
    artifacts: dict[str, str] = {}


class PolicyEstimateDoc(BaseModel):
    mean: float
    stderr: float
    n_paths: int
    truncation_fraction: float
    mean_exit_time: float
    max_exit_norm: float


class CheckDoc(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    exit_code: int
    passed: bool
    reference_regime: int
    reference_value: float
    disc_margin: float
    disc_margin_parts: dict[str, float]
    pde_error_estimate: float
    dt: float
    seed: int
    policies: dict[str, PolicyEstimateDoc]
    checks: list[CheckDoc]
    artifacts: dict[str, str] = {}


class SweepRow(BaseModel):
    param: str
    value: float
    status: str                          # ok | invalid | error
    message: str = ""
    z1_y0: Optional[float] = None
    z2_y0: Optional[float] = None
    j_hat: Optional[float] = None
    j_stderr: Optional[float] = None
    ineq_margins: Optional[list[float]] = None


class SweepResponse(BaseModel):
    exit_code: int
    rows: list[SweepRow]
    artifacts: dict[str, str] = {}
