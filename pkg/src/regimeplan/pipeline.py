"""End-to-end runs shared by the HTTP service and the CLI.

Each ``run_*`` takes a validated-or-not :class:`ProblemInstance` plus plain
options, performs the computation, and returns a response model whose
``artifacts`` dict holds the output files (name -> text).  All rendering is
deterministic: fixed key order, shortest round-trip float formatting, no
timestamps (the CLI's run manifest owns those), so reruns with identical
settings reproduce artifacts byte-identically.
"""

from __future__ import annotations

import io
import json

import numpy as np

from . import simulate as sim
from .certificates import SubSuperCertificate, choose_constants
from .errors import (EXIT_CERTIFICATION, EXIT_INPUT, EXIT_OK, EXIT_SOLVER,
                     CertificationError, ConvergenceError, InputError)
from .grid import BallGrid, build_grid
from .hjb import extract_policy, transform_to_z
from .model import ProblemInstance, validate
from .schemas import (CertificateDoc, CertifyResponse, CheckDoc,
                      PolicyEstimateDoc, SolveResponse, SweepResponse,
                      SweepRow, VerifyResponse)
from .solver import monotone_iterate

#: Default nodes per axis by dimension: desk-scale runtimes.
DEFAULT_GRID = {1: 129, 2: 65, 3: 33}

SWEEPABLE = ("a1", "a2", "alpha1", "alpha2", "sigma1", "sigma2", "R")


def default_grid_nodes(n_dim: int) -> int:
    return DEFAULT_GRID[n_dim]


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(repr(v) if isinstance(v, float) else str(v)
                           for v in row) + "\n")
    return buf.getvalue()


def _cert_doc(cert: SubSuperCertificate) -> CertificateDoc:
    return CertificateDoc(**cert.to_dict())


# ---------------------------------------------------------------------------
# certify

def run_certify(instance: ProblemInstance) -> CertifyResponse:
    """Validate, then select and certify the iteration constants.

    Report-style: validation and certification failures come back in the
    response (exit codes 2 / 3), not as exceptions.
    """
    report = validate(instance)
    if not report.valid:
        return CertifyResponse(
            exit_code=EXIT_INPUT, valid=False,
            violations=list(report.violations),
            artifacts={"certificate.json": _json_text(
                {"valid": False, "violations": list(report.violations)})})
    try:
        cert = choose_constants(instance)
    except CertificationError as exc:
        return CertifyResponse(
            exit_code=EXIT_CERTIFICATION, valid=False,
            error=f"{exc} (violated inequality index {exc.violated_index})",
            artifacts={"certificate.json": _json_text(
                {"valid": False, "error": str(exc),
                 "violated_index": exc.violated_index})})
    payload = {"valid": True, **cert.to_dict()}
    return CertifyResponse(
        exit_code=EXIT_OK, valid=True, certificate=_cert_doc(cert),
        artifacts={"certificate.json": _json_text(payload)})


# ---------------------------------------------------------------------------
# solve

def _solve_once(instance: ProblemInstance, grid_nodes: int, tol: float,
                max_iter: int):
    """(cert, grid, u1, u2, values, trace, converged)."""
    cert = choose_constants(instance)
    grid = build_grid(instance, grid_nodes)
    try:
        u1, u2, trace = monotone_iterate(instance, cert, grid, tol=tol,
                                         max_iter=max_iter)
        converged = True
    except ConvergenceError as exc:
        trace = exc.trace
        raise
    values = transform_to_z(u1, u2, instance)
    return cert, grid, u1, u2, values, trace, converged


def _fields_csv(grid: BallGrid, u1, u2, values) -> str:
    pts = grid.points()
    header = [f"x{i + 1}" for i in range(grid.n_dim)] + ["u1", "u2", "z1", "z2"]
    rows = []
    for i in range(pts.shape[0]):
        rows.append([*(float(c) for c in pts[i]),
                     float(u1.values[i]), float(u2.values[i]),
                     float(values.z1.values[i]), float(values.z2.values[i])])
    return _csv_text(header, rows)


def _solve_meta(instance, cert, grid, trace, tol, z_y0) -> dict:
    return {
        "grid": {"n_dim": grid.n_dim, "radius": grid.radius,
                 "nodes_per_axis": grid.nodes_per_axis, "h": grid.h,
                 "n_interior": grid.n_interior},
        "tol": tol,
        "iterations": trace.iterations,
        "converged": trace.converged,
        "final_update": trace.max_update[-1] if trace.max_update else None,
        "final_residual": trace.residual[-1] if trace.residual else None,
        "min_ordering_slack": (min(trace.min_ordering_slack)
                               if trace.min_ordering_slack else None),
        "residual_history": trace.residual,
        "update_history": trace.max_update,
        "ordering_slack_history": trace.min_ordering_slack,
        "certificate": cert.to_dict(),
        "z_at_y0": z_y0,
    }


def run_solve(instance: ProblemInstance, grid: int | None = None,
              tol: float = 1e-9, max_iter: int = 10000) -> SolveResponse:
    """Certify, solve the transformed system, and emit field dumps.

    Raises :class:`InputError` for invalid instances or grids.  On
    non-convergence the trace is still rendered and the response carries
    exit code 4.
    """
    report = validate(instance)
    if not report.valid:
        raise InputError("invalid instance: " + "; ".join(report.violations))
    grid_nodes = grid if grid is not None else default_grid_nodes(instance.n_dim)
    try:
        cert, ball, u1, u2, values, trace, converged = _solve_once(
            instance, grid_nodes, tol, max_iter)
    except ConvergenceError as exc:
        cert = choose_constants(instance)
        meta = {
            "converged": False, "error": str(exc), "tol": tol,
            "certificate": cert.to_dict(),
            "trace": exc.trace.to_dict() if exc.trace else None,
        }
        return SolveResponse(
            exit_code=EXIT_SOLVER, converged=False,
            iterations=exc.trace.iterations if exc.trace else max_iter,
            grid_nodes_per_axis=grid_nodes, n_interior=0, tol=tol,
            final_update=float("nan"), final_residual=float("nan"),
            min_ordering_slack=float("nan"), z_at_y0=[],
            certificate=_cert_doc(cert),
            artifacts={"solve_meta.json": _json_text(meta)})
    y0 = instance.y0_array()
    z_y0 = [values.z_at(y0, 1), values.z_at(y0, 2)]
    meta = _solve_meta(instance, cert, ball, trace, tol, z_y0)
    return SolveResponse(
        exit_code=EXIT_OK, converged=converged, iterations=trace.iterations,
        grid_nodes_per_axis=grid_nodes, n_interior=ball.n_interior, tol=tol,
        final_update=trace.max_update[-1],
        final_residual=trace.residual[-1],
        min_ordering_slack=min(trace.min_ordering_slack),
        z_at_y0=z_y0, certificate=_cert_doc(cert),
        artifacts={
            "fields.csv": _fields_csv(ball, u1, u2, values),
            "solve_meta.json": _json_text(meta),
        })


# ---------------------------------------------------------------------------
# verify

def _paths_csv(records, n_dim: int) -> str:
    header = (["path", "t", "regime"] + [f"y{i + 1}" for i in range(n_dim)]
              + ["discount", "cost"])
    rows = []
    for rec in records:
        for r in rec.rows:
            rows.append([rec.path_index, float(r[0]), int(r[1]),
                         *(float(v) for v in r[2:2 + n_dim]),
                         float(r[2 + n_dim]), float(r[3 + n_dim])])
    return _csv_text(header, rows)


def run_verify(instance: ProblemInstance, grid: int | None = None,
               tol: float = 1e-9, max_iter: int = 10000,
               paths: int = 200_000, dt: float | None = None, seed: int = 42,
               record_paths: int = 100) -> VerifyResponse:
    """Solve, extract the policy, and run the optimality experiment.

    The value-function discretization error at y0 enters the band via a
    Richardson estimate from one solve on the half-spacing grid.
    """
    report = validate(instance)
    if not report.valid:
        raise InputError("invalid instance: " + "; ".join(report.violations))
    grid_nodes = grid if grid is not None else default_grid_nodes(instance.n_dim)
    cert, ball, u1, u2, values, trace, _ = _solve_once(
        instance, grid_nodes, tol, max_iter)
    fine_nodes = 2 * (grid_nodes - 1) + 1
    _, _, _, _, values_fine, _, _ = _solve_once(
        instance, fine_nodes, tol, max_iter)
    y0 = instance.y0_array()
    z_coarse = values.z_at(y0, instance.eps0)
    z_fine = values_fine.z_at(y0, instance.eps0)
    pde_error = (4.0 / 3.0) * abs(z_coarse - z_fine)
    policy = extract_policy(values)
    config = sim.SimConfig.for_instance(instance, n_paths=paths, dt=dt,
                                        seed=seed)
    report_mc = sim.verify_optimality(
        instance, values, policy, sim.default_challengers(policy), config,
        pde_error=pde_error, record_paths=record_paths)
    payload = report_mc.to_dict()
    payload.update({
        "pde_error_estimate": pde_error,
        "dt": config.dt,
        "seed": seed,
        "n_paths": paths,
        "grid_nodes_per_axis": grid_nodes,
    })
    artifacts = {
        "report.json": _json_text(payload),
        "fields.csv": _fields_csv(ball, u1, u2, values),
        "solve_meta.json": _json_text(_solve_meta(
            instance, cert, ball, trace, tol,
            [values.z_at(y0, 1), values.z_at(y0, 2)])),
    }
    if record_paths > 0:
        artifacts["paths_sample.csv"] = _paths_csv(report_mc.records,
                                                   instance.n_dim)
    return VerifyResponse(
        exit_code=EXIT_OK if report_mc.passed else 1,
        passed=report_mc.passed,
        reference_regime=report_mc.reference_regime,
        reference_value=report_mc.reference_value,
        disc_margin=report_mc.disc_margin,
        disc_margin_parts=report_mc.disc_margin_parts,
        pde_error_estimate=pde_error,
        dt=config.dt, seed=seed,
        policies={k: PolicyEstimateDoc(**v.to_dict())
                  for k, v in report_mc.estimates.items()},
        checks=[CheckDoc(**c.to_dict()) for c in report_mc.checks],
        artifacts=artifacts)


# ---------------------------------------------------------------------------
# sweep

def _with_param(instance: ProblemInstance, name: str, value: float) -> ProblemInstance:
    r = instance.regimes
    kw = dict(n=instance.n_dim, radius=instance.radius, a1=r.a1, a2=r.a2,
              alpha1=r.alpha1, alpha2=r.alpha2, sigma1=r.sigma1,
              sigma2=r.sigma2)
    if name == "R":
        kw["radius"] = value
    else:
        kw[name] = value
    from .model import make_instance
    return make_instance(f1=instance.f1, f2=instance.f2, y0=instance.y0,
                         eps0=instance.eps0, **kw)


def run_sweep(instance: ProblemInstance, param: str, values: list[float],
              grid: int | None = None, tol: float = 1e-9,
              max_iter: int = 10000, paths: int = 200_000,
              dt: float | None = None, seed: int = 42) -> SweepResponse:
    """One pipeline run per parameter value; per-row failures don't stop the sweep."""
    if param not in SWEEPABLE:
        raise InputError(f"unknown sweep parameter {param!r}; "
                         f"choose one of {', '.join(SWEEPABLE)}")
    if not values:
        raise InputError("sweep needs at least one value")
    rows = []
    for v in values:
        inst_v = _with_param(instance, param, float(v))
        report = validate(inst_v)
        if not report.valid:
            rows.append(SweepRow(param=param, value=float(v), status="invalid",
                                 message="; ".join(report.violations)))
            continue
        try:
            cert, ball, u1, u2, vals, trace, _ = _solve_once(
                inst_v, grid if grid is not None
                else default_grid_nodes(inst_v.n_dim), tol, max_iter)
            policy = extract_policy(vals)
            config = sim.SimConfig.for_instance(inst_v, n_paths=paths, dt=dt,
                                                seed=seed)
            est, _ = sim.simulate_cost(inst_v, policy, config)
            y0 = inst_v.y0_array()
            rows.append(SweepRow(
                param=param, value=float(v), status="ok",
                z1_y0=vals.z_at(y0, 1), z2_y0=vals.z_at(y0, 2),
                j_hat=est.mean, j_stderr=est.stderr,
                ineq_margins=list(cert.ineq_margins)))
        except Exception as exc:  # per-row failure, sweep continues
            rows.append(SweepRow(param=param, value=float(v), status="error",
                                 message=str(exc)))
    header = ["param", "value", "status", "message", "z1_y0", "z2_y0",
              "j_hat", "j_stderr", "margin1", "margin2", "margin3", "margin4"]
    csv_rows = []
    for row in rows:
        margins = row.ineq_margins or [None] * 4
        csv_rows.append([
            row.param, row.value, row.status,
            row.message.replace(",", ";").replace("\n", " "),
            *("" if x is None else x
              for x in (row.z1_y0, row.z2_y0, row.j_hat, row.j_stderr)),
            *("" if m is None else m for m in margins)])
    return SweepResponse(
        exit_code=EXIT_OK,
        rows=rows,
        artifacts={"sweep.csv": _csv_text(header, csv_rows)})
