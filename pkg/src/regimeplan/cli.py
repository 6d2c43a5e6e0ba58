"""Command-line front end: a thin client over the pipeline or a remote service.

Subcommands mirror the service endpoints (certify, solve, verify, sweep)
plus ``serve`` to start the HTTP service.  By default commands run the
pipeline in-process; with ``--server URL`` the same request is POSTed to a
running service and the returned artifacts are written locally, so both
modes produce identical files.  Every run writes exactly one
``manifest.json`` (the only output carrying timestamps) next to its outputs.

Exit codes: 0 success, 1 verification checks failed, 2 input/schema,
3 certification, 4 solver convergence, 5 simulation.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path

import pydantic

from .errors import EXIT_INPUT, EXIT_OK, RegimePlanError
from .schemas import (CertifyRequest, InstanceDoc, SolveOptions, SolveRequest,
                      SweepOptions, SweepRequest, VerifyOptions, VerifyRequest)

_VERSION = "regimeplan 0.1.0"


def load_instance_doc(path: str) -> InstanceDoc:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise _input_error(f"instance file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise _input_error(f"instance file is not valid JSON: {exc}")
    try:
        return InstanceDoc.model_validate(raw)
    except pydantic.ValidationError as exc:
        lines = [f"  {'.'.join(str(p) for p in e['loc'])}: {e['msg']}"
                 for e in exc.errors()]
        raise _input_error("instance schema violation:\n" + "\n".join(lines))


def _input_error(msg: str) -> RegimePlanError:
    err = RegimePlanError(msg)
    err.exit_code = EXIT_INPUT
    return err


def _write_outputs(out_dir: str, artifacts: dict, manifest: dict) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, content in artifacts.items():
        (out / name).write_text(content)
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _manifest(command: str, instance_file: str, options: dict,
              started: str) -> dict:
    return {
        "command": command,
        "instance_file": instance_file,
        "options": options,
        "version": _VERSION,
        "started": started,
        "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def _post(server: str, endpoint: str, request_model):
    import httpx

    resp = httpx.post(server.rstrip("/") + endpoint,
                      json=request_model.model_dump(by_alias=True),
                      timeout=3600.0)
    if resp.status_code == 422:
        raise _input_error(f"server rejected request schema: {resp.text}")
    if resp.status_code >= 400:
        try:
            payload = resp.json()
        except ValueError:
            payload = {}
        err = RegimePlanError(payload.get("detail", resp.text))
        err.exit_code = int(payload.get("exit_code", 1))
        raise err
    return resp.json()


def _run(endpoint: str, request_model, server: str | None, local_fn):
    """Call the pipeline in-process, or a remote service when configured."""
    if server:
        payload = _post(server, endpoint, request_model)
        return payload
    return local_fn().model_dump()


def cmd_certify(args) -> int:
    started = _now()
    doc = load_instance_doc(args.instance)
    req = CertifyRequest(instance=doc)
    from . import pipeline
    payload = _run("/certify", req, args.server,
                   lambda: pipeline.run_certify(doc.to_instance()))
    _write_outputs(args.out, payload["artifacts"],
                   _manifest("certify", args.instance, {}, started))
    if payload["valid"]:
        cert = payload["certificate"]
        print(f"certified: k1={cert['k1']:.6g} k2={cert['k2']:.6g} "
              f"lambda1={cert['lambda1']:.6g} lambda2={cert['lambda2']:.6g}")
        print("ineq margins:", " ".join(f"{m:.3e}" for m in cert["ineq_margins"]))
    else:
        for v in payload.get("violations", []):
            print(f"violation: {v}", file=sys.stderr)
        if payload.get("error"):
            print(f"error: {payload['error']}", file=sys.stderr)
    return payload["exit_code"]


def cmd_solve(args) -> int:
    started = _now()
    doc = load_instance_doc(args.instance)
    opts = SolveOptions(grid=args.grid, tol=args.tol, max_iter=args.max_iter)
    req = SolveRequest(instance=doc, options=opts)
    from . import pipeline
    payload = _run("/solve", req, args.server,
                   lambda: pipeline.run_solve(doc.to_instance(),
                                              grid=opts.grid, tol=opts.tol,
                                              max_iter=opts.max_iter))
    _write_outputs(args.out, payload["artifacts"],
                   _manifest("solve", args.instance,
                             opts.model_dump(), started))
    if payload["converged"]:
        z = payload["z_at_y0"]
        print(f"converged in {payload['iterations']} sweeps "
              f"(residual {payload['final_residual']:.3e})")
        print(f"z1(y0)={z[0]:.9g}  z2(y0)={z[1]:.9g}")
    else:
        print("solver did not converge; trace written", file=sys.stderr)
    return payload["exit_code"]


def cmd_verify(args) -> int:
    started = _now()
    doc = load_instance_doc(args.instance)
    opts = VerifyOptions(grid=args.grid, tol=args.tol, max_iter=args.max_iter,
                         paths=args.paths, dt=args.dt, seed=args.seed,
                         record_paths=args.record_paths)
    req = VerifyRequest(instance=doc, options=opts)
    from . import pipeline
    payload = _run("/verify", req, args.server,
                   lambda: pipeline.run_verify(doc.to_instance(),
                                               grid=opts.grid, tol=opts.tol,
                                               max_iter=opts.max_iter,
                                               paths=opts.paths, dt=opts.dt,
                                               seed=opts.seed,
                                               record_paths=opts.record_paths))
    _write_outputs(args.out, payload["artifacts"],
                   _manifest("verify", args.instance,
                             opts.model_dump(), started))
    opt = payload["policies"]["optimal"]
    print(f"z_{payload['reference_regime']}(y0) = "
          f"{payload['reference_value']:.9g}")
    print(f"J(p*) = {opt['mean']:.9g} +- {opt['stderr']:.3g} "
          f"(disc_margin {payload['disc_margin']:.3g})")
    for check in payload["checks"]:
        print(f"[{'PASS' if check['passed'] else 'FAIL'}] {check['name']}: "
              f"{check['detail']}")
    return payload["exit_code"]


def cmd_sweep(args) -> int:
    started = _now()
    doc = load_instance_doc(args.instance)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise _input_error(f"--values must be a comma list of numbers, "
                           f"got {args.values!r}")
    opts = SweepOptions(param=args.param, values=values, grid=args.grid,
                        tol=args.tol, max_iter=args.max_iter,
                        paths=args.paths, dt=args.dt, seed=args.seed)
    req = SweepRequest(instance=doc, options=opts)
    from . import pipeline
    payload = _run("/sweep", req, args.server,
                   lambda: pipeline.run_sweep(doc.to_instance(),
                                              param=opts.param,
                                              values=opts.values,
                                              grid=opts.grid, tol=opts.tol,
                                              max_iter=opts.max_iter,
                                              paths=opts.paths, dt=opts.dt,
                                              seed=opts.seed))
    _write_outputs(args.out, payload["artifacts"],
                   _manifest("sweep", args.instance, opts.model_dump(),
                             started))
    for row in payload["rows"]:
        if row["status"] == "ok":
            print(f"{row['param']}={row['value']:g}: z1(y0)={row['z1_y0']:.6g} "
                  f"z2(y0)={row['z2_y0']:.6g} J(p*)={row['j_hat']:.6g}")
        else:
            print(f"{row['param']}={row['value']:g}: {row['status']} "
                  f"({row['message']})", file=sys.stderr)
    return payload["exit_code"]


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regimeplan",
        description="Two-regime production planning: certify constants, "
                    "solve the value-function system, extract the policy, "
                    "and verify optimality by simulation.")
    parser.add_argument("--version", action="version", version=_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("instance", help="instance JSON file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--server", default=None,
                       help="URL of a running service; runs in-process if omitted")

    def solve_opts(p):
        p.add_argument("--grid", type=int, default=None,
                       help="nodes per axis (default 129/65/33 by dimension)")
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--max-iter", type=int, default=10000)

    p = sub.add_parser("certify", help="select and certify iteration constants")
    common(p)
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("solve", help="solve the transformed system")
    common(p)
    solve_opts(p)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("verify", help="Monte Carlo optimality verification")
    common(p)
    solve_opts(p)
    p.add_argument("--paths", type=int, default=200_000)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--record-paths", type=int, default=100)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("sweep", help="parameter sweep over the pipeline")
    common(p)
    solve_opts(p)
    p.add_argument("--param", required=True,
                   help="one of a1,a2,alpha1,alpha2,sigma1,sigma2,R")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--paths", type=int, default=200_000)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except RegimePlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
