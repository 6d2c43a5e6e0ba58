import copy

import pytest
from fastapi.testclient import TestClient

from regimeplan.service import app

client = TestClient(app)


def test_healthz():
    r = client.get("/healthz")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_certify_endpoint(inst_a_doc):
    r = client.post("/certify", json={"instance": inst_a_doc})
    assert r.status_code == 200
    body = r.json()
    assert body["valid"] and body["exit_code"] == 0
    cert = body["certificate"]
    assert cert["k1"] < 0 and cert["k2"] < 0
    assert min(cert["ineq_margins"]) >= 0
    assert "certificate.json" in body["artifacts"]


def test_certify_reports_violations(inst_a_doc):
    bad = copy.deepcopy(inst_a_doc)
    bad["a1"] = 0.0
    r = client.post("/certify", json={"instance": bad})
    assert r.status_code == 200
    body = r.json()
    assert not body["valid"] and body["exit_code"] == 2
    assert any("a1 > 0 violated" in v for v in body["violations"])


def test_schema_violation_is_422(inst_a_doc):
    bad = copy.deepcopy(inst_a_doc)
    del bad["radius"]
    r = client.post("/certify", json={"instance": bad})
    assert r.status_code == 422
    assert any(e["loc"][-1] == "radius" for e in r.json()["detail"])


def test_solve_endpoint(inst_a_doc):
    r = client.post("/solve", json={"instance": inst_a_doc,
                                    "options": {"grid": 65, "tol": 1e-9}})
    assert r.status_code == 200
    body = r.json()
    assert body["converged"] and body["exit_code"] == 0
    assert body["n_interior"] == 63
    assert body["min_ordering_slack"] >= -1e-12
    lines = body["artifacts"]["fields.csv"].strip().split("\n")
    assert lines[0] == "x1,u1,u2,z1,z2"
    assert len(lines) == 1 + 63
    assert "solve_meta.json" in body["artifacts"]


def test_solve_rejects_small_grid(inst_a_doc):
    r = client.post("/solve", json={"instance": inst_a_doc,
                                    "options": {"grid": 8}})
    assert r.status_code == 400
    assert r.json()["exit_code"] == 2


def test_verify_endpoint(inst_a_doc):
    r = client.post("/verify", json={
        "instance": inst_a_doc,
        "options": {"paths": 2000, "seed": 4, "record_paths": 3}})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] and body["exit_code"] == 0
    assert set(body["policies"]) == {"optimal", "zero", "scaled_0.5",
                                     "scaled_1.5", "regime_swapped"}
    assert body["reference_regime"] == 1
    assert body["disc_margin"] > 0
    assert len(body["checks"]) == 5
    assert "report.json" in body["artifacts"]
    assert "paths_sample.csv" in body["artifacts"]
    header = body["artifacts"]["paths_sample.csv"].split("\n", 1)[0]
    assert header == "path,t,regime,y1,discount,cost"


def test_sweep_endpoint(inst_a_doc):
    r = client.post("/sweep", json={
        "instance": inst_a_doc,
        "options": {"param": "a1", "values": [0.5, 1.0], "paths": 400,
                    "grid": 33}})
    assert r.status_code == 200
    body = r.json()
    assert [row["status"] for row in body["rows"]] == ["ok", "ok"]
    lines = body["artifacts"]["sweep.csv"].strip().split("\n")
    assert len(lines) == 3


def test_sweep_invalid_value_continues(inst_a_doc):
    r = client.post("/sweep", json={
        "instance": inst_a_doc,
        "options": {"param": "sigma1", "values": [0.0, 0.5], "paths": 200,
                    "grid": 33}})
    assert r.status_code == 200
    rows = r.json()["rows"]
    assert rows[0]["status"] == "invalid"
    assert "sigma1" in rows[0]["message"]
    assert rows[1]["status"] == "ok"


def test_sweep_unknown_param(inst_a_doc):
    r = client.post("/sweep", json={
        "instance": inst_a_doc,
        "options": {"param": "gamma", "values": [1.0]}})
    assert r.status_code == 400
    assert r.json()["exit_code"] == 2


def test_pipeline_artifacts_are_reproducible(inst_a):
    from regimeplan import pipeline
    a = pipeline.run_solve(inst_a, grid=33, tol=1e-8)
    b = pipeline.run_solve(inst_a, grid=33, tol=1e-8)
    assert a.artifacts == b.artifacts
    va = pipeline.run_verify(inst_a, grid=33, paths=500, seed=12,
                             record_paths=2)
    vb = pipeline.run_verify(inst_a, grid=33, paths=500, seed=12,
                             record_paths=2)
    assert va.artifacts == vb.artifacts
    assert va.policies["optimal"].mean == vb.policies["optimal"].mean