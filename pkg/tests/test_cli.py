import json
import shutil
from pathlib import Path

import pytest

from regimeplan.cli import main

INST_A = Path("instances/inst_a.json")


def write_variant(tmp_path, **overrides):
    doc = json.loads(INST_A.read_text())
    doc.update(overrides)
    p = tmp_path / "variant.json"
    p.write_text(json.dumps(doc))
    return str(p)


def test_certify_inst_a(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["certify", str(INST_A), "--out", str(out)])
    assert code == 0
    assert (out / "certificate.json").exists()
    assert (out / "manifest.json").exists()
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["valid"] and min(cert["ineq_margins"]) >= 0
    assert "certified" in capsys.readouterr().out


def test_certify_zero_rate_exits_2(tmp_path, capsys):
    path = write_variant(tmp_path, a1=0.0)
    code = main(["certify", path, "--out", str(tmp_path / "o")])
    assert code == 2
    assert "a1 > 0" in capsys.readouterr().err


def test_certify_zero_sigma_exits_2(tmp_path, capsys):
    path = write_variant(tmp_path, sigma1=0.0)
    code = main(["certify", path, "--out", str(tmp_path / "o")])
    assert code == 2
    assert "sigma1" in capsys.readouterr().err


def test_schema_error_names_field(tmp_path, capsys):
    doc = json.loads(INST_A.read_text())
    del doc["radius"]
    p = tmp_path / "broken.json"
    p.write_text(json.dumps(doc))
    code = main(["certify", str(p), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "radius" in capsys.readouterr().err


def test_solve_small_grid_exits_2(tmp_path, capsys):
    code = main(["solve", str(INST_A), "--grid", "8",
                 "--out", str(tmp_path / "o")])
    assert code == 2


def test_solve_writes_fields(tmp_path, capsys):
    out = tmp_path / "solve"
    code = main(["solve", str(INST_A), "--grid", "65",
                 "--out", str(out)])
    assert code == 0
    fields = (out / "fields.csv").read_text().strip().split("\n")
    assert fields[0] == "x1,u1,u2,z1,z2"
    assert len(fields) == 64
    meta = json.loads((out / "solve_meta.json").read_text())
    assert meta["converged"]
    assert meta["iterations"] <= 10_000
    stdout = capsys.readouterr().out
    assert "converged" in stdout and "z1(y0)" in stdout


def test_zero_cost_solve_yields_zero_values(tmp_path):
    doc = json.loads(INST_A.read_text())
    doc["f1"] = {"kind": "radial-quadratic", "m": 0.0}
    doc["f2"] = {"kind": "radial-quadratic", "m": 0.0}
    p = tmp_path / "zero.json"
    p.write_text(json.dumps(doc))
    out = tmp_path / "zsolve"
    code = main(["solve", str(p), "--grid", "65", "--out", str(out)])
    assert code == 0
    meta = json.loads((out / "solve_meta.json").read_text())
    assert max(abs(v) for v in meta["z_at_y0"]) <= 1e-8


def test_verify_deterministic_reports(tmp_path):
    out1 = tmp_path / "v1"
    out2 = tmp_path / "v2"
    args = ["verify", str(INST_A), "--paths", "1200", "--seed", "5",
            "--grid", "65", "--record-paths", "2"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    r1 = (out1 / "report.json").read_bytes()
    r2 = (out2 / "report.json").read_bytes()
    assert r1 == r2
    j1 = json.loads(r1)["policies"]["optimal"]["mean"]
    j2 = json.loads(r2)["policies"]["optimal"]["mean"]
    assert j1 == j2
    # manifests differ only in their timestamps
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    for key in ("started", "finished"):
        m1.pop(key)
        m2.pop(key)
    assert m1 == m2


def test_verify_rerun_from_manifest_settings(tmp_path):
    out1 = tmp_path / "m1"
    assert main(["verify", str(INST_A), "--paths", "800", "--seed", "9",
                 "--grid", "65", "--out", str(out1)]) == 0
    manifest = json.loads((out1 / "manifest.json").read_text())
    opts = manifest["options"]
    out2 = tmp_path / "m2"
    args = ["verify", manifest["instance_file"],
            "--paths", str(opts["paths"]), "--seed", str(opts["seed"]),
            "--grid", str(opts["grid"]), "--tol", str(opts["tol"]),
            "--record-paths", str(opts["record_paths"]),
            "--out", str(out2)]
    if opts["dt"] is not None:
        args += ["--dt", str(opts["dt"])]
    assert main(args) == 0
    for name in ("report.json", "fields.csv", "solve_meta.json",
                 "paths_sample.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_sweep_rows_and_unknown_param(tmp_path, capsys):
    out = tmp_path / "sweep"
    code = main(["sweep", str(INST_A), "--param", "a1",
                 "--values", "0.5,1,2", "--paths", "300", "--grid", "33",
                 "--out", str(out)])
    assert code == 0
    lines = (out / "sweep.csv").read_text().strip().split("\n")
    assert len(lines) == 4       # header + one row per value
    assert lines[0].startswith("param,value,status")
    code = main(["sweep", str(INST_A), "--param", "bogus", "--values", "1",
                 "--out", str(tmp_path / "s2")])
    assert code == 2


def test_sweep_radius_records_values(tmp_path):
    out = tmp_path / "rsweep"
    code = main(["sweep", str(INST_A), "--param", "R", "--values", "0.5,1.0",
                 "--paths", "300", "--grid", "33", "--out", str(out)])
    assert code == 0
    lines = (out / "sweep.csv").read_text().strip().split("\n")
    rows = [ln.split(",") for ln in lines[1:]]
    assert all(r[2] == "ok" for r in rows)
    z_small, z_big = float(rows[0][4]), float(rows[1][4])
    assert z_small > 0 and z_big > 0


def test_missing_instance_file(tmp_path, capsys):
    code = main(["certify", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "o")])
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_remote_mode_against_test_server(tmp_path, inst_a_doc, monkeypatch):
    # exercise the thin-client path by routing httpx through the ASGI app
    import httpx
    from fastapi.testclient import TestClient

    from regimeplan.service import app

    tc = TestClient(app)

    def fake_post(url, json=None, timeout=None):
        return tc.post(url.replace("http://svc", ""), json=json)

    monkeypatch.setattr(httpx, "post", fake_post)
    out = tmp_path / "remote"
    code = main(["certify", "instances/inst_a.json", "--server", "http://svc",
                 "--out", str(out)])
    assert code == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["valid"]