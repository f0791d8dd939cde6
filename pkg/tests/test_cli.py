"""Command line surface: exit codes, determinism, schema validation."""
from __future__ import annotations

import json
import subprocess

import pytest

from leftschemes import load_window
from leftschemes.cli import main


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    p = tmp_path_factory.mktemp("cli") / "heis2.json"
    assert main(["build", "--group", "heisenberg", "--n-max", "2",
                 "-o", str(p)]) == 0
    return p


def test_build_is_deterministic(built, tmp_path):
    again = tmp_path / "again.json"
    assert main(["build", "--group", "heisenberg", "--n-max", "2",
                 "-o", str(again)]) == 0
    assert built.read_bytes() == again.read_bytes()
    obj = json.loads(built.read_text())
    assert obj["group"]["kind"] == "heisenberg"
    assert len(obj["sets"]) == 2


def test_build_without_group_is_config_error(capsys):
    assert main(["build"]) == 2
    assert "error:" in capsys.readouterr().err


def test_build_refuses_abelian(capsys):
    assert main(["build", "--group", "zd"]) == 2
    err = capsys.readouterr().err
    assert "refusing" in err and "zd" in err


def test_build_config_schema(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    _write(cfg, {"group": {"name": "heisenberg", "n_max": 2}, "bogus_key": 1})
    assert main(["build", "--config", str(cfg)]) == 2
    assert "bogus_key" in capsys.readouterr().err
    _write(cfg, {"group": {"name": "heisenberg", "n_max": 99}})
    assert main(["build", "--config", str(cfg)]) == 2
    assert "99" in capsys.readouterr().err
    out = tmp_path / "w.json"
    _write(cfg, {"group": {"name": "heisenberg", "n_max": 2}, "out": str(out)})
    assert main(["build", "--config", str(cfg)]) == 0
    assert out.exists()


def test_verify_green_and_csv(built, tmp_path):
    rep_path = tmp_path / "rep.json"
    csv_path = tmp_path / "phi.csv"
    code = main(["verify", str(built), "--shift-bound", "4",
                 "--emit-csv", str(csv_path), "-o", str(rep_path)])
    assert code == 0
    rep = json.loads(rep_path.read_text())
    assert rep["passed"] is True
    header = csv_path.read_text().splitlines()[0]
    assert "k" in header.split(",")


def test_verify_jobs_byte_identical(built, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", str(built), "--jobs", "1", "-o", str(a)]) == 0
    assert main(["verify", str(built), "--jobs", "3", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_flags_corruption(built, tmp_path):
    obj = json.loads(built.read_text())
    obj["sets"][1] = obj["sets"][1][:-1]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    rep_path = tmp_path / "rep.json"
    assert main(["verify", str(bad), "-o", str(rep_path)]) == 1
    rep = json.loads(rep_path.read_text())
    assert rep["passed"] is False
    failed = [r for r in rep["rows"] if r["passed"] is False]
    assert failed


def test_verify_missing_file_is_config_error(capsys):
    assert main(["verify", "/nonexistent/window.json"]) == 2
    assert "error:" in capsys.readouterr().err


def test_rearrange_cli(built, tmp_path):
    out = tmp_path / "re.json"
    report = tmp_path / "chk.json"
    assert main(["rearrange", str(built), "--report", str(report),
                 "-o", str(out)]) == 0
    w = load_window(json.loads(out.read_text()))
    assert w.params["leftsch_verified"] is True
    chk = json.loads(report.read_text())
    assert chk["passed"] is True


def test_phi_cli(built, tmp_path):
    out = tmp_path / "phi.json"
    assert main(["phi", str(built), "--max-power", "4", "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    rows = rep["series"]["phi_power"]
    assert [r["k"] for r in rows] == [0, 1, 2, 3, 4]
    for r in rows:
        assert r["phi"] == r["formula"]


def test_cocycle_cli(built, tmp_path):
    out = tmp_path / "coc.json"
    assert main(["cocycle", str(built), "-o", str(out)]) == 0
    assert json.loads(out.read_text())["passed"] is True


def test_bernoulli_cli(built, tmp_path):
    out = tmp_path / "bern.json"
    csv_path = tmp_path / "exp.csv"
    assert main(["bernoulli", str(built), "--eps", "1/7", "--samples", "2",
                 "--k-powers", "32", "64", "--emit-csv", str(csv_path),
                 "-o", str(out)]) == 0
    assert json.loads(out.read_text())["passed"] is True
    assert csv_path.read_text().startswith("K,")


def test_bernoulli_eps_band_failure(built, tmp_path):
    out = tmp_path / "bern.json"
    assert main(["bernoulli", str(built), "--eps", "1/5",
                 "-o", str(out)]) == 1
    rep = json.loads(out.read_text())
    assert rep["passed"] is False and "eps" in rep["error"]


def test_bernoulli_malformed_eps(built, capsys):
    assert main(["bernoulli", str(built), "--eps", "abc"]) == 2
    assert "bad eps" in capsys.readouterr().err


def test_snf_cli_single_matrix(tmp_path, capsys):
    out = tmp_path / "snf.json"
    assert main(["snf", "--matrix", "[[2,4],[6,8]]", "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert "diag [2, 4]" in rep["rows"][0]["lhs"]
    assert main(["snf", "--matrix", "[[1,\"a\"]]"]) == 2
    assert "rectangular" in capsys.readouterr().err


def test_snf_cli_random_batch(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["snf", "--count", "8", "--seed", "5", "-o", str(a)]) == 0
    assert main(["snf", "--count", "8", "--seed", "5", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(json.loads(a.read_text())["rows"]) == 8


def test_lift_cli(built, tmp_path):
    ext = tmp_path / "ext.json"
    _write(ext, {"Q": {"kind": "heisenberg"},
                 "N": {"kind": "cyclic", "params": {"m": 2}}})
    out = tmp_path / "lift.json"
    out_scheme = tmp_path / "lifted.json"
    assert main(["lift", str(built), "--extension", str(ext),
                 "--out-scheme", str(out_scheme), "-o", str(out)]) == 0
    assert json.loads(out.read_text())["passed"] is True
    lifted = load_window(json.loads(out_scheme.read_text()))
    assert lifted.params["K_sizes"] == [2, 2]


def test_pipeline_cli_deterministic(tmp_path):
    cfg = tmp_path / "run.json"
    _write(cfg, {"group": {"name": "heisenberg", "n_max": 2},
                 "shift_bound": 4, "eps": "1/7", "k_powers": [32, 64],
                 "cylinder_samples": 2, "seed": 1})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    ca, cb = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["pipeline", str(cfg), "-o", str(a),
                 "--emit-csv", str(ca)]) == 0
    assert main(["pipeline", str(cfg), "-o", str(b),
                 "--emit-csv", str(cb)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert ca.read_bytes() == cb.read_bytes()
    obj = json.loads(a.read_text())
    assert obj["passed"] is True
    assert [s["stage"] for s in obj["stages"]] == [
        "build", "rearrange", "cocycle", "bernoulli"]


def test_pipeline_dihedral_contrast(tmp_path):
    cfg = tmp_path / "run.json"
    _write(cfg, {"group": {"name": "dihedral"}, "dihedral_m_max": 50,
                 "dihedral_sets": 5, "seed": 3})
    out = tmp_path / "out.json"
    assert main(["pipeline", str(cfg), "-o", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["passed"] is True
    assert {s["stage"] for s in obj["stages"]} >= {"contrast", "no-scheme"}


def test_pipeline_refusal_config_error(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    _write(cfg, {"group": {"name": "zd", "d": 2}})
    assert main(["pipeline", str(cfg)]) == 2
    assert "refusing" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    out = tmp_path / "w.json"
    proc = subprocess.run(
        ["leftschemes", "build", "--group", "heisenberg", "--n-max", "1",
         "-o", str(out)],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    obj = json.loads(out.read_text())
    assert len(obj["sets"]) == 1
