import csv
import json

import numpy as np
import pytest

from pseudoconvexity import pipeline as P
from pseudoconvexity.cantor_bump import from_json as f_from_json
from pseudoconvexity.cli import main
from pseudoconvexity.config import PipelineConfig
from pseudoconvexity.errors import ConfigError, DomainError
from pseudoconvexity.verification import ClaimRecord, VerificationReport, sub_seed

SMALL = dict(mc_samples=20_000, domain_samples=20_000, psh_probes=100, grid=64,
             greedy_degree=6, z2_degree=4, inside_degree=6, outside_degree=6,
             holder_pairs=10_000, plateau_samples=90, witness_points=4, greedy_levels=2)


def small(tmp_path, **kw):
    return PipelineConfig(**{"seed": 5, "out_dir": str(tmp_path), **SMALL, **kw})


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


# -- library -----------------------------------------------------------------

def test_unknown_pipeline(tmp_path):
    with pytest.raises(ConfigError):
        P.run_pipeline(small(tmp_path), "make-coffee")


def test_construct_f_artifacts(tmp_path):
    rep = P.run_pipeline(small(tmp_path), "construct-f")
    assert [c.claim_id for c in rep.claims] == ["C1", "C2", "C3"]
    fn = f_from_json((tmp_path / "F.json").read_text())
    rows = read_csv(tmp_path / "F_profile.csv")
    assert rows[0] == ["x", "F", "dF", "d2F"]
    x, F = float(rows[1000][0]), float(rows[1000][1])
    assert F == fn.value(np.array([x]))[0]
    assert any(r[3] == "" for r in rows[1:]) and any(r[3] != "" for r in rows[1:])
    assert (tmp_path / "report.json").exists() and (tmp_path / "report.txt").exists()


def test_classify_artifacts(tmp_path):
    rep = P.run_pipeline(small(tmp_path), "classify-boundary")
    assert rep.claims[0].claim_id == "C4"
    rows = read_csv(tmp_path / "map.csv")
    assert rows[0] == ["x", "y", "laplacian", "class"]
    assert {r[3] for r in rows[1:]} <= {"PSC+", "PSC-", "IND"}
    summary = json.loads((tmp_path / "map_summary.json").read_text())
    assert sum(summary["counts"].values()) == len(rows) - 1
    assert summary["dense_at_coarse"] is True


def test_witness_trace(tmp_path):
    P.run_pipeline(small(tmp_path), "witness")
    tr = json.loads((tmp_path / "trace.json").read_text())
    assert len(tr["levels"]) <= 2
    for lv in tr["levels"]:
        assert {"z", "d", "M", "h_at_z", "target", "met"} <= set(lv)


def test_pipeline_is_deterministic(tmp_path):
    a = P.run_pipeline(small(tmp_path / "a"), "construct-f")
    b = P.run_pipeline(small(tmp_path / "b"), "construct-f")
    assert a.to_json() == b.to_json()
    assert (tmp_path / "a" / "F.json").read_bytes() == (tmp_path / "b" / "F.json").read_bytes()


def test_report_excludes_paths():
    r1 = VerificationReport(PipelineConfig(seed=1, out_dir="x"), [])
    r2 = VerificationReport(PipelineConfig(seed=1, out_dir="y", cache_dir="c"), [])
    assert r1.to_json() == r2.to_json()


def test_report_text_lists_notes():
    rec = ClaimRecord("C0", "demo", "fail", note="why")
    txt = VerificationReport(PipelineConfig(seed=1), [rec]).to_text()
    assert "[         FAIL] C0" in txt and "C0: why" in txt and "0/1" in txt


def test_sub_seeds_differ():
    assert len({sub_seed(0, i) for i in range(12)}) == 12
    assert sub_seed(0, 1) == sub_seed(0, 1) != sub_seed(1, 1)


def test_domain_specs():
    assert P.domain_from_spec("disc").name == "disc"
    assert P.domain_from_spec({"kind": "product"}).dim == 2
    assert P.domain_from_spec({"kind": "ball", "n": 3}).dim == 3
    with pytest.raises(DomainError):
        P.domain_from_spec({"kind": "torus"})
    with pytest.raises(DomainError):
        P.defining_from_spec({"kind": "hartogs", "variant": "D2"})
    np.testing.assert_array_equal(P.parse_complex_list("1+0.5i, -2j"), [1 + 0.5j, -2j])
    with pytest.raises(DomainError):
        P.parse_complex_list("one")


# -- command line -------------------------------------------------------------

def test_cli_requires_seed(capsys):
    assert main(["construct-f"]) == 2
    assert "seed" in capsys.readouterr().err


def test_cli_rejects_bad_range(tmp_path, capsys):
    assert main(["construct-f", "--seed", "1", "--eps", "1.5", "--out", str(tmp_path)]) == 2
    assert "ConfigError" in capsys.readouterr().err


def test_cli_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(small(tmp_path, seed=9).to_json())
    out = tmp_path / "m" / "map.csv"
    assert main(["classify-boundary", "--config", str(cfg), "--grid", "32", "--out", str(out)]) == 0
    assert out.exists() and (tmp_path / "m" / "map_summary.json").exists()
    assert json.loads((tmp_path / "m" / "map_summary.json").read_text())["grid"] == 32
    assert "C4" in capsys.readouterr().out


def test_cli_levi_probe_ball(capsys):
    assert main(["levi-probe", "--seed", "0", "--domain", "ball", "--point", "0.6,0.8j",
                 "--direction", "1,1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    levi = float(lines[0].split("=")[1])
    # adjusted direction (4i/3, 1) on the unit ball: Levi value |a|^2
    assert levi == pytest.approx(1 + (0.8 / 0.6) ** 2, rel=1e-12)
    assert "rho,residual,circle_mean" in lines


def test_cli_levi_probe_off_boundary(capsys):
    assert main(["levi-probe", "--seed", "0", "--domain", "ball", "--point", "0.5,0",
                 "--direction", "0,1"]) == 2


def test_cli_bergman_scan_disc(tmp_path, capsys):
    assert main(["bergman-scan", "--seed", "0", "--domain", "disc", "--path", "0:1",
                 "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "scan.csv")
    assert rows[0] == ["t", "estimate", "stderr", "method"] and rows[1][3] == "series"
    assert json.loads((tmp_path / "scan_verdict.json").read_text())["verdict"] == "Blowup"


def test_cli_bergman_scan_spec_file(tmp_path):
    spec = tmp_path / "d.json"
    spec.write_text(json.dumps({"kind": "disc", "R": 2.0}))
    assert main(["bergman-scan", "--seed", "0", "--domain", str(spec), "--path", "0:0.5",
                 "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "scan_verdict.json").read_text())["verdict"] == "Bounded"


def test_cli_witness_out_file(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(small(tmp_path, greedy_levels=1).to_json())
    target = tmp_path / "w" / "trace.json"
    assert main(["witness", "--config", str(cfg), "--boundary-point", "1.1+0.5j,0.1",
                 "--out", str(target)]) == 0
    assert json.loads(target.read_text())["levels"][0]["k"] == 1


def test_cli_strict_exit(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(small(tmp_path).to_json())
    assert main(["construct-f", "--config", str(cfg), "--strict"]) == 0
