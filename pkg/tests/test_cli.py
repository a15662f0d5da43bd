import csv
import json

import pytest

from borelpde.cli import RunConfig, build_parser, load_config, main, make_config

FAST = ["--nodes", "64", "--time-steps", "4"]


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_solve_writes_tables(tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--out", str(out)] + FAST) == 0
    for name in ("solution_borel.csv", "solution_physical.csv", "history.csv", "manifest.json"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "solve" and manifest["certified"]
    assert len(read_csv(out / "solution_borel.csv")) == 1 + 5 * 64


def test_solve_is_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["solve", "--out", str(tmp_path / d), "--format", "json"] + FAST) == 0
    for name in ("solution_borel.json", "solution_physical.json", "history.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    ma, mb = (json.loads((tmp_path / d / "manifest.json").read_text()) for d in ("a", "b"))
    ma["config"].pop("out"), mb["config"].pop("out")
    assert ma == mb


def test_invalid_sector_angle(tmp_path, capsys):
    assert main(["solve", "--phi", "0.6", "--out", str(tmp_path)]) == 1
    assert "invalid configuration" in capsys.readouterr().err


def test_divergent_run_exit_code(tmp_path):
    args = ["solve", "--T", "2", "--nu", "0.5", "--max-iter", "8", "--out", str(tmp_path)] + FAST
    assert main(args) == 2


def test_certify_sweep(tmp_path):
    assert main(["certify", "--out", str(tmp_path), "--example", "ex2"]) == 0
    rows = read_csv(tmp_path / "certificates.csv")
    assert len(rows) == 1 + 25
    assert rows[0][:2] == ["T", "nu"]
    assert len(read_csv(tmp_path / "thresholds.csv")) == 1 + 5


def test_certify_empty_range(tmp_path):
    assert main(["certify", "--sweep-T", "", "--out", str(tmp_path)]) == 1


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# test config\nexample = ex3\ndelta = 0.5\nnodes = 64  # coarse\n")
    assert load_config(cfg) == {"example": "ex3", "delta": 0.5, "nodes": 64}
    args = build_parser().parse_args(["solve", "--config", str(cfg), "--nodes", "128"])
    c = make_config(args)
    assert c.example == "ex3" and c.delta == 0.5 and c.nodes == 128
    cfg.write_text("colour = red\n")
    with pytest.raises(ValueError):
        load_config(cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(format="xml").validate()
    with pytest.raises(ValueError):
        RunConfig(nodes=8).validate()


def test_norms_command(tmp_path):
    assert main(["norms", "--n-pairs", "3", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "norms.csv")
    assert rows[0] == ["check", "worst_ratio"]
    assert all(float(r[1]) <= 1 for r in rows[1:])


def test_validate_command(tmp_path):
    assert main(["validate", "--out", str(tmp_path), "--nodes", "128", "--time-steps", "8"]) == 0
    rows = read_csv(tmp_path / "validation_checks.csv")
    assert all(r[-1] == "1" for r in rows[1:])
    assert (tmp_path / "similarity.csv").exists()
