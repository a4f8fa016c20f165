import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from fracd2d import capacity, experiments
from fracd2d.errors import ParameterError, SchemaError


SMALL_CONFIG = """
# toy sweep
n=64
n=128
gamma=2.5
epsilon=2.5
rule=uniform
rule=powerlaw
beta=2.5
level_policy=direct
trials=200
seed=1
seed=2
"""


def test_parse_config_lists_and_scalars():
    cfg = experiments.parse_config(SMALL_CONFIG)
    assert cfg.n_values == [64, 128]
    assert cfg.rules == ["uniform", "powerlaw"]
    assert cfg.betas == [2.5]
    assert cfg.seeds == [1, 2]
    assert cfg.trials == 200
    assert cfg.gamma == 2.5


def test_parse_config_rejects_unknown_key():
    with pytest.raises(SchemaError):
        experiments.parse_config("bogus=1")


def test_parse_config_rejects_duplicate_scalar():
    with pytest.raises(SchemaError):
        experiments.parse_config("gamma=2.5\ngamma=2.6")


def test_parse_config_rejects_bad_line():
    with pytest.raises(SchemaError):
        experiments.parse_config("just words")


def test_points_enumeration_count():
    cfg = experiments.parse_config(SMALL_CONFIG)
    pts = list(cfg.points())
    # 2 n * 1 eps * (uniform + 1 beta) * 1 policy * 2 seeds
    assert len(pts) == 8
    ids = [p.experiment_id for p in pts]
    assert len(set(ids)) == len(ids)


def test_single_point_sweep(tmp_path):
    cfg = experiments.parse_config(
        "n=64\ngamma=2.5\nepsilon=2.5\nrule=uniform\nlevel_policy=direct\n"
        "trials=10\nseed=3")
    out = tmp_path / "one.csv"
    records = experiments.run_sweep(cfg, out_path=str(out))
    assert len(records) == 1
    assert records[0]["trials"] == 10
    assert records[0]["beta"] == experiments.UNIFORM_BETA_SENTINEL
    parsed = experiments.read_csv(str(out))
    assert len(parsed) == 1
    assert parsed[0]["n"] == 64


def test_sweep_deterministic_bytes(tmp_path):
    cfg = experiments.parse_config(SMALL_CONFIG)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    experiments.run_sweep(cfg, out_path=str(a))
    experiments.run_sweep(cfg, out_path=str(b))

    def stripped(p):
        return [l.rsplit(",", 1)[0] for l in open(p).read().splitlines()]

    assert stripped(a) == stripped(b)


def test_sweep_threads_match_serial(tmp_path):
    cfg = experiments.parse_config(SMALL_CONFIG)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    experiments.run_sweep(cfg, out_path=str(a), threads=1)
    experiments.run_sweep(cfg, out_path=str(b), threads=3)

    def stripped(p):
        return [l.rsplit(",", 1)[0] for l in open(p).read().splitlines()]

    assert stripped(a) == stripped(b)


def test_sweep_unwritable_path_fails_fast(tmp_path):
    cfg = experiments.parse_config(SMALL_CONFIG)
    with pytest.raises(OSError):
        experiments.run_sweep(cfg, out_path=str(tmp_path / "nodir" / "x.csv"))


def test_json_mode(tmp_path):
    cfg = experiments.parse_config(
        "n=64\ngamma=2.5\nepsilon=2.5\nrule=uniform\nlevel_policy=direct\n"
        "trials=10\nseed=3")
    out = tmp_path / "one.ndjson"
    experiments.run_sweep(cfg, out_path=str(out), json_mode=True)
    lines = open(out).read().splitlines()
    rec = json.loads(lines[0])
    assert rec["schema"] == 1
    assert rec["n"] == 64


def test_record_rejects_non_finite():
    with pytest.raises(SchemaError):
        experiments._check_record({c: (math.inf if c == "mean_hops" else 1.0)
                                   for c in experiments.COLUMNS})


def test_read_csv_schema_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("not a schema line\nx,y\n")
    with pytest.raises(SchemaError):
        experiments.read_csv(str(bad))


def test_capacity_column_consistency(tmp_path):
    cfg = experiments.parse_config(
        "n=128\ngamma=2.5\nepsilon=2.5\nrule=uniform\nlevel_policy=direct\n"
        "trials=500\nseed=1")
    records = experiments.run_sweep(cfg, out_path=str(tmp_path / "c.csv"))
    assert records_capacity_consistent(records)


def records_capacity_consistent(records):
    return all(
        abs(r["capacity_estimate"] - 1.0 / (math.log(r["n"]) * r["mean_hops"]))
        <= 1e-12 * abs(r["capacity_estimate"])
        for r in records if r["mean_hops"] > 0)


def test_mutated_capacity_formula_is_caught(tmp_path, monkeypatch):
    # tampering with the rate map must break the consistency check the
    # acceptance suite enforces
    monkeypatch.setattr(capacity, "capacity_from_hops", lambda h, n: 0.123)
    cfg = experiments.parse_config(
        "n=128\ngamma=2.5\nepsilon=2.5\nrule=uniform\nlevel_policy=direct\n"
        "trials=500\nseed=1")
    records = experiments.run_sweep(cfg, out_path=str(tmp_path / "m.csv"))
    assert not records_capacity_consistent(records)


def test_hierarchical_point(tmp_path):
    cfg = experiments.parse_config(
        "n=256\ngamma=2.5\nepsilon=2.5\nrule=uniform\nlevel_policy=hierarchical\n"
        "trials=2000\nseed=1")
    records = experiments.run_sweep(cfg, out_path=str(tmp_path / "h.csv"))
    assert records[0]["l_max"] >= 2
    assert records[0]["mean_hops"] > 0


def _run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "fracd2d.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


def test_cli_gen_and_fractality(tmp_path):
    out = tmp_path / "g.txt"
    res = _run_cli(["gen", "--n", "200", "--gamma", "2.5", "--epsilon", "2.5",
                    "--seed", "3", "--out", str(out)], tmp_path)
    assert res.returncode == 0, res.stderr
    assert out.read_text().startswith("# n=200")
    rep = tmp_path / "rep.json"
    res = _run_cli(["fractality", "--graph", str(out), "--lb", "1,2,3",
                    "--out", str(rep)], tmp_path)
    assert res.returncode == 0, res.stderr
    payload = json.loads(rep.read_text())
    assert payload["n"] == 200
    assert len(payload["box_counts"]) == 3


def test_cli_sweep_with_config(tmp_path):
    cfgfile = tmp_path / "cfg.txt"
    cfgfile.write_text("n=64\ngamma=2.5\nepsilon=2.5\nrule=uniform\n"
                       "level_policy=direct\ntrials=50\nseed=1\n")
    out = tmp_path / "s.csv"
    res = _run_cli(["sweep", "--config", str(cfgfile), "--out", str(out)], tmp_path)
    assert res.returncode == 0, res.stderr
    assert open(out).readline().strip() == "# schema=1"


def test_cli_seed_override(tmp_path):
    cfgfile = tmp_path / "cfg.txt"
    cfgfile.write_text("n=64\ngamma=2.5\nepsilon=2.5\nrule=uniform\n"
                       "level_policy=direct\ntrials=50\nseed=1\nseed=2\n")
    out = tmp_path / "s.csv"
    res = _run_cli(["sweep", "--config", str(cfgfile), "--out", str(out),
                    "--seed", "7"], tmp_path)
    assert res.returncode == 0, res.stderr
    rows = experiments.read_csv(str(out))
    assert len(rows) == 1 and rows[0]["seed"] == 7


def test_cli_verify_subset(tmp_path):
    res = _run_cli(["verify", "--only", "A7"], tmp_path)
    assert res.returncode == 0, res.stdout + res.stderr
    assert "[PASS] A7" in res.stdout


def test_cli_verify_empty_selection(tmp_path):
    res = _run_cli(["verify", "--only", ","], tmp_path)
    assert res.returncode == 2
    assert "no tests selected" in res.stderr


def test_cli_verify_unknown_id(tmp_path):
    res = _run_cli(["verify", "--only", "A99"], tmp_path)
    assert res.returncode == 2
