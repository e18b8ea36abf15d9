import json

import pytest

from subgrouplab import cli

QUICK = {
    "approximate": {"group": "G_beta", "ns": [2, 4, 8], "eps": 0.02},
    "isolate": {"algebras": ["so3", "su2+su2", "R2", "u2", "so3+R"]},
    "mz-probe": {"H": {"kind": "cyclic", "n": 4, "conjugate": [0.2, 0.0, 0.1]}, "K": {"kind": "cyclic", "n": 4},
                 "budget": 400},
    "turing-gap": {"mesh": 0.1, "max_order": 12},
    "myers": {"algebra": "su2", "mesh": 0.1},
    "h2-table": {"cases": [{"F": "C2", "factors": [4], "action": {"1": [[-1]]}}, {"F": "K4", "factors": [2]}]},
    "minimal-classes": {"reps": ["Z4-rotation", "alpha", {"generator": [[-1]]}]},
    "example-3-1": {},
    "functorial-probe": {"cases": ["torus-projection"]},
}


def _run(tmp_path, cfg, *extra, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return cli.main(["--config", str(path), "--out", str(tmp_path / "out"), *extra])


def test_list_experiments(capsys):
    assert cli.main(["--list-experiments"]) == 0
    out = capsys.readouterr().out.split()
    assert all(name in out for name in cli.EXPERIMENTS)


@pytest.mark.parametrize("exp", list(QUICK))
def test_experiment_runs_and_is_reproducible(tmp_path, exp):
    cfg = {"experiment": exp, "params": QUICK[exp], "seed": 3}
    assert _run(tmp_path, cfg) == 0
    files = list((tmp_path / "out").iterdir())
    assert len(files) == 1
    first = files[0].read_bytes()
    assert _run(tmp_path, cfg) == 0
    assert files[0].read_bytes() == first
    text = first.decode()
    assert "config_sha256" in text and "seed" in text


def test_flat_params_and_results(tmp_path):
    assert _run(tmp_path, {"experiment": "example-3-1"}) == 0
    res = json.loads((tmp_path / "out" / "example-3-1.json").read_text())["result"]
    assert res["alpha_quotient_equals_beta"] and res["conjugator"] == [[1, 1], [0, 1]]
    assert res["center_components"] == {"G_alpha": [1, 2], "G_beta": [1, 1]}
    assert _run(tmp_path, {"experiment": "approximate", "group": "T", "ns": [2, 4], "eps": 0.01}) == 0
    lines = [l for l in (tmp_path / "out" / "approximate.csv").read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "index,n,estimate,error_bound" and len(lines) == 3


def test_seed_override_recorded(tmp_path):
    cfg = {"experiment": "isolate", "algebra": "so3"}
    assert _run(tmp_path, cfg, "--seed", "17") == 0
    prov = json.loads((tmp_path / "out" / "isolate.json").read_text())["provenance"]
    assert prov["seed"] == 17


def test_config_hash_changes_with_params(tmp_path):
    a = cli.load_config({"experiment": "isolate", "algebra": "so3"})
    b = cli.load_config({"experiment": "isolate", "algebra": "su2"})
    assert a.sha256 != b.sha256
    assert a.sha256 == cli.load_config({"params": {"algebra": "so3"}, "experiment": "isolate"}).sha256


@pytest.mark.parametrize("cfg", [{"experiment": "nope"}, {"params": {}},
                                 {"experiment": "approximate", "ns": [0]},
                                 {"experiment": "myers", "unknown": 1},
                                 {"experiment": "turing-gap", "seed": "x"}])
def test_schema_violations_exit_2(tmp_path, cfg):
    assert _run(tmp_path, cfg) == 2


def test_bad_json_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    assert cli.main(["--config", str(p)]) == 2


def test_failure_is_structured_exit_1(tmp_path):
    assert _run(tmp_path, {"experiment": "myers", "algebra": "R2"}) == 1
    rec = json.loads((tmp_path / "out" / "myers.error.json").read_text())
    assert rec["error"]["type"] == "LieAlgebraError" and "provenance" in rec


def test_env_sets_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "envout"))
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"experiment": "isolate"}))
    assert cli.main(["--config", str(p)]) == 0
    assert (tmp_path / "envout" / "isolate.json").exists()
