from __future__ import annotations

import json

import numpy as np
import pytest

from stabboot import dense
from stabboot.bruteforce import best_stabilizer
from stabboot.cli import main
from stabboot.experiments import ConfigError, ExperimentConfig, run_experiment
from stabboot.instances import KINDS, InstanceSpec, generate_instance, lower_bound_weight, stabilizer_dimension


@pytest.mark.parametrize("kind,params", [("noisy_stabilizer", {"p": 0.25}), ("lower_bound_family", {"tau": 0.4}),
                                         ("noisy_product", {"p": 0.2}), ("doped", {"t_count": 1}),
                                         ("subset_phase", {}), ("zeta", {}), ("random", {"rank": 2})])
def test_instances_are_valid_with_exact_optima(kind, params):
    n = 4 if kind != "zeta" else 2
    inst = generate_instance(InstanceSpec(kind, n, params, seed=3))
    assert np.isclose(np.trace(inst.rho.data).real, 1)
    if kind in ("noisy_stabilizer", "lower_bound_family", "subset_phase", "zeta", "random"):
        assert np.isclose(inst.optimum, best_stabilizer(inst.rho)[0])
    assert set(KINDS) >= {kind}


def test_noisy_stabilizer_optimum_value():
    inst = generate_instance(InstanceSpec("noisy_stabilizer", 4, {"p": 0.25}, 1))
    assert np.isclose(inst.optimum, 0.765625)


def test_doped_state_stabilizer_dimension():
    for seed in range(5):
        inst = generate_instance(InstanceSpec("doped", 4, {"t_count": 1}, seed))
        assert inst.planted["stabilizer_dimension"] >= 4 - 2
    assert stabilizer_dimension(np.eye(4)[0]) == 2


def test_lower_bound_weight():
    assert np.isclose(lower_bound_weight(3, 1.0), 1)
    assert np.isclose(lower_bound_weight(3, 1 / 8), 0)


def test_spec_json_roundtrip_and_errors():
    spec = InstanceSpec("noisy_stabilizer", 3, {"p": 0.1}, 4)
    assert InstanceSpec.from_json(spec.to_json()) == spec
    with pytest.raises(ValueError):
        InstanceSpec("nope", 3)
    with pytest.raises(ValueError):
        generate_instance(InstanceSpec("zeta", 3))


# command line -------------------------------------------------------------------

def _gen(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["gen", "--kind", "noisy_stabilizer", "--n", "3", "--param", "p=0.2", "--seed", "4",
                 "--out", str(path)]) == 0
    return path


def test_gen_writes_instance(tmp_path):
    obj = json.loads(_gen(tmp_path).read_text())
    assert set(obj) == {"spec", "rho", "planted", "optimum"}
    assert obj["spec"]["kind"] == "noisy_stabilizer"


def test_stab_run_outputs_and_replay(tmp_path, monkeypatch):
    inst = _gen(tmp_path)
    out = tmp_path / "r.jsonl"
    args = ["stab", "run", "--instance", str(inst), "--tau", "0.8", "--eps", "0.1", "--trials", "3",
            "--seed", "7", "--p-floor", "0.05", "--out", str(out)]
    assert main(args) == 0
    first = out.read_bytes()
    recs = [json.loads(line) for line in first.splitlines()]
    assert [r["trial_id"] for r in recs] == [0, 1, 2]
    assert all(r["success"] and r["ledger"]["base_copies"] > 0 for r in recs)
    assert (tmp_path / "r.jsonl.timing").exists()
    csv = (tmp_path / "r.csv").read_text().splitlines()
    assert csv[0].startswith("trials,completed,successes,success_rate")
    monkeypatch.setenv("STABBOOT_WORKERS", "2")
    assert main(args) == 0
    assert out.read_bytes() == first


@pytest.mark.parametrize("cmd", [["product", "run"], ["stabprod", "run", "--estimator", "pvm"]])
def test_product_runs_from_generator_spec(tmp_path, cmd):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"kind": "noisy_product", "n": 3, "p": 0.1}))
    out = tmp_path / "p.jsonl"
    assert main(cmd + ["--instance", str(spec), "--tau", "0.8", "--eps", "0.1", "--trials", "2", "--seed", "1",
                       "--p-floor", "0.05", "--out", str(out)]) == 0
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert all(r["success"] for r in recs)


def test_budget_exceeded_marks_trial_failed(tmp_path):
    inst = _gen(tmp_path)
    cfg = ExperimentConfig(algorithm="stab", instance=str(inst), master_seed=1, tau=0.8, eps=0.1,
                           budget_cap=1000, p_floor=0.05, out=str(tmp_path / "b.jsonl"))
    summary = run_experiment(cfg)
    rec = json.loads((tmp_path / "b.jsonl").read_text())
    assert summary["completed"] == 0 and not rec["success"]
    assert rec["error"].startswith("budget")


def test_config_errors(tmp_path, capsys):
    with pytest.raises(ConfigError, match="unknown config fields"):
        ExperimentConfig.from_dict({"algorithm": "stab", "instance": "x", "master_seed": 1, "bogus": 2})
    with pytest.raises(ConfigError, match="master_seed"):
        ExperimentConfig.from_dict({"algorithm": "stab", "instance": "x"})
    inst = _gen(tmp_path)
    assert main(["stab", "run", "--instance", str(inst), "--tau", "0.1", "--eps", "0.5", "--seed", "1"]) == 2
    assert "eps" in capsys.readouterr().err


def test_verify_reports_pass(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path / "v.json")]) == 0
    report = json.loads((tmp_path / "v.json").read_text())
    assert report["passed"] and len(report["checks"]) >= 5


@pytest.mark.parametrize("text,want", [("1000", 1000), ("1e12", 10 ** 12)])
def test_budget_cap_flag_accepts_scientific_notation(text, want):
    from stabboot.cli import build_parser
    args = build_parser().parse_args(["stab", "run", "--budget-cap", text])
    assert args.budget_cap == want
