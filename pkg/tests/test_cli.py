import json

import numpy as np
import pytest

from rldp import Alphabet, JointDistribution, Mechanism, constant_mechanism
from rldp.cli import cli_main

from conftest import random_joint


@pytest.fixture
def phat_file(tmp_path):
    rng = np.random.default_rng(70)
    phat = random_joint(Alphabet(2, 2), rng, floor=1e-2)
    path = tmp_path / "phat.json"
    path.write_text(phat.to_json(), encoding="utf-8")
    return path, phat


def test_solve_writes_mechanism_and_report(tmp_path, phat_file, capsys):
    path, phat = phat_file
    out = tmp_path / "mech.json"
    code = cli_main([
        "solve", "--variant", "nunp", "--phat", str(path), "--epsilon", "0.5",
        "--alpha", "0.05", "--n", "75", "--out", str(out),
    ])
    assert code == 0
    mech = Mechanism.from_json(out.read_text(encoding="utf-8"))
    assert mech.p.shape == (2, 2, 2)
    report = json.loads(capsys.readouterr().out)
    assert report["variant"] == "nunp"
    assert report["status"] in ("optimal", "near-optimal")
    assert report["eps_star_at_phat"] <= 0.5 + 1e-6
    assert report["verification_ok"] is True


def test_solve_with_radius_override(tmp_path, phat_file, capsys):
    path, _ = phat_file
    out = tmp_path / "mech.json"
    code = cli_main([
        "solve", "--variant", "rurp", "--phat", str(path), "--epsilon", "0.5",
        "--n", "75", "--B", "0.1", "--out", str(out),
    ])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert abs(report["radius"] - 0.1) < 1e-15


def test_eval_subcommand(tmp_path, capsys):
    alphabet = Alphabet(2, 2)
    dist = JointDistribution(alphabet, np.full(4, 0.25))
    mech = constant_mechanism(alphabet, 0)
    mech_path = tmp_path / "m.json"
    dist_path = tmp_path / "d.json"
    mech_path.write_text(mech.to_json(), encoding="utf-8")
    dist_path.write_text(dist.to_json(), encoding="utf-8")
    code = cli_main(["eval", "--mech", str(mech_path), "--dist", str(dist_path)])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["eps_star"] == 0.0
    assert abs(report["d_star"] - 0.5) < 1e-12


def test_scatter_and_sweep_roundtrip(tmp_path):
    cfg = {
        "s_size": 2, "u_size": 2, "alpha": 0.05, "epsilon": 0.5, "K": 2,
        "n": 40, "seed": 3, "variants": ["nunp"], "distortion": "squared",
        "solver_tol": 1e-8, "workers": 1,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg), encoding="utf-8")
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert cli_main(["scatter", "--config", str(cfg_path), "--out", str(out1)]) == 0
    assert cli_main(["scatter", "--config", str(cfg_path), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    header = out1.read_text(encoding="utf-8").split("\n")[0]
    assert header == "instance,seed,variant,eps_star,d_star,objective,pstar_in_F"

    cfg["n_list"] = [20, 40]
    cfg["K"] = 10
    del cfg["n"]
    cfg_path.write_text(json.dumps(cfg), encoding="utf-8")
    sweep_out = tmp_path / "s.csv"
    assert cli_main(["sweep", "--config", str(cfg_path), "--out", str(sweep_out)]) == 0
    assert sweep_out.read_text(encoding="utf-8").startswith(
        "N,variant,mean_eps,std_eps,mean_d,std_d,outliers_eps,outliers_d,n_inf")


def test_check_support_exit_codes(tmp_path):
    out = tmp_path / "gaps.csv"
    code = cli_main(["check", "support", "--trials", "300", "--dims", "4",
                     "--seed", "7", "--queries", "6", "--out", str(out)])
    assert code == 0
    lines = out.read_text(encoding="utf-8").strip().split("\n")
    assert lines[0] == "query_id,closed_form,oracle_bound,gap"
    assert len(lines) == 7


def test_usage_errors_exit_1(tmp_path, capsys):
    assert cli_main(["solve", "--variant", "zzz", "--phat", "x", "--n", "5",
                     "--out", "y"]) == 1
    assert cli_main(["nonsense"]) == 1
    assert cli_main([]) == 1
    missing = tmp_path / "missing.json"
    assert cli_main(["solve", "--variant", "nunp", "--phat", str(missing),
                     "--n", "75", "--out", str(tmp_path / "o.json")]) == 1
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert cli_main(["--help"]) == 0
    capsys.readouterr()
