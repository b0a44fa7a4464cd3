import json

import pytest
import yaml

from concavelab.cli import ConfigError, ExperimentConfig, config_hash, load_config, main, run


def _write_cfg(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


BASE_SOLVE = {
    "domain": {"kind": "interval", "halfwidth": 1.0},
    "resolution": 101,
    "reaction": {"kind": "log_schrodinger"},
}


def test_solve_subcommand_writes_artifacts(tmp_path):
    cfg = _write_cfg(tmp_path, "solve.yaml", BASE_SOLVE)
    out = tmp_path / "out"
    assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
    payload = json.loads((out / "solve.json").read_text())
    assert payload["converged"] is True
    assert payload["version"]
    assert payload["config_sha256"] == config_hash(load_config(cfg))
    field_lines = (out / "field.csv").read_text().splitlines()
    assert field_lines[0].startswith("# version=")
    assert field_lines[1] == "x,u"
    assert len(field_lines) == 2 + 101


def test_artifacts_are_deterministic(tmp_path):
    cfg = _write_cfg(
        tmp_path,
        "c.yaml",
        {
            "domain": {"kind": "interval", "halfwidth": 1.0},
            "resolution": 101,
            "schedule": {"sigma_rule": "fixed", "sigma": 1.0, "qs": [1.5, 1.25]},
        },
    )
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["converge-eigen", "--config", str(cfg), "--out", str(out)]) == 0
        outs.append(out)
    for fname in ("branch.csv", "converge_eigen.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_invalid_config_exits_2(tmp_path):
    cfg = _write_cfg(tmp_path, "bad.yaml", {"domain": {"kind": "pentagon"}})
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_missing_sections_exit_2(tmp_path):
    cfg = _write_cfg(tmp_path, "empty.yaml", {})
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_mismatched_experiment_rejected(tmp_path):
    data = dict(BASE_SOLVE)
    data["experiment"] = "branch"
    cfg = _write_cfg(tmp_path, "m.yaml", data)
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_dispersive_failure_exits_1(tmp_path):
    # sigma below the principal eigenvalue: no positive solution exists for
    # the polynomial half, so the run reports a numerical failure
    cfg = _write_cfg(
        tmp_path,
        "d.yaml",
        {
            "domain": {"kind": "box", "halfwidths": [1.0, 1.0]},
            "resolution": 41,
            "q": 2.0,
            "sigma": 4.0,
        },
    )
    out = tmp_path / "out"
    assert main(["dispersive", "--config", str(cfg), "--out", str(out)]) == 1
    payload = json.loads((out / "dispersive.json").read_text())
    assert payload["failures"]
    assert "polynomial" in payload


def test_dispersive_success(tmp_path):
    cfg = _write_cfg(
        tmp_path,
        "d6.yaml",
        {
            "domain": {"kind": "box", "halfwidths": [1.0, 1.0]},
            "resolution": 41,
            "q": 2.0,
            "sigma": 6.0,
        },
    )
    out = tmp_path / "out"
    assert main(["dispersive", "--config", str(cfg), "--out", str(out)]) == 0


def test_concavity_subcommand_with_expectations(tmp_path):
    cfg = _write_cfg(
        tmp_path,
        "c.yaml",
        {
            "domain": {"kind": "box", "halfwidths": [1.0, 1.0]},
            "resolution": 41,
            "reaction": {"kind": "log_schrodinger"},
            "transforms": [
                {"kind": "log", "expect": "holds strictly"},
                {"kind": "power", "alpha": 0.5},
            ],
            "alphas": [0.05, 0.2],
        },
    )
    out = tmp_path / "out"
    assert main(["concavity", "--config", str(cfg), "--out", str(out)]) == 0
    payload = json.loads((out / "concavity.json").read_text())
    assert payload["reports"][0]["verdict"] == "holds strictly"
    assert payload["alpha_sweep"] is not None
    header = (out / "field.csv").read_text().splitlines()[1]
    assert header.startswith("x,y,u,log")


def test_quasiconcavity_requires_seed(tmp_path):
    cfg = _write_cfg(
        tmp_path,
        "q.yaml",
        {
            "domain": {"kind": "box", "halfwidths": [1.0, 1.0]},
            "resolution": 41,
            "reaction": {"kind": "log_schrodinger"},
        },
    )
    assert main(["quasiconcavity", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert (
        main(
            [
                "quasiconcavity",
                "--config",
                str(cfg),
                "--out",
                str(tmp_path / "o2"),
                "--seed",
                "11",
            ]
        )
        == 0
    )


def test_pohozaev_subcommand(tmp_path):
    cfg = _write_cfg(
        tmp_path,
        "p.yaml",
        {"domain": {"kind": "ball", "radius": 2.0, "ambient_dim": 2}, "resolution": 201},
    )
    out = tmp_path / "out"
    assert main(["pohozaev", "--config", str(cfg), "--out", str(out)]) == 0
    payload = json.loads((out / "pohozaev.json").read_text())
    assert payload["passed"] is True


def test_oned_table_subcommand(tmp_path):
    cfg = _write_cfg(
        tmp_path,
        "t.yaml",
        {"b_grid": {"lo": 0.8, "hi": 2.0, "count": 4}, "samples_per_unit": 2000},
    )
    out = tmp_path / "out"
    assert main(["oned-table", "--config", str(cfg), "--out", str(out)]) == 0
    lines = (out / "oned_table.csv").read_text().splitlines()
    assert lines[1].split(",") == [
        "b", "m", "slope", "alpha_star", "x_star", "b_shoot_error", "energy_drift",
    ]
    assert len(lines) == 2 + 4


def test_tensor_check_subcommand(tmp_path):
    cfg = _write_cfg(
        tmp_path,
        "tc.yaml",
        {"halfwidths": [1.0, 1.0], "resolution": 41, "alphas": [0.1]},
    )
    out = tmp_path / "out"
    assert main(["tensor-check", "--config", str(cfg), "--out", str(out)]) == 0
    payload = json.loads((out / "tensor.json").read_text())
    assert payload["sup_error"] < 1e-6
    assert 3.0 <= payload["residual_ratio"] <= 5.0


def test_gausson_residual_subcommand(tmp_path):
    cfg = _write_cfg(
        tmp_path,
        "g.yaml",
        {"domain": {"kind": "box", "halfwidths": [1.0, 1.0]}, "resolutions": [21, 41]},
    )
    out = tmp_path / "out"
    assert main(["gausson-residual", "--config", str(cfg), "--out", str(out)]) == 0
    payload = json.loads((out / "gausson.json").read_text())
    assert payload["ratio_in_band"] is True


def test_energy_bound_subcommand(tmp_path):
    cfg = _write_cfg(
        tmp_path,
        "e.yaml",
        {
            "domain": {"kind": "interval", "halfwidth": 1.0},
            "resolution": 101,
            "q": 2.0,
            "sigma": 2.0,
        },
    )
    out = tmp_path / "out"
    assert main(["energy-bound", "--config", str(cfg), "--out", str(out)]) == 0
    payload = json.loads((out / "energy_bound.json").read_text())
    assert payload["energy"] <= payload["bound"]


def test_branch_subcommand_csv_columns(tmp_path):
    cfg = _write_cfg(
        tmp_path,
        "b.yaml",
        {
            "domain": {"kind": "interval", "halfwidth": 1.0},
            "resolution": 101,
            "schedule": {"sigma_rule": "log_path", "qs": [1.2, 1.1]},
        },
    )
    out = tmp_path / "out"
    assert main(["branch", "--config", str(cfg), "--out", str(out)]) == 0
    lines = (out / "branch.csv").read_text().splitlines()
    assert lines[1] == "q,sigma,sup_norm,sup_norm_pow_qm1,energy,nehari_residual,residual_sup,newton_iters"


def test_experiment_config_round_trip():
    cfg = ExperimentConfig(
        {
            "experiment": "solve",
            "domain": {"kind": "interval", "halfwidth": 1.0},
            "tolerances": {"newton": 1e-9},
            "seed": 3,
        }
    )
    again = ExperimentConfig.from_yaml(cfg.to_yaml())
    assert again == cfg
    assert again.hash() == cfg.hash()
    assert cfg.to_dict() == cfg.data and cfg.to_dict() is not cfg.data


def test_experiment_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig({"tolerances": {"newton": 0.0}})
    with pytest.raises(ConfigError):
        ExperimentConfig({"seed": -1})


def test_run_accepts_config_object(tmp_path):
    cfg = ExperimentConfig(dict(BASE_SOLVE))
    assert run("solve", cfg, tmp_path / "o") == 0
